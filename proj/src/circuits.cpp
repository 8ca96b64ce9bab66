#include "circuitry/circuits.hpp"

#include <algorithm>
#include <cmath>

#include "circuitry/combinatorics.hpp"

namespace circuitry {

void normalize_witness(Vector& w, const Tolerances& tol) {
  const double norm = w.norm();
  if (norm == 0.0) throw InternalError("normalize_witness: zero vector");
  w /= norm;
  const double cutoff = tol.support_tol_factor * w.cwiseAbs().maxCoeff();
  for (int i = 0; i < w.size(); ++i) {
    if (std::abs(w[i]) > cutoff) {
      if (w[i] < 0.0) w = -w;
      return;
    }
  }
}

CircuitCheck is_circuit(const Matrix& a, const IndexSet& j, const Tolerances& tol) {
  if (j.empty()) throw InputError("is_circuit: empty index set");
  if (j[j.size() - 1] > a.cols()) throw InputError("is_circuit: index out of range");
  const Matrix sub = select_columns(a, j);
  const NullBasis nb = null_space_basis(sub, tol);
  if (nb.nullity != 1) return {};
  Vector w = nb.basis.col(0);
  if (support(w, tol).size() != j.size()) return {};
  Vector full = Vector::Zero(a.cols());
  for (int i = 0; i < j.size(); ++i) full[j[i] - 1] = w[i];
  normalize_witness(full, tol);
  return {true, full};
}

IndexSet prunable_columns(const Factorization& f, const Tolerances& tol) {
  if (!f.qstar) throw InternalError("prunable_columns: call ensure_qstar first");
  const Matrix& qs = *f.qstar;
  const int n = f.cols();
  const int m = f.rank;
  const double peak = qs.size() == 0 ? 0.0 : qs.cwiseAbs().maxCoeff();
  const double cutoff = tol.support_tol_factor * peak;
  std::vector<int> out;
  for (int row = 0; row < m; ++row) {
    const bool vanishes =
        qs.cols() == 0 || qs.row(row).cwiseAbs().maxCoeff() <= cutoff;
    if (vanishes) out.push_back(f.original_column(n - m + row + 1));
  }
  return IndexSet(std::move(out));
}

IndexSet circuit_from_qstar_witness(const IndexSet& k_permuted, const Vector& w,
                                    const Matrix& qstar, const std::vector<int>& perm,
                                    const Tolerances& tol) {
  const int n = static_cast<int>(perm.size());
  const int m = static_cast<int>(qstar.rows());
  std::vector<int> k1, k2;
  for (int idx : k_permuted) {
    if (idx <= n - m)
      k1.push_back(idx);
    else
      k2.push_back(idx - (n - m));
  }
  if (static_cast<int>(k1.size()) != w.size())
    throw InputError("circuit_from_qstar_witness: witness length does not match K1");
  if (w.size() == 0 || w.cwiseAbs().maxCoeff() == 0.0)
    throw InternalError("circuit_from_qstar_witness: zero witness");

  Vector y(static_cast<int>(k2.size()));
  if (!k2.empty()) {
    Matrix block(static_cast<int>(k2.size()), static_cast<int>(k1.size()));
    for (std::size_t r = 0; r < k2.size(); ++r)
      for (std::size_t c = 0; c < k1.size(); ++c)
        block(static_cast<int>(r), static_cast<int>(c)) = qstar(k2[r] - 1, k1[c] - 1);
    y = block * w;
  }

  // One support threshold for the whole kernel vector, which lives half on
  // the K1 part (w) and half on the trailing part (y).
  double peak = w.cwiseAbs().maxCoeff();
  if (y.size() > 0) peak = std::max(peak, y.cwiseAbs().maxCoeff());
  const double cutoff = tol.support_tol_factor * peak;

  std::vector<int> positions;
  for (int i = 0; i < w.size(); ++i)
    if (std::abs(w[i]) > cutoff) positions.push_back(k1[static_cast<std::size_t>(i)]);
  for (int i = 0; i < y.size(); ++i)
    if (std::abs(y[i]) > cutoff) positions.push_back(k2[static_cast<std::size_t>(i)] + n - m);
  return map_through_perm(IndexSet(std::move(positions)), perm);
}

std::vector<Circuit> brute_force_circuits(const Matrix& a, int max_size, const Tolerances& tol) {
  const int n = static_cast<int>(a.cols());
  if (n > 24) throw InputError("brute_force_circuits: refusing more than 24 columns");
  if (max_size > 8) throw InputError("brute_force_circuits: refusing max_size above 8");
  if (max_size < 1) throw InputError("brute_force_circuits: max_size must be at least 1");
  std::vector<Circuit> found;
  for (int size = 1; size <= std::min(max_size, n); ++size) {
    std::vector<int> comb(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) comb[static_cast<std::size_t>(i)] = i + 1;
    do {
      const IndexSet j(comb);
      auto check = is_circuit(a, j, tol);
      if (check.is_circuit) found.push_back({j, std::move(*check.witness)});
    } while (next_combination_inplace(comb, n));
  }
  std::sort(found.begin(), found.end(),
            [](const Circuit& x, const Circuit& y) { return x.indices < y.indices; });
  return found;
}

}  // namespace circuitry
