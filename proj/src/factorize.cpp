#include "circuitry/factorize.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace circuitry {
namespace {

// BDCSVD is noticeably faster than JacobiSVD from ~30 columns up; both
// produce singular values in descending order.
template <unsigned Options>
Eigen::BDCSVD<Matrix> svd_of(const Matrix& a) {
  return Eigen::BDCSVD<Matrix>(a, Options);
}

int rank_from_sigmas(const Eigen::VectorXd& sv, double rank_tol_factor) {
  if (sv.size() == 0) return 0;
  const double cutoff = rank_tol_factor * sv[0];
  int r = 0;
  while (r < sv.size() && sv[r] > cutoff) ++r;
  // sigma_max == 0 means the zero matrix.
  return sv[0] == 0.0 ? 0 : r;
}

}  // namespace

RankEstimate estimate_rank(const Matrix& a, const Tolerances& tol) {
  require_finite(a, "estimate_rank");
  tol.validate();
  if (a.rows() == 0 || a.cols() == 0) return {0, {}};
  const auto svd = svd_of<0>(a);
  RankEstimate out;
  out.rank = rank_from_sigmas(svd.singularValues(), tol.rank_tol_factor);
  out.singular_values.assign(svd.singularValues().data(),
                             svd.singularValues().data() + svd.singularValues().size());
  return out;
}

std::vector<int> Factorization::inverse_perm() const {
  std::vector<int> inv(perm.size());
  for (std::size_t pos = 0; pos < perm.size(); ++pos)
    inv[static_cast<std::size_t>(perm[pos] - 1)] = static_cast<int>(pos) + 1;
  return inv;
}

Factorization lq_factor(const Matrix& a, const Tolerances& tol) {
  require_finite(a, "lq_factor");
  tol.validate();
  if (a.rows() == 0 || a.cols() == 0) throw InputError("lq_factor: empty matrix");
  const int n = static_cast<int>(a.cols());

  const auto svd = svd_of<Eigen::ComputeThinU | Eigen::ComputeThinV>(a);
  const int m = rank_from_sigmas(svd.singularValues(), tol.rank_tol_factor);

  Matrix q0 = svd.matrixV().leftCols(m).transpose();  // m x N, original order
  Matrix l = svd.matrixU().leftCols(m) * svd.singularValues().head(m).asDiagonal();

  // Pivoted QR on Q picks the m most independent columns; those go last so
  // the trailing block is invertible and well conditioned.
  std::vector<char> is_trailing(static_cast<std::size_t>(n), 0);
  if (m > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(q0);
    const auto& piv = qr.colsPermutation().indices();
    for (int i = 0; i < m; ++i) is_trailing[static_cast<std::size_t>(piv[i])] = 1;
  }
  std::vector<int> perm;
  perm.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    if (!is_trailing[static_cast<std::size_t>(j)]) perm.push_back(j + 1);
  for (int j = 0; j < n; ++j)
    if (is_trailing[static_cast<std::size_t>(j)]) perm.push_back(j + 1);

  Factorization f;
  f.rank = m;
  f.perm = perm;
  f.q.resize(m, n);
  for (int j = 0; j < n; ++j) f.q.col(j) = q0.col(perm[static_cast<std::size_t>(j)] - 1);
  f.l = std::move(l);
  return f;
}

NullBasis null_space_basis(const Matrix& b, const Tolerances& tol) {
  tol.validate();
  const int cols = static_cast<int>(b.cols());
  if (cols == 0) return {Matrix(0, 0), 0};
  if (b.rows() == 0) {
    NullBasis nb;
    nb.nullity = cols;
    nb.basis = Matrix::Identity(cols, cols);
    return nb;
  }
  require_finite(b, "null_space_basis");
  const auto svd = svd_of<Eigen::ComputeFullV>(b);
  const int rank = rank_from_sigmas(svd.singularValues(), tol.rank_tol_factor);
  NullBasis nb;
  nb.nullity = cols - rank;
  nb.basis = svd.matrixV().rightCols(nb.nullity);
  return nb;
}

namespace {

// The coefficient block X with Q2 * X = Q1; rows follow the trailing
// (most independent) columns, columns follow the leading ones.
Matrix solve_qstar(const Factorization& f) {
  const int n = f.cols();
  const int m = f.rank;
  if (m == 0) return Matrix(0, n);
  const Matrix q1 = f.q.leftCols(n - m);
  const Matrix q2 = f.q.rightCols(m);
  Eigen::ColPivHouseholderQR<Matrix> solver(q2);
  if (solver.rank() < m)
    throw InternalError("fundamental_null_basis: trailing block is singular; re-run lq_factor");
  Matrix x = solver.solve(q1);
  const double residual = (q2 * x - q1).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, q1.cwiseAbs().maxCoeff());
  if (!(residual <= 1e-8 * scale))
    throw InternalError("fundamental_null_basis: trailing block too ill-conditioned");
  return x;
}

}  // namespace

Matrix fundamental_null_basis(const Factorization& f) {
  const int n = f.cols();
  const int m = f.rank;
  const Matrix x = f.qstar ? *f.qstar : solve_qstar(f);
  Matrix c(n, n - m);
  c.topRows(n - m) = Matrix::Identity(n - m, n - m);
  c.bottomRows(m) = -x;
  return c;
}

void ensure_qstar(Factorization& f) {
  if (!f.qstar) f.qstar = solve_qstar(f);
}

IndexSet support(const Vector& v, const Tolerances& tol) {
  tol.validate();
  if (v.size() == 0) throw InputError("support: empty vector");
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak == 0.0) throw InputError("support: zero vector has no support");
  const double cutoff = tol.support_tol_factor * peak;
  std::vector<int> idx;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > cutoff) idx.push_back(i + 1);
  return IndexSet(std::move(idx));
}

std::vector<double> column_singular_values(const Matrix& a) {
  require_finite(a, "column_singular_values");
  const auto svd = svd_of<0>(a);
  std::vector<double> out(svd.singularValues().data(),
                          svd.singularValues().data() + svd.singularValues().size());
  out.resize(static_cast<std::size_t>(a.cols()), 0.0);
  return out;
}

IndexSet map_through_perm(const IndexSet& positions, const std::vector<int>& perm) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(positions.size()));
  for (int pos : positions) out.push_back(perm[static_cast<std::size_t>(pos - 1)]);
  return IndexSet(std::move(out));
}

IndexSet map_to_positions(const IndexSet& original, const std::vector<int>& inverse_perm) {
  return map_through_perm(original, inverse_perm);
}

}  // namespace circuitry
