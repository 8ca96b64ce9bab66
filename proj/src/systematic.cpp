#include "circuitry/systematic.hpp"

#include <algorithm>
#include <cmath>

namespace circuitry {
namespace {

struct RecursionStats {
  long evals = 0;
  long subsets = 0;
  int max_depth = 0;
};

// Same floor the sampling trials use: kernel vectors of scanned blocks hold
// noise around eps * kappa, which the strict cutoff would count as support.
Tolerances support_read_tol(Tolerances t) {
  t.support_tol_factor = std::max(t.support_tol_factor, 1e-8);
  return t;
}

// Circuit of the level-local matrix, or nothing. Indices are local columns.
std::optional<Circuit> find_in(const Matrix& a, int n, const Tolerances& tol, RngEngine& rng,
                               int depth, int depth_guard, RecursionStats& stats) {
  if (depth > depth_guard) throw InternalError("circuitfind: recursion guard tripped");
  stats.max_depth = std::max(stats.max_depth, depth);

  const int cols = static_cast<int>(a.cols());
  Factorization f = lq_factor(a, tol);
  const int m = f.rank;
  if (m >= cols) return std::nullopt;  // columns independent, nothing to find

  if (cols == m + 1) {
    // Kernel is one-dimensional; its support is the only candidate.
    NullBasis nb = null_space_basis(a, tol);
    ++stats.evals;
    if (nb.nullity != 1) return std::nullopt;
    const IndexSet supp = support(nb.basis.col(0), support_read_tol(tol));
    if (supp.size() > n) return std::nullopt;
    auto check = is_circuit(a, supp, tol);
    if (!check.is_circuit) return std::nullopt;
    return Circuit{supp, std::move(*check.witness)};
  }

  const Partition part = choose_partition(cols, m, n, rng);
  std::vector<int> comb(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) comb[static_cast<std::size_t>(i)] = i + 1;
  do {
    IndexSet joined;
    for (int b : comb) joined = joined.unioned(part.blocks[static_cast<std::size_t>(b - 1)]);
    ++stats.subsets;
    const Matrix sub = select_columns(f.q, joined);
    NullBasis nb = null_space_basis(sub, tol);
    ++stats.evals;
    if (nb.nullity == 0) continue;
    if (nb.nullity == 1) {
      const IndexSet supp_pos = support(nb.basis.col(0), support_read_tol(tol));
      if (supp_pos.size() > n) continue;
      std::vector<int> q_pos;
      for (int p : supp_pos) q_pos.push_back(joined[p - 1]);
      const IndexSet candidate = map_through_perm(IndexSet(std::move(q_pos)), f.perm);
      auto check = is_circuit(a, candidate, tol);
      if (!check.is_circuit) continue;
      return Circuit{candidate, std::move(*check.witness)};
    }
    // Kernel dimension > 1: the union still hides more than one dependency.
    auto inner = find_in(sub, n, tol, rng, depth + 1, depth_guard, stats);
    if (inner) {
      std::vector<int> q_pos;
      for (int p : inner->indices) q_pos.push_back(joined[p - 1]);
      const IndexSet candidate = map_through_perm(IndexSet(std::move(q_pos)), f.perm);
      auto check = is_circuit(a, candidate, tol);
      if (!check.is_circuit)
        throw InternalError("circuitfind: inner certificate failed at the outer level");
      return Circuit{candidate, std::move(*check.witness)};
    }
  } while (next_combination_inplace(comb, part.r));
  return std::nullopt;
}

}  // namespace

Partition choose_partition(int n_cols, int rank, int target_size, RngEngine& rng) {
  if (target_size < 1) throw InputError("choose_partition: target size must be positive");
  if (rank >= n_cols) throw InputError("choose_partition: rank must be below the column count");
  if (target_size > rank + 1)
    throw InputError("choose_partition: no feasible block count, target size " +
                     std::to_string(target_size) + " exceeds what rank " +
                     std::to_string(rank) + " permits");
  int r = 0;
  for (int cand = 1; cand <= n_cols; ++cand) {
    const int ceil_div = (n_cols + cand - 1) / cand;
    if (static_cast<long>(target_size) * ceil_div <= rank + 1) {
      r = cand;
      break;
    }
  }
  if (r == 0) throw InternalError("choose_partition: no block count found");

  Partition part;
  part.r = r;
  part.k = n_cols / r;
  std::vector<int> cols(static_cast<std::size_t>(n_cols));
  for (int i = 0; i < n_cols; ++i) cols[static_cast<std::size_t>(i)] = i + 1;
  for (int i = n_cols - 1; i > 0; --i) {
    const auto j = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(i + 1)));
    std::swap(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
  }
  const int bigger = n_cols % r;
  std::size_t at = 0;
  for (int b = 0; b < r; ++b) {
    const int size = part.k + (b < bigger ? 1 : 0);
    std::vector<int> block(cols.begin() + static_cast<long>(at),
                           cols.begin() + static_cast<long>(at) + size);
    at += static_cast<std::size_t>(size);
    part.blocks.emplace_back(std::move(block));
  }
  return part;
}

CircuitFindResult circuitfind(const Matrix& a, int target_size, const Tolerances& tol,
                              RngEngine& rng, int depth_guard) {
  require_finite(a, "circuitfind");
  tol.validate();
  if (target_size < 1) throw InputError("circuitfind: target size must be positive");
  if (depth_guard < 0) depth_guard = static_cast<int>(a.cols()) + 2;

  RecursionStats stats;
  auto found = find_in(a, target_size, tol, rng, 0, depth_guard, stats);
  CircuitFindResult result;
  result.nullspace_evals = stats.evals;
  result.subsets_examined = stats.subsets;
  result.max_depth = stats.max_depth;
  if (found) {
    result.found = true;
    result.circuit = std::move(found);
  }
  return result;
}

CostEstimate systematic_cost_estimate(double rho0, int slack) {
  if (!(rho0 > 0.0) || !(rho0 < 1.0))
    throw InputError("systematic_cost_estimate: rho0 must lie in (0, 1)");
  if (slack < 1) throw InputError("systematic_cost_estimate: slack must be positive");
  CostEstimate est;
  est.context_size = static_cast<int>(std::floor(slack * rho0 / (1.0 - rho0)));
  est.subset_count = binomial(est.context_size + slack, est.context_size);
  est.growth_base = std::pow(1.0 - rho0, rho0 - 1.0) * std::pow(rho0, -rho0);
  return est;
}

}  // namespace circuitry
