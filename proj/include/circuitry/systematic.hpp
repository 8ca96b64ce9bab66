#pragma once

#include <optional>
#include <vector>

#include "circuitry/circuits.hpp"
#include "circuitry/combinatorics.hpp"
#include "circuitry/factorize.hpp"
#include "circuitry/rng.hpp"

namespace circuitry {

/// Column blocks for the deterministic sweep: r blocks covering 1..N, sizes
/// k and k+1, with r the smallest count satisfying n * ceil(N/r) <= m+1 so
/// that any n blocks together stay within one sample's worth of columns.
struct Partition {
  std::vector<IndexSet> blocks;
  int r = 0;
  int k = 0;
};

Partition choose_partition(int n_cols, int rank, int target_size, RngEngine& rng);

struct CircuitFindResult {
  bool found = false;
  std::optional<Circuit> circuit;
  long nullspace_evals = 0;
  long subsets_examined = 0;
  int max_depth = 0;
};

/// Deterministic certificate search: either produces a verified circuit of
/// size at most target_size, or proves none exists. Recurses on column
/// unions whose kernel dimension exceeds one; both the column count and the
/// rank drop strictly, so the recursion is finite. depth_guard < 0 selects
/// the default of cols + 2.
CircuitFindResult circuitfind(const Matrix& a, int target_size, const Tolerances& tol,
                              RngEngine& rng, int depth_guard = -1);

/// Work estimate for the sweep at sparsity ratio rho0 and slack s: the exact
/// subset count C(n+s, n) at n = floor(s * rho0 / (1 - rho0)), plus the
/// asymptotic growth base (1-rho0)^(rho0-1) * rho0^(-rho0).
struct CostEstimate {
  double subset_count = 0.0;
  double growth_base = 0.0;
  int context_size = 0;  // the n used for the count
};

CostEstimate systematic_cost_estimate(double rho0, int slack);

}  // namespace circuitry
