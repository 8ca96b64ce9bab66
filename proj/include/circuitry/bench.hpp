#pragma once

#include <cstdint>
#include <vector>

namespace circuitry {

/// Detection frequency of a single sampling trial against the closed-form
/// probability, one row per (density, plant layout, column count) cell.
struct Table1Row {
  double rho = 0.0;
  std::vector<int> sizes;
  int n_cols = 0;
  int reps = 0;
  double theory = 0.0;
  double frequency = 0.0;
};

/// Each cell plants its layout in a fresh random instance and runs `reps`
/// independent single trials; a trial scores when it resolves to a verified
/// set of at most max(sizes) columns.
std::vector<Table1Row> run_table1(const std::vector<int>& col_counts, int reps,
                                  std::uint64_t seed);

/// Random sampling versus the deterministic sweep, run to the first find on
/// instances with one planted five-column set.
struct Table2Row {
  double rho = 0.0;
  int n_cols = 0;
  int circuit_size = 0;
  int attempts = 0;
  double expected_trials = 0.0;  // rho^{-size}
  double mean_search_trials = 0.0;
  double mean_search_evals = 0.0;
  double mean_systematic_evals = 0.0;
  int search_failures = 0;      // hit the trial cap before finding
  int systematic_failures = 0;  // sweep missed the plant (should stay 0)
};

std::vector<Table2Row> run_table2(int n_cols, int attempts, std::uint64_t seed,
                                  bool include_sparse_row);

}  // namespace circuitry
