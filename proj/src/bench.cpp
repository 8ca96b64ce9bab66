#include "circuitry/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "circuitry/factorize.hpp"
#include "circuitry/generators.hpp"
#include "circuitry/search.hpp"
#include "circuitry/systematic.hpp"

namespace circuitry {
namespace {

struct Cell {
  double rho;
  std::vector<int> sizes;
};

const Cell kTable1Cells[] = {
    {0.9, {6}},
    {0.7, {5, 5, 5}},
    {0.5, {4, 4}},
    {0.3, {3, 3, 3, 3, 3}},
};

}  // namespace

std::vector<Table1Row> run_table1(const std::vector<int>& col_counts, int reps,
                                  std::uint64_t seed) {
  if (reps < 1) throw InputError("need at least one repetition");
  std::vector<Table1Row> rows;
  // Mixing first keeps adjacent user seeds from yielding swapped cell streams.
  const std::uint64_t mixed = splitmix64(seed);
  std::uint64_t cell_id = 0;
  for (int n_cols : col_counts) {
    for (const Cell& cell : kTable1Cells) {
      ++cell_id;
      Table1Row row;
      row.rho = cell.rho;
      row.sizes = cell.sizes;
      row.n_cols = n_cols;
      row.reps = reps;
      row.theory = multi_circuit_probability(cell.rho, cell.sizes);

      PlantSpec spec;
      spec.n_cols = n_cols;
      spec.rho = cell.rho;
      spec.sizes = cell.sizes;
      spec.seed = splitmix64(mixed ^ (0x7ab1e100ULL + cell_id));
      PlantedInstance inst = planted_circuit_matrix(spec);
      const Tolerances tol = resolve_tolerances(inst.a);
      Factorization f = lq_factor(inst.a, tol);
      const int n = *std::max_element(cell.sizes.begin(), cell.sizes.end());

      // The detection probability is over the sampled subset, so one
      // instance per cell estimates the same quantity as fresh instances.
      long hits = 0;
      for (int t = 0; t < reps; ++t) {
        RngEngine rng = stream_rng(spec.seed, 0xfeed0000ULL + static_cast<std::uint64_t>(t));
        TrialResult<Circuit> res = single_trial_q(f, n, tol, rng);
        if (res.verified) ++hits;
      }
      row.frequency = static_cast<double>(hits) / reps;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<Table2Row> run_table2(int n_cols, int attempts, std::uint64_t seed,
                                  bool include_sparse_row) {
  if (attempts < 1) throw InputError("need at least one attempt");
  std::vector<double> rhos = {0.9, 0.7, 0.5};
  if (include_sparse_row) rhos.push_back(0.3);
  const int size = 5;

  std::vector<Table2Row> rows;
  const std::uint64_t mixed = splitmix64(seed);
  std::uint64_t rho_id = 0;
  for (double rho : rhos) {
    ++rho_id;
    Table2Row row;
    row.rho = rho;
    row.n_cols = n_cols;
    row.circuit_size = size;
    row.attempts = attempts;
    row.expected_trials = expected_trials(rho, size);
    const long trial_cap =
        std::max<long>(10000, static_cast<long>(200.0 * row.expected_trials));

    long sum_trials = 0;
    long sum_evals = 0;
    long sum_sys_evals = 0;
    for (int attempt = 0; attempt < attempts; ++attempt) {
      const std::uint64_t attempt_seed =
          splitmix64(mixed ^ (0x7ab1e200ULL + (rho_id << 32) + static_cast<std::uint64_t>(attempt)));
      PlantSpec spec;
      spec.n_cols = n_cols;
      spec.rho = rho;
      spec.sizes = {size};
      spec.seed = attempt_seed;
      PlantedInstance inst = orthonormal_row_instance(spec);
      const Tolerances tol = resolve_tolerances(inst.a);
      Factorization f = lq_factor(inst.a, tol);

      SearchConfig cfg;
      cfg.max_size = size;
      // Run to the find itself: an impossibly small stop threshold keeps the
      // escape-probability rule from ending the attempt first.
      cfg.epsilon = std::numeric_limits<double>::min();
      cfg.seed = splitmix64(attempt_seed ^ 0x5ea9c4);
      cfg.max_trials = trial_cap;
      SearchOutcome search = search_q(f, cfg);
      if (search.status == SearchStatus::Found) {
        sum_trials += search.state.trials;
        sum_evals += search.state.nullspace_evals;
      } else {
        ++row.search_failures;
        sum_trials += search.state.trials;
        sum_evals += search.state.nullspace_evals;
      }

      RngEngine sys_rng = stream_rng(attempt_seed, 0x515);
      CircuitFindResult sys = circuitfind(inst.a, size, tol, sys_rng);
      if (!sys.found) ++row.systematic_failures;
      sum_sys_evals += sys.nullspace_evals;
    }
    row.mean_search_trials = static_cast<double>(sum_trials) / attempts;
    row.mean_search_evals = static_cast<double>(sum_evals) / attempts;
    row.mean_systematic_evals = static_cast<double>(sum_sys_evals) / attempts;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace circuitry
