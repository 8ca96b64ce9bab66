#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "circuitry/circuits.hpp"
#include "circuitry/factorize.hpp"
#include "circuitry/rng.hpp"
#include "circuitry/search_driver.hpp"

namespace circuitry {

enum class SearchVariant { OnQ, OnQstar };

struct SearchConfig {
  int max_size = 0;       // n: accept circuits up to this many columns
  double epsilon = 0.01;  // stop once the escape probability drops below this
  std::uint64_t seed = 0;
  SearchVariant variant = SearchVariant::OnQ;
  long max_trials = -1;
  int threads = 1;
  std::optional<Tolerances> tolerances;
};

struct SearchOutcome {
  SearchStatus status = SearchStatus::NotFound;
  std::optional<Circuit> circuit;
  SearchState state;
  long rejected_candidates = 0;
  bool truncated = false;
};

/// Monte Carlo search on the row-orthonormal factor: sample m+1 columns of Q,
/// shrink while the kernel has dimension above one, and accept the kernel
/// support once it has at most max_size elements. Results use original column
/// numbering and are re-verified before being reported.
SearchOutcome search_q(const Factorization& f, const SearchConfig& cfg);

/// Same search expressed on the compressed coefficient block Q*, which only
/// touches a hypergeometric-sized submatrix per trial. Requires f.qstar.
SearchOutcome search_qstar(const Factorization& f, const SearchConfig& cfg);

/// One trial of the Q-variant; exposed for detection-frequency estimates.
TrialResult<Circuit> single_trial_q(const Factorization& f, int max_size, const Tolerances& tol,
                                    RngEngine& rng);

/// Probability that one trial's m+1 sampled columns contain a fixed circuit
/// of size n: C(N-n, m+1-n) / C(N, m+1).
double detection_probability(int n_cols, int rank, int circuit_size);

/// Detection probability when several disjoint circuits of the given sizes
/// are present, with rho the sampling ratio: 1 - prod_j (1 - rho^{c_j}).
double multi_circuit_probability(double rho, const std::vector<int>& sizes);

/// Trials needed to push the escape probability below epsilon using the
/// rho^n lower bound: ceil(-ln(epsilon) / rho^n).
long required_trials(double epsilon, double rho, int circuit_size);

/// Rough expected trials until detection: rho^{-n}.
double expected_trials(double rho, int circuit_size);

/// Repeated search: report a found circuit, drop its lowest-numbered column,
/// re-factorize, continue until a pass ends with nothing found. Circuits are
/// verified against the original matrix and reported in its numbering.
struct EnumerationResult {
  std::vector<Circuit> circuits;
  SearchState state;  // aggregated over all passes
  bool truncated = false;
};

EnumerationResult enumerate_circuits(const Matrix& a, const SearchConfig& cfg);

}  // namespace circuitry
