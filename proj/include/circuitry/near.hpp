#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "circuitry/matrix.hpp"
#include "circuitry/search_driver.hpp"

namespace circuitry {

/// Column set whose submatrix drops below epsilon in its smallest singular
/// value while every one-column-removed subset stays above it.
struct NearCircuit {
  IndexSet indices;
  Vector witness;  // length N, unit norm
  double epsilon = 0.0;
  double sigma_in = 0.0;        // smallest singular value of A(:,indices)
  double sigma_out_min = 0.0;   // min over k of sigma_min(A(:,indices \ k))
};

/// Split of the column-counted spectrum at epsilon: the m largest singular
/// values stay above it, the rest at or below. Valid only with a margin of
/// rank_tol_factor * sigma_max on both sides.
struct SpectralSplit {
  int m = 0;
  std::vector<double> sigmas;  // N values, descending, zero padded if M < N
};

SpectralSplit spectral_split(const Matrix& a, double epsilon, const Tolerances& tol);

struct NearCircuitCheck {
  bool ok = false;
  std::optional<NearCircuit> near;
  double sigma_in = 0.0;
  double sigma_out_min = 0.0;
};

/// Full definition check with fresh singular value decompositions for the
/// set and for each one-removed subset.
NearCircuitCheck verify_near_circuit(const Matrix& a, const IndexSet& i, double epsilon,
                                     const Tolerances& tol);

/// Mass bound off a near-dependent set: if A x has norm at most epsilon with
/// x unit and supported on I, and the second singular value sigma2 of A
/// exceeds epsilon, then the bottom singular vector v satisfies
/// sum_{j not in I} v_j^2 <= epsilon^2 / (sigma2^2 - epsilon^2).
double witness_concentration_bound(double epsilon, double sigma2);

/// Residual bound after restricting the bottom singular vector to I and
/// renormalizing, with delta^2 the discarded mass:
/// sqrt(sigma1^2 (1 - delta^2) + sigma_max^2 delta^2).
double truncation_quality_bound(double sigma1, double sigma_max, double delta);

struct NearSearchConfig {
  int max_size = 0;
  double epsilon = 0.0;
  double delta = 0.05;  // stop once the escape probability drops below this
  std::uint64_t seed = 0;
  long max_trials = -1;
  int threads = 1;
  std::optional<Tolerances> tolerances;
};

struct NearSearchOutcome {
  SearchStatus status = SearchStatus::NotFound;
  std::optional<NearCircuit> near;
  SearchState state;
  long rejected_candidates = 0;
  bool truncated = false;
  int split_m = 0;
};

/// Monte Carlo near-dependency search: sample m+1 columns with m from the
/// global spectral split, look at how many singular values fall at or below
/// epsilon, shrink while there is more than one, and test the positions
/// carrying the largest weight of the bottom singular vector. Candidates
/// failing the full minimality check are counted and skipped.
NearSearchOutcome near_search(const Matrix& a, const NearSearchConfig& cfg);

struct BisectionResult {
  double epsilon_star = 0.0;
  std::optional<NearCircuit> near;
  long total_trials = 0;
};

/// Geometric bisection on epsilon between eps_lo and eps_hi: levels that
/// find a verified near circuit pull the upper bound down, misses push the lower
/// bound up. Each level derives its own seed from (seed, level). Epsilons
/// that do not split the spectrum are nudged into the nearest workable gap.
BisectionResult minimal_epsilon_bisection(const Matrix& a, int max_size, double delta,
                                          std::uint64_t seed, double eps_lo, double eps_hi,
                                          int iterations = 20, int threads = 1);

}  // namespace circuitry
