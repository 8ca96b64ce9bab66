#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include "circuitry/combinatorics.hpp"
#include "circuitry/matrix.hpp"

namespace circuitry {

enum class SearchStatus { Found, NotFound };

struct SearchState {
  double p = 1.0;  // residual probability that a wanted set escaped every trial
  long trials = 0;
  long nullspace_evals = 0;
  std::uint64_t seed = 0;
};

/// What a single independent trial reports back to the driver.
template <class Payload>
struct TrialResult {
  std::optional<Payload> candidate;  // present when the trial resolved to a small set
  bool verified = false;
  int subset_size = 0;  // |K| when the trial concluded; drives the p update
  long evals = 0;
};

template <class Payload>
struct DriverOutcome {
  SearchStatus status = SearchStatus::NotFound;
  std::optional<Payload> payload;
  SearchState state;
  long rejected_candidates = 0;
  bool truncated = false;
};

struct DriverParams {
  int cols = 0;         // N, for the containment probabilities
  int target_size = 0;  // n
  double stop_threshold = 0.01;
  std::uint64_t seed = 0;
  long max_trials = -1;  // < 0: no cap
  int threads = 1;
};

/// Runs trials in index order until one produces a verified candidate or the
/// residual probability drops to the stop threshold. Trials are pure
/// functions of (seed, index), so batches may execute on worker threads and
/// the outcome is still independent of thread count: results are consumed
/// strictly in index order and surplus batch results are discarded.
template <class Payload, class TrialFn>
DriverOutcome<Payload> run_trial_loop(const DriverParams& params, TrialFn&& trial_of_index) {
  if (!(params.stop_threshold > 0.0) || !(params.stop_threshold < 1.0))
    throw InputError("search: stop threshold must lie in (0, 1)");

  DriverOutcome<Payload> out;
  out.state.seed = params.seed;
  const double log_stop = std::log(params.stop_threshold);

  std::map<int, long> miss_counts;
  std::map<int, double> log_factor;  // log(1 - q_r), cached per subset size
  auto residual_log_p = [&]() {
    double lp = 0.0;
    for (const auto& [r, count] : miss_counts) lp += static_cast<double>(count) * log_factor[r];
    return lp;
  };

  const int threads = std::max(1, params.threads);
  long next_index = 0;
  for (;;) {
    long batch = threads;
    if (params.max_trials >= 0) batch = std::min<long>(batch, params.max_trials - next_index);
    if (batch <= 0) {
      out.truncated = true;
      out.state.p = std::exp(residual_log_p());
      return out;
    }

    std::vector<TrialResult<Payload>> results(static_cast<std::size_t>(batch));
    if (threads == 1 || batch == 1) {
      for (long i = 0; i < batch; ++i)
        results[static_cast<std::size_t>(i)] = trial_of_index(next_index + i);
    } else {
      std::vector<std::thread> workers;
      workers.reserve(static_cast<std::size_t>(threads));
      for (int w = 0; w < threads; ++w) {
        workers.emplace_back([&, w]() {
          for (long i = w; i < batch; i += threads)
            results[static_cast<std::size_t>(i)] = trial_of_index(next_index + i);
        });
      }
      for (auto& t : workers) t.join();
    }

    for (long i = 0; i < batch; ++i) {
      auto& r = results[static_cast<std::size_t>(i)];
      out.state.trials = next_index + i + 1;
      out.state.nullspace_evals += r.evals;
      if (r.candidate && r.verified) {
        out.status = SearchStatus::Found;
        out.payload = std::move(r.candidate);
        out.state.p = std::exp(residual_log_p());
        return out;
      }
      if (r.candidate) ++out.rejected_candidates;
      if (log_factor.find(r.subset_size) == log_factor.end()) {
        const double q =
            subset_containment_probability(params.cols, r.subset_size, params.target_size);
        log_factor[r.subset_size] = std::log1p(-q);
      }
      ++miss_counts[r.subset_size];
      const double lp = residual_log_p();
      if (lp <= log_stop) {
        out.state.p = std::exp(lp);
        return out;
      }
    }
    next_index += batch;
  }
}

}  // namespace circuitry
