#include "circuitry/near.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "circuitry/circuits.hpp"
#include "circuitry/combinatorics.hpp"
#include "circuitry/factorize.hpp"
#include "circuitry/rng.hpp"

namespace circuitry {
namespace {

// Smallest of the column-counted singular values: a block with fewer rows
// than columns has a nontrivial kernel, so the padded spectrum ends in zero.
double smallest_sigma(const Matrix& a) {
  if (a.cols() == 0) return std::numeric_limits<double>::infinity();
  if (a.rows() < a.cols()) return 0.0;
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues()(a.cols() - 1);
}

struct NearTrialPayload {
  NearCircuit near;
};

}  // namespace

SpectralSplit spectral_split(const Matrix& a, double epsilon, const Tolerances& tol) {
  require_finite(a, "spectral_split");
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  SpectralSplit out;
  out.sigmas = column_singular_values(a);
  const double top = out.sigmas.empty() ? 0.0 : out.sigmas.front();
  const double margin = tol.rank_tol_factor * top;
  int m = 0;
  while (m < static_cast<int>(out.sigmas.size()) && out.sigmas[m] > epsilon) ++m;
  // Both neighbors must clear the threshold by the rank margin, otherwise
  // epsilon sits inside a cluster and the split is numerically meaningless.
  if (m > 0 && out.sigmas[m - 1] - epsilon <= margin)
    throw InputError("epsilon does not separate the spectrum: sigma_" + std::to_string(m) + " = " +
                     std::to_string(out.sigmas[m - 1]) + " is too close");
  if (m < static_cast<int>(out.sigmas.size()) && epsilon - out.sigmas[m] <= margin)
    throw InputError("epsilon does not separate the spectrum: sigma_" + std::to_string(m + 1) +
                     " = " + std::to_string(out.sigmas[m]) + " is too close");
  out.m = m;
  return out;
}

NearCircuitCheck verify_near_circuit(const Matrix& a, const IndexSet& i, double epsilon,
                                     const Tolerances& tol) {
  require_finite(a, "verify_near_circuit");
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (i.empty()) throw InputError("empty candidate set");
  if (i[i.size() - 1] > a.cols()) throw InputError("candidate index out of range");

  NearCircuitCheck out;
  const Matrix sub = select_columns(a, i);
  Eigen::BDCSVD<Matrix> svd(sub, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  out.sigma_in = (sub.rows() < sub.cols()) ? 0.0 : sv(sv.size() - 1);
  out.sigma_out_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < i.size(); ++k) {
    const IndexSet rest = i.without(i[k]);
    if (rest.empty()) break;  // a single column has nothing to remove
    out.sigma_out_min = std::min(out.sigma_out_min, smallest_sigma(select_columns(a, rest)));
  }
  out.ok = out.sigma_in <= epsilon && out.sigma_out_min > epsilon;
  if (!out.ok) return out;

  // FullV keeps the kernel directions when the block is wide, so the last
  // column of V always minimizes |sub * x| over unit x.
  Vector local = svd.matrixV().col(sub.cols() - 1);
  Vector w = Vector::Zero(a.cols());
  for (int j = 0; j < i.size(); ++j) w(i[j] - 1) = local(j);
  normalize_witness(w, tol);

  NearCircuit nc;
  nc.indices = i;
  nc.witness = std::move(w);
  nc.epsilon = epsilon;
  nc.sigma_in = out.sigma_in;
  nc.sigma_out_min = out.sigma_out_min;
  out.near = std::move(nc);
  return out;
}

double witness_concentration_bound(double epsilon, double sigma2) {
  if (!(epsilon >= 0.0)) throw InputError("epsilon must be nonnegative");
  if (!(sigma2 > epsilon)) throw InputError("bound needs sigma2 > epsilon");
  return epsilon * epsilon / (sigma2 * sigma2 - epsilon * epsilon);
}

double truncation_quality_bound(double sigma1, double sigma_max, double delta) {
  if (!(sigma1 >= 0.0) || !(sigma_max >= 0.0))
    throw InputError("singular values must be nonnegative");
  if (!(delta >= 0.0 && delta <= 1.0)) throw InputError("delta must lie in [0, 1]");
  return std::sqrt(sigma1 * sigma1 * (1.0 - delta * delta) + sigma_max * sigma_max * delta * delta);
}

NearSearchOutcome near_search(const Matrix& a, const NearSearchConfig& cfg) {
  require_finite(a, "near_search");
  if (a.rows() > a.cols())
    throw InputError("near search expects at most as many rows as columns");
  if (cfg.max_size < 1) throw InputError("target size must be at least 1");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw InputError("delta must lie in (0, 1)");
  const Tolerances tol = resolve_tolerances(a, cfg.tolerances ? &*cfg.tolerances : nullptr);
  const SpectralSplit split = spectral_split(a, cfg.epsilon, tol);
  const int n_cols = static_cast<int>(a.cols());
  const int m = split.m;
  if (m + 1 > n_cols)
    throw InputError("no admissible subsets: all " + std::to_string(m) +
                     " singular values exceed epsilon");

  const int n = cfg.max_size;
  const double eps = cfg.epsilon;

  auto trial = [&, m, n, eps, n_cols](long index) {
    TrialResult<NearTrialPayload> res;
    RngEngine rng = stream_rng(cfg.seed, static_cast<std::uint64_t>(index));
    IndexSet k = random_subset(n_cols, m + 1, rng);
    int restarts = 0;
    auto restart = [&] {
      // Interlacing puts at least one singular value of every (m+1)-column
      // block at or below sigma_{m+1} <= epsilon; repeated failures mean
      // the tolerance is fighting the data.
      if (++restarts > 64) throw InternalError("near trial kept losing its small singular value");
      k = random_subset(n_cols, m + 1, rng);
    };
    for (;;) {
      const Matrix w = select_columns(a, k);
      Eigen::BDCSVD<Matrix> svd(w, Eigen::ComputeFullV);
      ++res.evals;
      const auto& sv = svd.singularValues();
      int l = k.size() - static_cast<int>(sv.size());  // hard zeros from padding
      for (int j = 0; j < sv.size(); ++j)
        if (sv(j) <= eps) ++l;
      if (l == 0) {
        restart();
        continue;
      }
      if (l > 1) {
        const int keep = k.size() - (l - 1);
        if (keep < 1) {
          restart();
          continue;
        }
        k = random_subset_of(k, keep, rng);
        continue;
      }
      // One small direction left: its right singular vector picks the
      // n heaviest positions as the candidate.
      Vector v = svd.matrixV().col(k.size() - 1);
      std::vector<int> order(static_cast<std::size_t>(k.size()));
      for (int j = 0; j < k.size(); ++j) order[static_cast<std::size_t>(j)] = j;
      std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        const double ax = std::abs(v(x));
        const double ay = std::abs(v(y));
        if (ax != ay) return ax > ay;
        return x < y;
      });
      const int take = std::min<int>(n, k.size());
      std::vector<int> cand(static_cast<std::size_t>(take));
      for (int j = 0; j < take; ++j) cand[static_cast<std::size_t>(j)] = k[order[static_cast<std::size_t>(j)]];
      const IndexSet candidate(cand);
      res.subset_size = k.size();

      ++res.evals;
      if (smallest_sigma(select_columns(a, candidate)) > eps) return res;  // plain miss

      res.evals += candidate.size() + 1;
      NearCircuitCheck chk = verify_near_circuit(a, candidate, eps, tol);
      res.candidate = NearTrialPayload{chk.ok ? *chk.near : NearCircuit{}};
      res.verified = chk.ok;
      return res;
    }
  };

  DriverParams params;
  params.cols = n_cols;
  params.target_size = n;
  params.stop_threshold = cfg.delta;
  params.seed = cfg.seed;
  params.max_trials = cfg.max_trials;
  params.threads = cfg.threads;
  DriverOutcome<NearTrialPayload> drv = run_trial_loop<NearTrialPayload>(params, trial);

  NearSearchOutcome out;
  out.status = drv.status;
  if (drv.payload) out.near = drv.payload->near;
  out.state = drv.state;
  out.rejected_candidates = drv.rejected_candidates;
  out.truncated = drv.truncated;
  out.split_m = m;
  return out;
}

BisectionResult minimal_epsilon_bisection(const Matrix& a, int max_size, double delta,
                                          std::uint64_t seed, double eps_lo, double eps_hi,
                                          int iterations, int threads) {
  require_finite(a, "minimal_epsilon_bisection");
  if (!(eps_lo > 0.0 && eps_lo < eps_hi)) throw InputError("need 0 < eps_lo < eps_hi");
  if (iterations < 1) throw InputError("need at least one bisection step");

  const Tolerances tol = resolve_tolerances(a, nullptr);
  const std::vector<double> sigmas = column_singular_values(a);
  const int n_cols = static_cast<int>(a.cols());

  BisectionResult out;
  out.epsilon_star = eps_hi;
  double lo = eps_lo;
  double hi = eps_hi;
  for (int iter = 0; iter < iterations; ++iter) {
    double mid = std::sqrt(lo * hi);
    int split_m = -1;
    try {
      split_m = spectral_split(a, mid, tol).m;
    } catch (const InputError&) {
      // Inside a cluster: move to the geometric center of the nearest
      // spectrum gap that still intersects (lo, hi).
      double best = -1.0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < sigmas.size(); ++j) {
        const double upper = sigmas[j];
        const double lower = (j + 1 < sigmas.size()) ? sigmas[j + 1] : 0.0;
        if (upper <= lower) continue;
        const double g = (lower > 0.0) ? std::sqrt(lower * upper) : upper / 2.0;
        if (g <= lo || g >= hi) continue;
        const double dist = std::abs(std::log(g) - std::log(mid));
        if (dist < best_dist) {
          best_dist = dist;
          best = g;
        }
      }
      if (best > 0.0) {
        mid = best;
        try {
          split_m = spectral_split(a, mid, tol).m;
        } catch (const InputError&) {
          split_m = -1;
        }
      }
    }
    const bool feasible = split_m >= 0 && split_m + 1 <= n_cols;
    if (!feasible) {
      lo = mid;  // nothing findable at or below mid
      if (hi / lo < 1.0 + 1e-12) break;
      continue;
    }

    NearSearchConfig cfg;
    cfg.max_size = max_size;
    cfg.epsilon = mid;
    cfg.delta = delta;
    cfg.seed = splitmix64(seed ^ (0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(iter)));
    cfg.threads = threads;
    NearSearchOutcome res = near_search(a, cfg);
    out.total_trials += res.state.trials;
    if (res.status == SearchStatus::Found) {
      hi = mid;
      if (!out.near || mid < out.epsilon_star) {
        out.epsilon_star = mid;
        out.near = res.near;
      }
    } else {
      lo = mid;
    }
    if (hi / lo < 1.0 + 1e-12) break;
  }
  return out;
}

}  // namespace circuitry
