#include "circuitry/search.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace circuitry {
namespace {

constexpr int kMaxRestartsPerTrial = 64;

// Kernel vector of a k x (k+1) block via unpivoted QR of the transpose.
// Only trusted when the R diagonal shows the rank is exactly k; anything
// marginal falls back to the SVD path so rank decisions stay consistent.
std::optional<Vector> rank1_kernel_fast(const Matrix& w) {
  const int k = static_cast<int>(w.rows());
  if (w.cols() != k + 1 || k == 0) return std::nullopt;
  Eigen::HouseholderQR<Matrix> qr(w.transpose());
  const auto diag = qr.matrixQR().diagonal().head(k);
  const double dmax = diag.cwiseAbs().maxCoeff();
  const double dmin = diag.cwiseAbs().minCoeff();
  if (!(dmax > 0.0) || dmin <= 1e-7 * dmax) return std::nullopt;
  Vector z = qr.householderQ() * Vector::Unit(k + 1, k);
  const double residual = (w * z).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-10 * std::max(1.0, w.cwiseAbs().maxCoeff()))) return std::nullopt;
  return z;
}

// Kernel vectors of sampled blocks carry noise up to eps * kappa, far above
// the exact-arithmetic support cutoff once the block is badly conditioned.
// Support is read with this floor; subset verification keeps the strict one.
Tolerances support_read_tol(Tolerances t) {
  t.support_tol_factor = std::max(t.support_tol_factor, 1e-8);
  return t;
}

struct KernelInfo {
  Matrix basis;
  int nullity = 0;
};

KernelInfo kernel_of(const Matrix& w, const Tolerances& tol) {
  if (w.cols() == w.rows() + 1) {
    if (auto z = rank1_kernel_fast(w)) {
      KernelInfo ki;
      ki.nullity = 1;
      ki.basis = std::move(*z);
      return ki;
    }
  }
  NullBasis nb = null_space_basis(w, tol);
  return {std::move(nb.basis), nb.nullity};
}

Circuit make_circuit_from_positions(const Factorization& f, const IndexSet& positions,
                                    const Vector& local_witness, const IndexSet& k,
                                    const Tolerances& tol) {
  // local_witness lives on the sampled set k (permuted positions); spread it
  // over the original coordinates.
  Vector full = Vector::Zero(f.cols());
  for (int i = 0; i < k.size(); ++i) {
    const int orig = f.original_column(k[i]);
    full[orig - 1] = local_witness[i];
  }
  normalize_witness(full, tol);
  return Circuit{map_through_perm(positions, f.perm), std::move(full)};
}

TrialResult<Circuit> trial_q(const Factorization& f, int n, const Tolerances& tol,
                             RngEngine rng) {
  const int cols = f.cols();
  const int m = f.rank;
  IndexSet k = random_subset(cols, m + 1, rng);
  int restarts = 0;
  long evals = 0;
  for (;;) {
    KernelInfo ki = kernel_of(select_columns(f.q, k), tol);
    ++evals;
    if (ki.nullity == 0) {
      if (++restarts > kMaxRestartsPerTrial)
        throw InternalError("search_q: kernel vanished repeatedly; tolerances look inconsistent");
      k = random_subset(cols, m + 1, rng);
      continue;
    }
    if (ki.nullity == 1) {
      const Vector w = ki.basis.col(0);
      const IndexSet positions_in_k = support(w, support_read_tol(tol));
      std::vector<int> pos;
      pos.reserve(static_cast<std::size_t>(positions_in_k.size()));
      for (int p : positions_in_k) pos.push_back(k[p - 1]);
      const IndexSet j_perm(std::move(pos));
      TrialResult<Circuit> res;
      res.subset_size = k.size();
      res.evals = evals;
      if (j_perm.size() <= n) {
        Vector masked = Vector::Zero(k.size());
        for (int p : positions_in_k) masked[p - 1] = w[p - 1];
        res.candidate = make_circuit_from_positions(f, j_perm, masked, k, tol);
        res.verified = is_circuit(f.q, j_perm, tol).is_circuit;
      }
      return res;
    }
    k = random_subset_of(k, k.size() - ki.nullity + 1, rng);
  }
}

TrialResult<Circuit> trial_qstar(const Factorization& f, int n, const Tolerances& tol,
                                 RngEngine rng) {
  const Matrix& qs = *f.qstar;
  const int cols = f.cols();
  const int m = f.rank;
  const int lead = cols - m;
  IndexSet k = random_subset(cols, m + 1, rng);
  int restarts = 0;
  long evals = 0;
  for (;;) {
    std::vector<int> k1, k2, k2c_rows;
    for (int idx : k) {
      if (idx <= lead)
        k1.push_back(idx);
      else
        k2.push_back(idx - lead);
    }
    {
      std::size_t next = 0;
      for (int row = 1; row <= m; ++row) {
        if (next < k2.size() && k2[next] == row)
          ++next;
        else
          k2c_rows.push_back(row);
      }
    }
    Matrix block(static_cast<int>(k2c_rows.size()), static_cast<int>(k1.size()));
    for (std::size_t r = 0; r < k2c_rows.size(); ++r)
      for (std::size_t c = 0; c < k1.size(); ++c)
        block(static_cast<int>(r), static_cast<int>(c)) = qs(k2c_rows[r] - 1, k1[c] - 1);

    KernelInfo ki = kernel_of(block, tol);
    ++evals;
    if (ki.nullity == 0 || k1.empty()) {
      if (++restarts > kMaxRestartsPerTrial)
        throw InternalError("search_qstar: kernel vanished repeatedly");
      k = random_subset(cols, m + 1, rng);
      continue;
    }
    if (ki.nullity == 1) {
      const Vector w = ki.basis.col(0);
      TrialResult<Circuit> res;
      res.subset_size = k.size();
      res.evals = evals;
      const IndexSet j_orig = circuit_from_qstar_witness(k, w, qs, f.perm, support_read_tol(tol));
      if (j_orig.size() <= n) {
        // Full kernel vector of Q(:,K): w on the K1 part, -Q*(K2,K1)w on K2.
        Vector local(k.size());
        std::size_t wi = 0;
        Vector y;
        if (!k2.empty()) {
          Matrix tail(static_cast<int>(k2.size()), static_cast<int>(k1.size()));
          for (std::size_t r = 0; r < k2.size(); ++r)
            for (std::size_t c = 0; c < k1.size(); ++c)
              tail(static_cast<int>(r), static_cast<int>(c)) = qs(k2[r] - 1, k1[c] - 1);
          y = -(tail * w);
        }
        std::size_t yi = 0;
        for (int i = 0; i < k.size(); ++i) {
          if (k[i] <= lead)
            local[i] = w[static_cast<int>(wi++)];
          else
            local[i] = y[static_cast<int>(yi++)];
        }
        const IndexSet j_perm = map_to_positions(j_orig, f.inverse_perm());
        TrialResult<Circuit> out;
        out.subset_size = res.subset_size;
        out.evals = res.evals;
        Vector masked = local;
        for (int i = 0; i < k.size(); ++i)
          if (!j_perm.contains(k[i])) masked[i] = 0.0;
        out.candidate = make_circuit_from_positions(f, j_perm, masked, k, tol);
        out.verified = is_circuit(f.q, j_perm, tol).is_circuit;
        return out;
      }
      return res;
    }
    k = random_subset_of(k, k.size() - ki.nullity + 1, rng);
  }
}

void validate_search_inputs(const Factorization& f, const SearchConfig& cfg) {
  if (cfg.max_size < 1) throw InputError("search: max_size must be at least 1");
  if (f.rank >= f.cols())
    throw InputError("search: matrix has full column rank, no dependent sets exist");
  if (!(cfg.epsilon > 0.0) || !(cfg.epsilon < 1.0))
    throw InputError("search: epsilon must lie in (0, 1)");
}

SearchOutcome wrap(DriverOutcome<Circuit>&& d) {
  SearchOutcome out;
  out.status = d.status;
  out.circuit = std::move(d.payload);
  out.state = d.state;
  out.rejected_candidates = d.rejected_candidates;
  out.truncated = d.truncated;
  return out;
}

}  // namespace

TrialResult<Circuit> single_trial_q(const Factorization& f, int max_size, const Tolerances& tol,
                                    RngEngine& rng) {
  return trial_q(f, max_size, tol, rng);
}

SearchOutcome search_q(const Factorization& f, const SearchConfig& cfg) {
  validate_search_inputs(f, cfg);
  const Tolerances tol =
      cfg.tolerances ? *cfg.tolerances : Tolerances::for_shape(f.rank, f.cols());
  tol.validate();
  DriverParams params{f.cols(), cfg.max_size, cfg.epsilon, cfg.seed, cfg.max_trials, cfg.threads};
  return wrap(run_trial_loop<Circuit>(params, [&](long index) {
    return trial_q(f, cfg.max_size, tol, stream_rng(cfg.seed, static_cast<std::uint64_t>(index)));
  }));
}

SearchOutcome search_qstar(const Factorization& f, const SearchConfig& cfg) {
  validate_search_inputs(f, cfg);
  if (!f.qstar) throw InternalError("search_qstar: call ensure_qstar first");
  const Tolerances tol =
      cfg.tolerances ? *cfg.tolerances : Tolerances::for_shape(f.rank, f.cols());
  tol.validate();
  DriverParams params{f.cols(), cfg.max_size, cfg.epsilon, cfg.seed, cfg.max_trials, cfg.threads};
  return wrap(run_trial_loop<Circuit>(params, [&](long index) {
    return trial_qstar(f, cfg.max_size, tol,
                       stream_rng(cfg.seed, static_cast<std::uint64_t>(index)));
  }));
}

double detection_probability(int n_cols, int rank, int circuit_size) {
  if (circuit_size < 1 || rank < 0 || n_cols < 1 || rank + 1 > n_cols)
    throw InputError("detection_probability: need 1 <= n and m+1 <= N");
  if (circuit_size > rank + 1) return 0.0;
  return subset_containment_probability(n_cols, rank + 1, circuit_size);
}

double multi_circuit_probability(double rho, const std::vector<int>& sizes) {
  if (!(rho > 0.0) || !(rho < 1.0))
    throw InputError("multi_circuit_probability: rho must lie in (0, 1)");
  double escape = 1.0;
  for (int c : sizes) {
    if (c < 1) throw InputError("multi_circuit_probability: circuit sizes must be positive");
    escape *= 1.0 - std::pow(rho, c);
  }
  return 1.0 - escape;
}

long required_trials(double epsilon, double rho, int circuit_size) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw InputError("required_trials: epsilon must lie in (0, 1)");
  if (!(rho > 0.0) || !(rho < 1.0))
    throw InputError("required_trials: rho must lie in (0, 1)");
  if (circuit_size < 1) throw InputError("required_trials: circuit size must be positive");
  return static_cast<long>(std::ceil(-std::log(epsilon) / std::pow(rho, circuit_size)));
}

double expected_trials(double rho, int circuit_size) {
  return std::pow(rho, -circuit_size);
}

EnumerationResult enumerate_circuits(const Matrix& a, const SearchConfig& cfg) {
  require_finite(a, "enumerate_circuits");
  const Tolerances tol = resolve_tolerances(a, cfg.tolerances ? &*cfg.tolerances : nullptr);
  EnumerationResult result;
  result.state.seed = cfg.seed;

  std::vector<int> active;
  for (int j = 1; j <= a.cols(); ++j) active.push_back(j);

  for (std::uint64_t pass = 0;; ++pass) {
    if (active.empty()) break;
    Matrix work = select_columns(a, IndexSet(active));
    Factorization f = lq_factor(work, tol);
    if (f.rank >= static_cast<int>(work.cols())) break;  // independent remainder

    SearchConfig pass_cfg = cfg;
    pass_cfg.seed = splitmix64(cfg.seed ^ (0x5151bead00ULL + pass));
    pass_cfg.tolerances = tol;
    if (cfg.variant == SearchVariant::OnQstar) ensure_qstar(f);
    SearchOutcome out = cfg.variant == SearchVariant::OnQstar ? search_qstar(f, pass_cfg)
                                                              : search_q(f, pass_cfg);
    result.state.trials += out.state.trials;
    result.state.nullspace_evals += out.state.nullspace_evals;
    result.state.p = out.state.p;
    result.truncated = result.truncated || out.truncated;
    if (out.status != SearchStatus::Found) break;

    // Map from working columns back to original numbering.
    std::vector<int> orig;
    for (int local : out.circuit->indices) orig.push_back(active[static_cast<std::size_t>(local - 1)]);
    IndexSet j_orig(std::move(orig));
    auto check = is_circuit(a, j_orig, tol);
    if (check.is_circuit) {
      const bool duplicate =
          std::any_of(result.circuits.begin(), result.circuits.end(),
                      [&](const Circuit& c) { return c.indices == j_orig; });
      if (!duplicate) result.circuits.push_back({j_orig, std::move(*check.witness)});
    }
    const int drop = j_orig[0];
    active.erase(std::remove(active.begin(), active.end(), drop), active.end());
  }
  std::sort(result.circuits.begin(), result.circuits.end(),
            [](const Circuit& x, const Circuit& y) { return x.indices < y.indices; });
  return result;
}

}  // namespace circuitry
