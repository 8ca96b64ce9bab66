#include <chrono>
#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "circuitry/bench.hpp"
#include "circuitry/circuits.hpp"
#include "circuitry/factorize.hpp"
#include "circuitry/generators.hpp"
#include "circuitry/matrix_io.hpp"
#include "circuitry/near.hpp"
#include "circuitry/report.hpp"
#include "circuitry/search.hpp"
#include "circuitry/systematic.hpp"

namespace {

using namespace circuitry;

constexpr int kExitFound = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitNotFound = 3;

double elapsed_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::map<std::string, MatrixFormat> kFormats{
    {"auto", MatrixFormat::Auto},
    {"mm", MatrixFormat::MatrixMarket},
    {"csv", MatrixFormat::Csv},
};

struct CommonOpts {
  std::string input;
  MatrixFormat format = MatrixFormat::Auto;
  std::uint64_t seed = 0;
  std::string output = "-";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_input = true) {
  if (needs_input)
    cmd->add_option("-i,--input", o.input, "matrix file (Matrix Market or CSV)")->required();
  cmd->add_option("--format", o.format, "input format")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));
  cmd->add_option("--seed", o.seed, "random seed")->envname("CIRCUITRY_SEED");
  cmd->add_option("-o,--output", o.output, "report destination, '-' for stdout");
}

// Columns of `a` at positions not listed in `drop`, plus the original column
// number for each kept position.
std::pair<Matrix, std::vector<int>> drop_columns(const Matrix& a, const IndexSet& drop) {
  std::vector<int> keep;
  for (int j = 1; j <= a.cols(); ++j)
    if (!drop.contains(j)) keep.push_back(j);
  Matrix b(a.rows(), static_cast<long>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    b.col(static_cast<long>(j)) = a.col(keep[j] - 1);
  return {std::move(b), std::move(keep)};
}

ReportEntry map_back(const Circuit& c, const std::vector<int>& original_of, long n_orig) {
  std::vector<int> idx;
  for (int j : c.indices) idx.push_back(original_of[static_cast<std::size_t>(j - 1)]);
  ReportEntry e;
  e.indices = IndexSet(idx);
  e.witness = Vector::Zero(n_orig);
  for (int j = 1; j <= c.indices.size(); ++j) {
    const int local = c.indices[j - 1];
    e.witness(original_of[static_cast<std::size_t>(local - 1)] - 1) = c.witness(local - 1);
  }
  return e;
}

int run_find(const CommonOpts& o, int max_size, double confidence, const std::string& variant,
             long max_trials, bool all, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const Matrix a = load_matrix(o.input, o.format);
  const Tolerances tol = resolve_tolerances(a);

  Report rep;
  rep.mode = "find";
  rep.rows = a.rows();
  rep.cols = a.cols();
  rep.source = o.input;
  rep.seed = o.seed;
  rep.config = {{"max_size", max_size},
                {"confidence", confidence},
                {"variant", variant},
                {"all", all},
                {"threads", threads}};
  if (max_trials >= 0) rep.config["max_trials"] = max_trials;

  Factorization f = lq_factor(a, tol);
  if (f.rank == a.cols()) {
    rep.status = "not_found";
    rep.residual_p = 0.0;
    rep.extras["pruned_columns"] = std::vector<int>{};
    rep.extras["certified"] = "columns are linearly independent";
    rep.seconds = elapsed_since(t0);
    write_report(rep, o.output);
    return kExitNotFound;
  }
  ensure_qstar(f);
  const IndexSet pruned = prunable_columns(f, tol);
  rep.extras["pruned_columns"] = pruned.values();

  auto [b, original_of] = drop_columns(a, pruned);
  SearchConfig cfg;
  cfg.max_size = max_size;
  cfg.epsilon = 1.0 - confidence;
  cfg.seed = o.seed;
  cfg.variant = (variant == "qstar") ? SearchVariant::OnQstar : SearchVariant::OnQ;
  cfg.max_trials = max_trials;
  cfg.threads = threads;
  cfg.tolerances = tol;

  if (all) {
    EnumerationResult res = enumerate_circuits(b, cfg);
    for (const Circuit& c : res.circuits)
      rep.circuits.push_back(map_back(c, original_of, a.cols()));
    rep.status = res.circuits.empty() ? "not_found" : "found";
    rep.trials = res.state.trials;
    rep.nullspace_evals = res.state.nullspace_evals;
    rep.residual_p = res.state.p;
    if (res.truncated) rep.extras["truncated"] = true;
  } else {
    Factorization fb = lq_factor(b, tol);
    if (cfg.variant == SearchVariant::OnQstar) ensure_qstar(fb);
    SearchOutcome res = (cfg.variant == SearchVariant::OnQstar) ? search_qstar(fb, cfg)
                                                                : search_q(fb, cfg);
    if (res.circuit) rep.circuits.push_back(map_back(*res.circuit, original_of, a.cols()));
    rep.status = (res.status == SearchStatus::Found) ? "found" : "not_found";
    rep.trials = res.state.trials;
    rep.nullspace_evals = res.state.nullspace_evals;
    rep.residual_p = res.state.p;
    rep.extras["rejected_candidates"] = res.rejected_candidates;
    if (res.truncated) rep.extras["truncated"] = true;
  }
  rep.seconds = elapsed_since(t0);
  write_report(rep, o.output);
  return rep.status == "found" ? kExitFound : kExitNotFound;
}

int run_exclude(const CommonOpts& o, int max_size) {
  const auto t0 = std::chrono::steady_clock::now();
  const Matrix a = load_matrix(o.input, o.format);
  const Tolerances tol = resolve_tolerances(a);

  Report rep;
  rep.mode = "exclude";
  rep.rows = a.rows();
  rep.cols = a.cols();
  rep.source = o.input;
  rep.seed = o.seed;
  rep.config = {{"max_size", max_size}};

  RngEngine rng = stream_rng(o.seed, 0xc1);
  CircuitFindResult res = circuitfind(a, max_size, tol, rng);
  rep.nullspace_evals = res.nullspace_evals;
  rep.extras["subsets_examined"] = res.subsets_examined;
  rep.extras["max_depth"] = res.max_depth;
  if (res.found) {
    rep.status = "found";
    rep.circuits.push_back(entry_from(*res.circuit));
    rep.residual_p = 0.0;
  } else {
    rep.status = "not_found";
    rep.residual_p = 0.0;
    rep.extras["certified"] =
        "no dependent set of size at most " + std::to_string(max_size) + " exists";
  }
  rep.seconds = elapsed_since(t0);
  write_report(rep, o.output);
  return res.found ? kExitFound : kExitNotFound;
}

int run_near(const CommonOpts& o, int max_size, double epsilon, bool bisect, double eps_lo,
             double eps_hi, int iters, double delta, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const Matrix a = load_matrix(o.input, o.format);

  Report rep;
  rep.mode = "near";
  rep.rows = a.rows();
  rep.cols = a.cols();
  rep.source = o.input;
  rep.seed = o.seed;
  rep.config = {{"max_size", max_size}, {"delta", delta}, {"threads", threads}};

  if (bisect) {
    rep.config["eps_lo"] = eps_lo;
    rep.config["eps_hi"] = eps_hi;
    rep.config["iterations"] = iters;
    BisectionResult res = minimal_epsilon_bisection(a, max_size, delta, o.seed, eps_lo, eps_hi,
                                                    iters, threads);
    rep.trials = res.total_trials;
    rep.extras["epsilon_star"] = res.epsilon_star;
    if (res.near) {
      rep.status = "found";
      rep.circuits.push_back(entry_from(*res.near));
    }
  } else {
    rep.config["epsilon"] = epsilon;
    NearSearchConfig cfg;
    cfg.max_size = max_size;
    cfg.epsilon = epsilon;
    cfg.delta = delta;
    cfg.seed = o.seed;
    cfg.threads = threads;
    NearSearchOutcome res = near_search(a, cfg);
    rep.status = (res.status == SearchStatus::Found) ? "found" : "not_found";
    if (res.near) rep.circuits.push_back(entry_from(*res.near));
    rep.trials = res.state.trials;
    rep.nullspace_evals = res.state.nullspace_evals;
    rep.residual_p = res.state.p;
    rep.extras["rejected_candidates"] = res.rejected_candidates;
    rep.extras["split_m"] = res.split_m;
    if (res.truncated) rep.extras["truncated"] = true;
  }
  rep.seconds = elapsed_since(t0);
  write_report(rep, o.output);
  return rep.status == "found" ? kExitFound : kExitNotFound;
}

int run_bench(const CommonOpts& o, int table, std::vector<int> col_counts, int reps,
              bool sparse_row) {
  const auto t0 = std::chrono::steady_clock::now();
  Report rep;
  rep.mode = "bench";
  rep.source = "generated";
  rep.seed = o.seed;
  rep.status = "found";
  rep.config = {{"table", table}, {"reps", reps}};

  nlohmann::json rows = nlohmann::json::array();
  if (table == 1) {
    if (col_counts.empty()) col_counts = {100, 200};
    rep.config["col_counts"] = col_counts;
    for (const Table1Row& r : run_table1(col_counts, reps, o.seed)) {
      rows.push_back({{"rho", r.rho},
                      {"sizes", r.sizes},
                      {"n_cols", r.n_cols},
                      {"reps", r.reps},
                      {"theory", r.theory},
                      {"frequency", r.frequency}});
    }
  } else {
    const int n_cols = col_counts.empty() ? 100 : col_counts.front();
    rep.config["col_counts"] = std::vector<int>{n_cols};
    rep.config["sparse_row"] = sparse_row;
    for (const Table2Row& r : run_table2(n_cols, reps, o.seed, sparse_row)) {
      rows.push_back({{"rho", r.rho},
                      {"n_cols", r.n_cols},
                      {"circuit_size", r.circuit_size},
                      {"attempts", r.attempts},
                      {"expected_trials", r.expected_trials},
                      {"mean_search_trials", r.mean_search_trials},
                      {"mean_search_evals", r.mean_search_evals},
                      {"mean_systematic_evals", r.mean_systematic_evals},
                      {"search_failures", r.search_failures},
                      {"systematic_failures", r.systematic_failures}});
    }
  }
  rep.extras["table_rows"] = rows;
  rep.seconds = elapsed_since(t0);
  write_report(rep, o.output);
  return kExitFound;
}

int run_gen(const CommonOpts& o, int n_cols, double rho, std::vector<int> sizes,
            double near_sigma, bool orthonormal) {
  if (o.output.empty() || o.output == "-")
    throw InputError("gen needs an --output file for the matrix");
  if (sizes.empty()) sizes = {5};

  Report manifest;
  manifest.mode = "gen";
  manifest.source = o.output;
  manifest.seed = o.seed;
  manifest.status = "found";
  manifest.config = {{"n_cols", n_cols},
                     {"rho", rho},
                     {"sizes", sizes},
                     {"orthonormal", orthonormal}};

  Matrix out_matrix;
  if (near_sigma > 0.0) {
    manifest.config["near_sigma"] = near_sigma;
    const int m_rows = static_cast<int>(std::lround(rho * n_cols));
    PlantedNearInstance inst = planted_near_instance(n_cols, m_rows, near_sigma, sizes.front(),
                                                     o.seed);
    out_matrix = inst.a;
    manifest.extras["plant"] = inst.plant.values();
    manifest.extras["achieved_sigma"] = inst.achieved_sigma;
  } else {
    PlantSpec spec;
    spec.n_cols = n_cols;
    spec.rho = rho;
    spec.sizes = sizes;
    spec.seed = o.seed;
    PlantedInstance inst = orthonormal ? orthonormal_row_instance(spec)
                                       : planted_circuit_matrix(spec);
    out_matrix = inst.a;
    nlohmann::json plants = nlohmann::json::array();
    for (const IndexSet& p : inst.plants) plants.push_back(p.values());
    manifest.extras["plants"] = plants;
  }
  manifest.rows = out_matrix.rows();
  manifest.cols = out_matrix.cols();

  if (o.output.ends_with(".mtx") || o.output.ends_with(".mm"))
    save_matrix_market(o.output, out_matrix);
  else
    save_csv(o.output, out_matrix);
  write_report(manifest, o.output + ".manifest.json");
  return kExitFound;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimal dependent column sets of a real matrix"};
  app.require_subcommand(1);

  CommonOpts find_o, excl_o, near_o, bench_o, gen_o;

  auto* find = app.add_subcommand("find", "random search for a small dependent column set");
  add_common(find, find_o);
  int find_max_size = 0;
  double confidence = 0.99;
  std::string variant = "q";
  long max_trials = -1;
  bool all = false;
  int find_threads = 1;
  find->add_option("-n,--max-size", find_max_size, "largest acceptable set size")->required();
  find->add_option("--confidence", confidence,
                   "stop once a qualifying set would have been seen with this probability")
      ->check(CLI::Range(0.5, 1.0 - 1e-12));
  find->add_option("--variant", variant, "q: sample rows of Q; qstar: compressed block")
      ->check(CLI::IsMember({"q", "qstar"}));
  find->add_option("--max-trials", max_trials, "hard trial cap, -1 for none");
  find->add_flag("--all", all, "enumerate sets instead of stopping at the first");
  find->add_option("--threads", find_threads, "worker threads")->check(CLI::PositiveNumber);

  auto* excl = app.add_subcommand("exclude", "prove no dependent set up to a size exists");
  add_common(excl, excl_o);
  int excl_max_size = 0;
  excl->add_option("-n,--max-size", excl_max_size, "size bound to certify")->required();

  auto* near = app.add_subcommand("near", "search for an almost dependent column set");
  add_common(near, near_o);
  int near_max_size = 0;
  double epsilon = 0.0;
  bool bisect = false;
  double eps_lo = 0.0, eps_hi = 0.0;
  int iters = 20;
  double delta = 0.05;
  int near_threads = 1;
  near->add_option("-n,--max-size", near_max_size, "largest acceptable set size")->required();
  auto* eps_opt = near->add_option("--epsilon", epsilon, "near-dependence threshold");
  auto* bisect_flag =
      near->add_flag("--bisect", bisect, "search for the smallest workable epsilon");
  auto* lo_opt = near->add_option("--eps-lo", eps_lo, "bisection lower bound");
  auto* hi_opt = near->add_option("--eps-hi", eps_hi, "bisection upper bound");
  near->add_option("--iters", iters, "bisection steps")->check(CLI::PositiveNumber);
  near->add_option("--delta", delta, "stop threshold for the escape probability");
  near->add_option("--threads", near_threads, "worker threads")->check(CLI::PositiveNumber);
  eps_opt->excludes(bisect_flag);
  bisect_flag->needs(lo_opt);
  bisect_flag->needs(hi_opt);

  auto* bench = app.add_subcommand("bench", "reproduce the detection and cost tables");
  add_common(bench, bench_o, false);
  int table = 1;
  std::vector<int> col_counts;
  int reps = 1000;
  bool sparse_row = false;
  bench->add_option("--table", table, "1: detection frequency, 2: cost to first find")
      ->check(CLI::IsMember({1, 2}));
  bench->add_option("--n-cols", col_counts, "column counts to run");
  bench->add_option("--reps", reps, "trials (table 1) or attempts (table 2) per cell")
      ->check(CLI::PositiveNumber);
  bench->add_flag("--sparse-row", sparse_row, "table 2: include the slow rho = 0.3 row");

  auto* gen = app.add_subcommand("gen", "write a random instance with known plants");
  add_common(gen, gen_o, false);
  int gen_n_cols = 100;
  double rho = 0.5;
  std::vector<int> sizes;
  double near_sigma = 0.0;
  bool orthonormal = false;
  gen->add_option("--n-cols", gen_n_cols, "columns")->check(CLI::PositiveNumber);
  gen->add_option("--rho", rho, "rank as a fraction of the column count");
  gen->add_option("--sizes", sizes, "planted set sizes");
  gen->add_option("--near-sigma", near_sigma,
                  "plant an almost dependent set at this singular value instead");
  gen->add_flag("--orthonormal", orthonormal, "orthonormalize the rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*find)
      return run_find(find_o, find_max_size, confidence, variant, max_trials, all, find_threads);
    if (*excl) return run_exclude(excl_o, excl_max_size);
    if (*near) {
      if (!bisect && !(epsilon > 0.0))
        throw InputError("near needs --epsilon or --bisect with bounds");
      return run_near(near_o, near_max_size, epsilon, bisect, eps_lo, eps_hi, iters, delta,
                      near_threads);
    }
    if (*bench) return run_bench(bench_o, table, col_counts, reps, sparse_row);
    if (*gen) return run_gen(gen_o, gen_n_cols, rho, sizes, near_sigma, orthonormal);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
