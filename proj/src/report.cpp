#include "circuitry/report.hpp"

#include <fstream>
#include <iostream>

namespace circuitry {
namespace {

nlohmann::json entry_to_json(const ReportEntry& e) {
  nlohmann::json j;
  j["indices"] = e.indices.values();
  j["size"] = e.indices.size();
  std::vector<double> w(e.witness.data(), e.witness.data() + e.witness.size());
  j["witness"] = w;
  if (e.epsilon) j["epsilon"] = *e.epsilon;
  if (e.sigma_in) j["sigma_in"] = *e.sigma_in;
  if (e.sigma_out_min) j["sigma_out_min"] = *e.sigma_out_min;
  return j;
}

ReportEntry entry_from_json(const nlohmann::json& j) {
  ReportEntry e;
  e.indices = IndexSet(j.at("indices").get<std::vector<int>>());
  const auto w = j.at("witness").get<std::vector<double>>();
  e.witness = Eigen::Map<const Vector>(w.data(), static_cast<long>(w.size()));
  if (j.contains("epsilon")) e.epsilon = j.at("epsilon").get<double>();
  if (j.contains("sigma_in")) e.sigma_in = j.at("sigma_in").get<double>();
  if (j.contains("sigma_out_min")) e.sigma_out_min = j.at("sigma_out_min").get<double>();
  return e;
}

}  // namespace

ReportEntry entry_from(const Circuit& c) {
  ReportEntry e;
  e.indices = c.indices;
  e.witness = c.witness;
  return e;
}

ReportEntry entry_from(const NearCircuit& c) {
  ReportEntry e;
  e.indices = c.indices;
  e.witness = c.witness;
  e.epsilon = c.epsilon;
  e.sigma_in = c.sigma_in;
  e.sigma_out_min = c.sigma_out_min;
  return e;
}

nlohmann::json to_json(const Report& r) {
  nlohmann::json j;
  j["version"] = 1;
  j["mode"] = r.mode;
  j["matrix"] = {{"rows", r.rows}, {"cols", r.cols}, {"source", r.source}};
  j["config"] = r.config;
  nlohmann::json circuits = nlohmann::json::array();
  for (const ReportEntry& e : r.circuits) circuits.push_back(entry_to_json(e));
  j["outcome"] = {{"status", r.status}, {"circuits", std::move(circuits)}};
  j["stats"] = {{"trials", r.trials},
                {"nullspace_evals", r.nullspace_evals},
                {"residual_p", r.residual_p},
                {"seconds", r.seconds}};
  j["seed"] = r.seed;
  for (const auto& [key, value] : r.extras.items()) j[key] = value;
  return j;
}

Report report_from_json(const nlohmann::json& j) {
  if (!j.contains("version") || j.at("version").get<int>() != 1)
    throw InputError("report: unknown or missing version");
  Report r;
  r.mode = j.at("mode").get<std::string>();
  r.rows = j.at("matrix").at("rows").get<long>();
  r.cols = j.at("matrix").at("cols").get<long>();
  r.source = j.at("matrix").at("source").get<std::string>();
  r.config = j.at("config");
  r.status = j.at("outcome").at("status").get<std::string>();
  for (const auto& e : j.at("outcome").at("circuits")) r.circuits.push_back(entry_from_json(e));
  r.trials = j.at("stats").at("trials").get<long>();
  r.nullspace_evals = j.at("stats").at("nullspace_evals").get<long>();
  r.residual_p = j.at("stats").at("residual_p").get<double>();
  r.seconds = j.at("stats").at("seconds").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  static const char* known[] = {"version", "mode",  "matrix", "config",
                                "outcome", "stats", "seed"};
  for (const auto& [key, value] : j.items()) {
    bool is_known = false;
    for (const char* k : known) is_known = is_known || key == k;
    if (!is_known) r.extras[key] = value;
  }
  return r;
}

void write_report(const Report& r, const std::string& path) {
  const std::string text = to_json(r).dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError(path + ": cannot open for writing");
  out << text;
  if (!out) throw InputError(path + ": write failed");
}

}  // namespace circuitry
