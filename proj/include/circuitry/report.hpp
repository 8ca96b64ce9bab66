#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "circuitry/circuits.hpp"
#include "circuitry/matrix.hpp"
#include "circuitry/near.hpp"

namespace circuitry {

/// One reported column set. Exact sets carry indices and witness; near sets
/// additionally carry epsilon and the two boundary singular values.
struct ReportEntry {
  IndexSet indices;
  Vector witness;
  std::optional<double> epsilon;
  std::optional<double> sigma_in;
  std::optional<double> sigma_out_min;
};

ReportEntry entry_from(const Circuit& c);
ReportEntry entry_from(const NearCircuit& c);

/// Machine-readable run record. Serialized layout:
///   { "version": 1, "mode": ..., "matrix": {"rows", "cols", "source"},
///     "config": {...}, "outcome": {"status", "circuits": [...]},
///     "stats": {"trials", "nullspace_evals", "residual_p", "seconds"},
///     "seed": ... }
/// plus any keys from extras merged into the root (pruned_columns,
/// rejected_candidates, epsilon_star and the like).
struct Report {
  std::string mode;
  long rows = 0;
  long cols = 0;
  std::string source;
  nlohmann::json config = nlohmann::json::object();
  std::string status = "not_found";
  std::vector<ReportEntry> circuits;
  long trials = 0;
  long nullspace_evals = 0;
  double residual_p = 1.0;
  double seconds = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json extras = nlohmann::json::object();
};

nlohmann::json to_json(const Report& r);

/// Inverse of to_json; witnesses and seeds survive the round trip bit for bit.
Report report_from_json(const nlohmann::json& j);

/// Pretty-prints to the path, or to stdout when path is "-" or empty.
void write_report(const Report& r, const std::string& path);

}  // namespace circuitry
