#pragma once

// Run orchestration and persistence: trace.ndjson, snapshots/, monitors.json,
// summary.json and MANIFEST in one output directory; plot columns and
// rescaled series derived from such a directory.

#include "mcflow/config.hpp"
#include "mcflow/monitors.hpp"
#include "mcflow/trace.hpp"

#include <json.hpp>

#include <exception>
#include <optional>
#include <string>
#include <vector>

namespace mcflow {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int violation = 2;
inline constexpr int numerical = 3;
inline constexpr int config = 4;
}  // namespace exit_code

/// Maps a caught exception to the CLI exit status.
int exit_code_for(const std::exception& e);

/// 2 if any non-informational report is violated, else 0.
int verdict_exit_code(const std::vector<MonitorReport>& reports);

nlohmann::ordered_json to_json(const TraceRecord& r);
TraceRecord trace_record_from_json(const nlohmann::json& j);

/// Reads trace.ndjson and MANIFEST of a run directory.
FlowTrace read_trace(const std::string& dir);

struct RunResult {
  int exit_code = exit_code::ok;
  FlowTrace trace;
  std::vector<MonitorReport> reports;
  nlohmann::json summary;
};

/// Executes the configured run and writes every artifact to `out_dir`.
/// Numerical failures are recorded in MANIFEST and re-thrown.
RunResult run(const RunConfig& config, const std::string& out_dir);

/// Writes <trace_dir>/plot/<names>.dat with columns t q1 q2 ...; returns the path.
/// Throws UnknownQuantity for unknown names or an empty list.
std::string emit_plotdata(const std::string& trace_dir, const std::vector<std::string>& quantities);

/// Rescales every snapshot with t < T_hat about `center` into <trace_dir>/rescaled
/// and writes roundness.json; defaults come from blowup_estimate and the snapshot centroids.
nlohmann::json rescale_run(const std::string& trace_dir, std::optional<double> T_hat, std::optional<Vec> center);

}  // namespace mcflow
