#pragma once

// Run configuration: scene, integrator, stop rule, monitor parameters and output cadence.

#include "mcflow/flow.hpp"
#include "mcflow/scene.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace mcflow {

struct MonitorConfig {
  std::optional<double> a;     // pinching_linear slope; default 1/(n-1) (1 for curves)
  double b = 0.0;
  std::vector<double> p{2.0};  // ||Å||_p
  std::vector<double> alpha;   // spacetime exponents; default {n + 2}

  bool operator==(const MonitorConfig&) const = default;
};

struct RunConfig {
  SceneSpec scene;
  SchemeConfig scheme;
  MonitorConfig monitors;
  std::string out;             // optional; the CLI --out wins
  int snapshot_every = 10;
  std::uint64_t seed = 0;

  /// Pinching slope after defaults.
  double pinching_a() const;
};

bool operator==(const SchemeConfig& a, const SchemeConfig& b);
bool operator==(const RunConfig& a, const RunConfig& b);

/// Throws ParseError (with 1-based line/column) or ValidationError.
RunConfig parse_config(const std::string& text);
/// Reads the file; IoError when it cannot be opened.
RunConfig load_config(const std::string& path);
/// Fills defaults and rejects unknown keys.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);

/// Parses JSON text, mapping syntax errors to ParseError with line/column.
nlohmann::json parse_json(const std::string& text);

}  // namespace mcflow
