#pragma once

// Numerical checks of the structure equations and of the integral
// inequalities over a battery of closed test scenes.

#include "mcflow/monitors.hpp"
#include "mcflow/scene.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace mcflow {

enum class Suite { identities, inequalities };
Suite suite_from_string(const std::string& s);  // throws InvalidArgument

struct LabeledScene {
  std::string label;
  SceneSpec spec;
};

/// Unit sphere (subdiv 4), ellipsoid 1.2:1:0.9, Clifford torus in R^4 (64 x 64),
/// analytic S^2 x S^1 and analytic S^3 in R^5.
std::vector<LabeledScene> default_battery();

inline constexpr double kIdentityTol = 1e-12;
inline constexpr double kGaussOrderMin = 1.5;

/// tracefree_trace, decomposition, gauss (refinement order on meshes, exact
/// block check on analytic scenes) and codazzi (informational).
/// The Gauss order is asserted on icospheres only.
std::vector<MonitorReport> identity_checks(const SceneSpec& spec);

/// chen, hmax, topping_ratio and both gradient inequalities.
std::vector<MonitorReport> inequality_checks(const SceneSpec& spec);

struct SuiteResult {
  std::string scene;
  std::vector<MonitorReport> reports;
};

std::vector<SuiteResult> run_suite(Suite suite, const std::vector<LabeledScene>& scenes);
nlohmann::json to_json(const std::vector<SuiteResult>& results);

/// Inline JSON object or a path to a JSON file.
SceneSpec scene_from_argument(const std::string& arg);

/// Closed-form state of an analytic scene at time t. Throws ValidationError for mesh scenes.
nlohmann::json oracle_record(const SceneSpec& spec, double t);

}  // namespace mcflow
