#pragma once

// Time integration of dF/dt = H on discrete immersions with a curvature-tied
// step policy, and the driver that records a FlowTrace.

#include "mcflow/analytic.hpp"
#include "mcflow/geometry.hpp"
#include "mcflow/monitors.hpp"
#include "mcflow/trace.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mcflow {

enum class Scheme { explicit_euler, semi_implicit };
const char* to_string(Scheme s);
/// "explicit" or "semi_implicit"; throws InvalidArgument otherwise.
Scheme scheme_from_string(const std::string& s);

struct FlowState {
  DiscreteImmersion immersion;
  double t = 0.0;
  long step_index = 0;
  double last_dt = 0.0;
};

struct StopCondition {
  std::optional<double> t_end;
  std::optional<double> maxA2;
  std::optional<long> step_cap;
};

struct SchemeConfig {
  Scheme scheme = Scheme::semi_implicit;
  double cfl = 0.02;                // dt <= cfl / max|A|^2
  double dt_max = 1e-2;
  bool extrapolate = true;          // semi-implicit only: Richardson combination of one and two half steps
  int redistribute_every = 0;       // n = 1 only; 0 disables
  int ring = kDefaultRing;
  double explicit_mesh_factor = 0.1;  // explicit also needs dt <= factor * (min edge)^2
  long max_steps = 200000;
  StopCondition stop;
};

/// Throws InvalidArgument.
void validate(const SchemeConfig& cfg);

struct MonitorSet {
  std::vector<double> alphas;       // spacetime exponents; n + 2 is always added
  std::vector<double> p_norms{2.0}; // ||Å||_p
  bool lb_diagnostic = true;
};

/// Lumped mass and positive semidefinite stiffness of the discrete
/// Laplace–Beltrami operator: cotangent weights (n = 2), inverse lengths (n = 1).
struct LaplaceSystem {
  Eigen::SparseMatrix<double> stiffness;
  Vec mass;
};
LaplaceSystem assemble_laplace(const DiscreteImmersion& imm);

/// H = Delta F per vertex (rows), from the assembled operator.
Mat laplace_mean_curvature(const DiscreteImmersion& imm);

/// Median over vertices of |H_jet - H_lb| / |H_jet|.
double mean_curvature_discrepancy(const DiscreteImmersion& imm, const FundamentalForms& forms);

/// min(dt_max, cfl / max|A|^2), and for the explicit scheme also the mesh bound.
double admissible_dt(const SchemeConfig& cfg, const DiscreteImmersion& imm, double a2_max);

/// X <- X + dt H with jet-fit H. Throws StepRejected when an element degenerates.
FlowState step_explicit(const FlowState& state, double dt, int ring = kDefaultRing);
/// (M + dt K) X_new = M X_old per coordinate. Throws SolverFailure, StepRejected.
FlowState step_semi_implicit(const FlowState& state, double dt);

/// 2 X(two half steps) - X(one step): second order in dt.
FlowState step_semi_implicit_extrapolated(const FlowState& state, double dt);

/// Length of the periodic cubic spline through a closed polyline (chord-length knots).
double spline_length(const DiscreteImmersion& curve);
/// Resamples a closed curve to uniform spline arc length, starting at vertex 0.
DiscreteImmersion redistribute(const DiscreteImmersion& curve);

/// Called for the initial state and after every accepted step.
using StepObserver = std::function<void(const FlowState&, const FundamentalForms&, const TraceRecord&)>;

/// Integrates until a stop condition. Element collapse ends the run with
/// stop_reason "singularity". Throws MaxStepsExceeded after cfg.max_steps.
FlowTrace run_until(FlowState& state, const SchemeConfig& cfg, const MonitorSet& monitors,
                    const StepObserver& observer = {});

/// The same driver on closed-form scenes: records come from the exact state at
/// each step time, with spacetime integrals by the trapezoid rule.
FlowTrace run_analytic(const analytic::SphereScene& scene, const SchemeConfig& cfg, const MonitorSet& monitors);
FlowTrace run_analytic(const analytic::SphereProductScene& scene, const SchemeConfig& cfg,
                       const MonitorSet& monitors);

}  // namespace mcflow
