#pragma once

// Quantities and inequalities tracked along the flow: L^p norms, spacetime
// integrals of |H|, pinching, the integral inequalities on closed
// submanifolds, the maximum-principle ratio and the blow-up time estimate.

#include "mcflow/analytic.hpp"
#include "mcflow/geometry.hpp"
#include "mcflow/trace.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mcflow {

/// Scalar curvature fields with their measure. A mesh yields one entry per
/// vertex; an analytic homogeneous scene yields a single entry weighted by
/// its total volume.
struct CurvatureField {
  int n = 0;
  bool analytic = false;
  std::vector<double> a2, h2, aring2, weights;
  std::vector<double> grad_a2, grad_h2, grad_aring2;  // empty when not computed
  std::optional<double> diameter;
  std::uint64_t digest = 0;

  double volume() const;
};

CurvatureField curvature_field(const DiscreteImmersion& imm, const FundamentalForms& forms);
/// Also fills the gradient fields and the graph diameter.
CurvatureField curvature_field(const DiscreteImmersion& imm, const FundamentalForms& forms,
                               const DerivativeData& deriv);
/// Closed forms; gradients vanish and the diameter is the intrinsic one.
CurvatureField curvature_field(const analytic::SphereScene& scene, double t);
CurvatureField curvature_field(const analytic::SphereProductScene& scene, double t);

/// (sum_i w_i |f_i|^p)^{1/p}.
double lp_norm(const std::vector<double>& field, double p, const std::vector<double>& weights);

/// int |H|^alpha dmu.
double h_power_integral(const CurvatureField& field, double alpha);

struct SpacetimeAccumulator {
  double alpha = 0.0;
  double value = 0.0;
  double last_integrand = 0.0;

  double norm() const;
};

/// Accumulator seeded with the integrand of the initial state.
SpacetimeAccumulator start_spacetime(double alpha, const CurvatureField& initial);
/// Trapezoid update over an accepted step of length dt ending at `field`.
SpacetimeAccumulator update_spacetime(SpacetimeAccumulator acc, const CurvatureField& field, double dt);

enum class Verdict { holds, violated, informational };
const char* to_string(Verdict v);

struct MonitorReport {
  std::string name;
  std::uint64_t inputs_digest = 0;
  std::vector<std::pair<std::string, double>> values;
  Verdict verdict = Verdict::informational;
  std::string anchor;

  double value(const std::string& key) const;
};

nlohmann::json to_json(const MonitorReport& report);

/// max(|A|^2 - a|H|^2 - b) <= 0.
MonitorReport pinching_linear(const CurvatureField& field, double a, double b);

/// |A|^2 <= c_n |H|^2 with c_3 = 4/9 and c_n = 1/(n-1) for n >= 4; analytic
/// fields also accept n = 2 with c_2 = 2/3. Mesh fields with n <= 2 throw.
MonitorReport pinching_andrews_baker(const CurvatureField& field);
double andrews_baker_constant(int n);

inline constexpr double kGradientNoiseFloor = 1e-2;

/// chen, hmax, topping_ratio and (when gradients are present) gradient_A, gradient_H.
/// The gradient floor applies at the scale where Vol = |S^n| and is rescaled otherwise.
std::vector<MonitorReport> inequality_suite(const CurvatureField& field,
                                            double gradient_floor = kGradientNoiseFloor);

/// Largest shortest-path distance along mesh edges.
double graph_diameter(const DiscreteImmersion& imm);

/// max |H|^2 over records in [T0/2, T0] against (int_0^T0 int |H|^{n+2})^{2/(n+2)}.
MonitorReport moser_ratio(const FlowTrace& trace, double T0);

/// Largest per-step |dVol/dt + int |H|^2| / int |H|^2 along the trace.
MonitorReport volume_decay(const FlowTrace& trace, double tolerance = 0.05);

struct BlowupEstimate {
  double T_hat = 0.0;         // median over the last 10 records
  double T_hat_latest = 0.0;  // latest record
  std::string method;
};

/// T = t + n / (2 max|H|^2), exact on shrinking spheres.
BlowupEstimate blowup_estimate(const FlowTrace& trace);

}  // namespace mcflow
