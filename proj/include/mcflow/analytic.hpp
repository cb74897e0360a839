#pragma once

// Exact shrinking solutions of mean curvature flow in R^{n+d}: round spheres
// and products of round spheres, plus the Sobolev-type constants and
// inequality evaluators on zonal test functions.

#include "mcflow/geometry.hpp"

#include <optional>
#include <vector>

namespace mcflow::analytic {

/// Area of the unit n-sphere in R^{n+1} (A_1 = 2 pi, A_2 = 4 pi, A_3 = 2 pi^2).
double unit_sphere_area(int n);
/// Volume of the unit n-ball (omega_2 = pi, omega_3 = 4 pi / 3).
double unit_ball_volume(int n);

/// Round S^n(r0) centered at `center` inside span(subspace) of R^{n+d}.
/// `subspace` is (n+d) x (n+1) with orthonormal columns; empty means the first
/// n+1 coordinate axes, empty `center` means the origin.
struct SphereScene {
  int n = 2;
  int d = 1;
  double r0 = 1.0;
  Vec center;
  Mat subspace;

  double singular_time() const { return r0 * r0 / (2.0 * n); }
};

struct SphereState {
  double r = 0.0;
  double h2 = 0.0;
  double a2 = 0.0;
  double aring2 = 0.0;
  double vol = 0.0;
  double T = 0.0;
};

/// r(t)^2 = r0^2 - 2 n t. Throws PastSingularity for t >= T.
SphereState sphere_state(const SphereScene& scene, double t);

/// S^p(a) x S^q(b) in R^{p+q+2+extra_codim}, each factor in its own coordinate block.
struct SphereProductScene {
  int p = 1;
  int q = 1;
  double a0 = 1.0;
  double b0 = 1.0;
  int extra_codim = 0;

  int n() const { return p + q; }
  int ambient_dim() const { return p + q + 2 + extra_codim; }
  /// First time one of the factors collapses.
  double singular_time() const;
};

struct ProductState {
  double a = 0.0;
  double b = 0.0;
  double h2 = 0.0;
  double a2 = 0.0;
  double aring2 = 0.0;
  double vol = 0.0;
};

ProductState sphere_product_state(const SphereProductScene& scene, double t);

/// (int_0^{t_end} int_{M_t} |H|^alpha dmu dt) on the shrinking sphere.
/// alpha = n + 2 is the closed form (n^{n+1} A_n / 2) ln(T / (T - t_end));
/// other alpha use Gauss–Legendre in log r^2.
double spacetime_H_integral_closed_form(const SphereScene& scene, double alpha, double t_end);
/// The same integral raised to 1/alpha.
double spacetime_H_norm_closed_form(const SphereScene& scene, double alpha, double t_end);

/// C(n, alpha) = (pi/2) 2^{n-2} alpha^{-1} (1-alpha)^{-1/n} (n/(n-1)) omega_n^{-1/n}.
/// b_real = false (Euclidean or negatively curved ambient) drops the pi/2.
double hoffman_spruck_constant(int n, double alpha, bool b_real);

/// Polynomial in cos(theta) on S^n, theta the polar angle from the first subspace axis.
struct ZonalFunction {
  std::vector<double> coefficients;  // c_0 + c_1 x + ... , x = cos(theta); degree <= 16

  double value(double x) const;
  double derivative(double x) const;
  /// Minimum over 1e4 equally spaced theta samples.
  double sampled_minimum() const;
};

enum class SobolevForm {
  hoffman_spruck,      // (int h^{n/(n-1)})^{(n-1)/n} <= C(n,alpha) int (|grad h| + h|H|)
  gradient_bound,      // ||grad f||_2^2 >= (n-2)^2/(4(n-1)^2(1+s)) [||f||^2_{2n/(n-2)}/C(n)^2 - H0^2 (1+1/s) ||f||_2^2]
  curvature_weighted,  // (int v^{2n/(n-2)})^{(n-2)/n} <= C_n (int |grad v|^2 + int |H|^{n+2} int v^2)
};

struct SobolevOptions {
  std::optional<double> s;            // required for gradient_bound
  std::optional<double> alpha;        // hoffman_spruck free parameter; default n/(n+1)
  std::optional<double> constant;     // C_n for curvature_weighted; default calibrated
  int quadrature_order = 64;
};

/// `holds` is lhs <= rhs, except for gradient_bound where it is lhs >= rhs.
/// `constant` is the constant used on the right-hand side.
struct SobolevCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;
  bool holds = false;
};

/// Both sides on S^n(r(t)) by Gauss–Legendre quadrature in theta with weight
/// A_{n-1} r^n sin^{n-1}(theta); |grad v| = |dv/dtheta| / r.
SobolevCheck sobolev_check_zonal(const SphereScene& scene, double t, const ZonalFunction& v,
                                 SobolevForm form, const SobolevOptions& options = {});

/// Built-in zonal test battery used to calibrate C_n.
std::vector<ZonalFunction> zonal_battery();

/// Smallest C_n for which the curvature-weighted inequality holds on every
/// battery function over spheres of radius 0.5, 1 and 2. Informational: the
/// true constant is not known in closed form.
double calibrate_curvature_weighted_constant(int n, int quadrature_order = 64);

/// u = |A|^2 on a homogeneous scene: du/dt, Laplacian (0 on homogeneous scenes)
/// and the smallest c1 with du/dt <= Laplacian(u) + c1 u^2.
struct EvolutionThreshold {
  double u = 0.0;
  double du_dt = 0.0;
  double laplacian = 0.0;
  double threshold = 0.0;
};
EvolutionThreshold evolution_threshold(const SphereScene& scene, double t);
EvolutionThreshold evolution_threshold(const SphereProductScene& scene, double t);

/// Discretized sphere (icosphere / polygon) of the scene's radius at time t,
/// placed by the scene's subspace and center. Only n in {1, 2}.
DiscreteImmersion sphere_mesh(const SphereScene& scene, double t, int resolution);

}  // namespace mcflow::analytic
