#include "mcflow/analytic.hpp"

#include "mcflow/error.hpp"
#include "mcflow/meshes.hpp"
#include "mcflow/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace mcflow::analytic {

namespace {

constexpr int kTableSize = 17;

// omega_0 = 1, omega_1 = 2, omega_n = (2 pi / n) omega_{n-2}.
std::array<double, kTableSize + 1> ball_volume_table() {
  std::array<double, kTableSize + 1> t{};
  t[0] = 1.0;
  t[1] = 2.0;
  for (int n = 2; n <= kTableSize; ++n) t[static_cast<size_t>(n)] = 2.0 * std::numbers::pi / n * t[static_cast<size_t>(n - 2)];
  return t;
}

const std::array<double, kTableSize + 1>& ball_volumes() {
  static const auto table = ball_volume_table();
  return table;
}

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("time must be finite and >= 0");
}

}  // namespace

double unit_ball_volume(int n) {
  if (n < 0) throw InvalidArgument("dimension must be >= 0");
  if (n <= kTableSize) return ball_volumes()[static_cast<size_t>(n)];
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double unit_sphere_area(int n) {
  if (n < 0) throw InvalidArgument("dimension must be >= 0");
  // |S^n| = (n + 1) omega_{n+1}
  if (n + 1 <= kTableSize) return (n + 1) * ball_volumes()[static_cast<size_t>(n + 1)];
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
}

SphereState sphere_state(const SphereScene& scene, double t) {
  if (scene.n < 1 || scene.d < 1) throw InvalidArgument("sphere scene needs n >= 1 and d >= 1");
  if (!(scene.r0 > 0.0)) throw InvalidArgument("r0 must be > 0");
  require_time(t);
  const int n = scene.n;
  SphereState s;
  s.T = scene.singular_time();
  if (t >= s.T) throw PastSingularity("t = " + std::to_string(t) + " >= T = " + std::to_string(s.T));
  const double r2 = scene.r0 * scene.r0 - 2.0 * n * t;
  s.r = std::sqrt(r2);
  s.h2 = n * n / r2;
  s.a2 = n / r2;
  s.aring2 = 0.0;
  s.vol = unit_sphere_area(n) * std::pow(s.r, n);
  return s;
}

double SphereProductScene::singular_time() const {
  return std::min(a0 * a0 / (2.0 * p), b0 * b0 / (2.0 * q));
}

ProductState sphere_product_state(const SphereProductScene& scene, double t) {
  if (scene.p < 1 || scene.q < 1) throw InvalidArgument("sphere product needs p, q >= 1");
  if (!(scene.a0 > 0.0) || !(scene.b0 > 0.0)) throw InvalidArgument("radii must be > 0");
  if (scene.extra_codim < 0) throw InvalidArgument("extra_codim must be >= 0");
  require_time(t);
  if (t >= scene.singular_time()) {
    throw PastSingularity("t = " + std::to_string(t) + " is past the first factor collapse");
  }
  const int p = scene.p;
  const int q = scene.q;
  const double a2 = scene.a0 * scene.a0 - 2.0 * p * t;
  const double b2 = scene.b0 * scene.b0 - 2.0 * q * t;
  ProductState s;
  s.a = std::sqrt(a2);
  s.b = std::sqrt(b2);
  s.h2 = p * p / a2 + q * q / b2;
  s.a2 = p / a2 + q / b2;
  s.aring2 = s.a2 - s.h2 / (p + q);
  s.vol = unit_sphere_area(p) * std::pow(s.a, p) * unit_sphere_area(q) * std::pow(s.b, q);
  return s;
}

double spacetime_H_integral_closed_form(const SphereScene& scene, double alpha, double t_end) {
  if (!(alpha >= 1.0)) throw InvalidArgument("alpha must be >= 1");
  require_time(t_end);
  const int n = scene.n;
  const double T = scene.singular_time();
  if (t_end >= T) throw PastSingularity("t_end is at or past the singular time");
  if (t_end == 0.0) return 0.0;
  if (alpha == n + 2.0) {
    return std::pow(n, n + 1) * unit_sphere_area(n) / 2.0 * std::log(T / (T - t_end));
  }
  // With s = r^2 = e^y: dt = -s dy / (2n) and the integrand is n^alpha A_n s^{(n-alpha)/2}.
  const double r_end2 = scene.r0 * scene.r0 - 2.0 * n * t_end;
  const double exponent = 0.5 * (n - alpha) + 1.0;
  static const GaussLegendre rule(64);
  const double integral = rule.integrate([exponent](double y) { return std::exp(exponent * y); },
                                         std::log(r_end2), std::log(scene.r0 * scene.r0));
  return std::pow(n, alpha) * unit_sphere_area(n) / (2.0 * n) * integral;
}

double spacetime_H_norm_closed_form(const SphereScene& scene, double alpha, double t_end) {
  return std::pow(spacetime_H_integral_closed_form(scene, alpha, t_end), 1.0 / alpha);
}

double hoffman_spruck_constant(int n, double alpha, bool b_real) {
  if (n < 2) throw UnsupportedDimension("Hoffman–Spruck constant needs n >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  const double c = std::pow(2.0, n - 2) / alpha * std::pow(1.0 - alpha, -1.0 / n) *
                   (static_cast<double>(n) / (n - 1)) * std::pow(unit_ball_volume(n), -1.0 / n);
  return b_real ? 0.5 * std::numbers::pi * c : c;
}

double ZonalFunction::value(double x) const {
  double acc = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double ZonalFunction::derivative(double x) const {
  double acc = 0.0;
  for (size_t k = coefficients.size(); k-- > 1;) acc = acc * x + static_cast<double>(k) * coefficients[k];
  return acc;
}

double ZonalFunction::sampled_minimum() const {
  constexpr int kSamples = 10000;
  double m = value(1.0);
  for (int i = 0; i < kSamples; ++i) {
    const double th = std::numbers::pi * i / (kSamples - 1);
    m = std::min(m, value(std::cos(th)));
  }
  return m;
}

namespace {

struct ZonalIntegrals {
  double power = 0.0;      // int |v|^q
  double grad_sq = 0.0;    // int |grad v|^2
  double grad_abs = 0.0;   // int |grad v|
  double v_sq = 0.0;       // int v^2
  double v_abs = 0.0;      // int |v|
};

ZonalIntegrals zonal_integrals(int n, double r, const ZonalFunction& v, double q, int order) {
  const GaussLegendre rule(order);
  const double measure = unit_sphere_area(n - 1) * std::pow(r, n);
  ZonalIntegrals out;
  const double half = 0.5 * std::numbers::pi;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    const double th = half * (rule.nodes[i] + 1.0);
    const double x = std::cos(th);
    const double sn = std::sin(th);
    const double w = half * rule.weights[i] * measure * std::pow(sn, n - 1);
    const double val = v.value(x);
    const double grad = std::abs(-sn * v.derivative(x)) / r;
    out.power += w * std::pow(std::abs(val), q);
    out.grad_sq += w * grad * grad;
    out.grad_abs += w * grad;
    out.v_sq += w * val * val;
    out.v_abs += w * std::abs(val);
  }
  return out;
}

}  // namespace

SobolevCheck sobolev_check_zonal(const SphereScene& scene, double t, const ZonalFunction& v,
                                 SobolevForm form, const SobolevOptions& options) {
  const int n = scene.n;
  if (v.coefficients.size() > 17) throw InvalidArgument("zonal functions have degree <= 16");
  if (form == SobolevForm::hoffman_spruck && n < 2) {
    throw UnsupportedDimension("the L^{n/(n-1)} inequality needs n >= 2");
  }
  if (form != SobolevForm::hoffman_spruck && n < 3) {
    throw UnsupportedDimension("exponent 2n/(n-2) needs n >= 3");
  }
  const SphereState st = sphere_state(scene, t);
  const double H = n / st.r;

  SobolevCheck out;
  switch (form) {
    case SobolevForm::hoffman_spruck: {
      if (v.sampled_minimum() < 0.0) throw NegativeTestFunction("h must be non-negative");
      const double alpha = options.alpha.value_or(static_cast<double>(n) / (n + 1));
      const double q = static_cast<double>(n) / (n - 1);
      const auto I = zonal_integrals(n, st.r, v, q, options.quadrature_order);
      out.constant = hoffman_spruck_constant(n, alpha, false);
      out.lhs = std::pow(I.power, 1.0 / q);
      out.rhs = out.constant * (I.grad_abs + H * I.v_abs);
      out.holds = out.lhs <= out.rhs;
      break;
    }
    case SobolevForm::gradient_bound: {
      if (!options.s || !(*options.s > 0.0)) throw InvalidArgument("gradient_bound needs s > 0");
      if (v.sampled_minimum() < 0.0) throw NegativeTestFunction("f must be non-negative");
      const double s = *options.s;
      const double q = 2.0 * n / (n - 2);
      const auto I = zonal_integrals(n, st.r, v, q, options.quadrature_order);
      out.constant = hoffman_spruck_constant(n, static_cast<double>(n) / (n + 1), false);
      const double factor = (n - 2.0) * (n - 2.0) / (4.0 * (n - 1.0) * (n - 1.0) * (1.0 + s));
      out.lhs = I.grad_sq;
      out.rhs = factor * (std::pow(I.power, 2.0 / q) / (out.constant * out.constant) -
                          H * H * (1.0 + 1.0 / s) * I.v_sq);
      out.holds = out.lhs >= out.rhs;
      break;
    }
    case SobolevForm::curvature_weighted: {
      const double q = 2.0 * n / (n - 2);
      const auto I = zonal_integrals(n, st.r, v, q, options.quadrature_order);
      out.constant = options.constant ? *options.constant
                                      : calibrate_curvature_weighted_constant(n, options.quadrature_order);
      const double total_Hpow = std::pow(H, n + 2) * st.vol;
      out.lhs = std::pow(I.power, 2.0 / q);
      out.rhs = out.constant * (I.grad_sq + total_Hpow * I.v_sq);
      out.holds = out.lhs <= out.rhs;
      break;
    }
  }
  return out;
}

std::vector<ZonalFunction> zonal_battery() {
  return {
      {{1.0}},
      {{1.0, 1.0}},
      {{1.0, -1.0}},
      {{1.0, 2.0, 1.0}},
      {{0.0, 0.0, 1.0}},
      {{2.0, 1.0}},
      {{1.0, 0.0, -1.0}},
      {{0.5, 0.0, 0.0, 0.0, 1.0}},
      {{1.0, 3.0, 3.0, 1.0}},
      {{-0.5, 0.0, 1.5}},
  };
}

double calibrate_curvature_weighted_constant(int n, int quadrature_order) {
  if (n < 3) throw UnsupportedDimension("exponent 2n/(n-2) needs n >= 3");
  double worst = 0.0;
  const double q = 2.0 * n / (n - 2);
  for (double r : {0.5, 1.0, 2.0}) {
    const double H = n / r;
    const double total_Hpow = std::pow(H, n + 2) * unit_sphere_area(n) * std::pow(r, n);
    for (const auto& v : zonal_battery()) {
      const auto I = zonal_integrals(n, r, v, q, quadrature_order);
      const double bracket = I.grad_sq + total_Hpow * I.v_sq;
      if (bracket > 0.0) worst = std::max(worst, std::pow(I.power, 2.0 / q) / bracket);
    }
  }
  return worst;
}

EvolutionThreshold evolution_threshold(const SphereScene& scene, double t) {
  const auto s = sphere_state(scene, t);
  const double r2 = s.r * s.r;
  EvolutionThreshold e;
  e.u = s.a2;
  e.du_dt = 2.0 * scene.n * scene.n / (r2 * r2);
  e.laplacian = 0.0;
  e.threshold = (e.du_dt - e.laplacian) / (e.u * e.u);
  return e;
}

EvolutionThreshold evolution_threshold(const SphereProductScene& scene, double t) {
  const auto s = sphere_product_state(scene, t);
  const double a2 = s.a * s.a;
  const double b2 = s.b * s.b;
  EvolutionThreshold e;
  e.u = s.a2;
  e.du_dt = 2.0 * scene.p * scene.p / (a2 * a2) + 2.0 * scene.q * scene.q / (b2 * b2);
  e.laplacian = 0.0;
  e.threshold = (e.du_dt - e.laplacian) / (e.u * e.u);
  return e;
}

DiscreteImmersion sphere_mesh(const SphereScene& scene, double t, int resolution) {
  const auto s = sphere_state(scene, t);
  DiscreteImmersion base;
  if (scene.n == 1) {
    base = polygon_circle(resolution, s.r);
  } else if (scene.n == 2) {
    base = icosphere(resolution, s.r);
  } else {
    throw UnsupportedDimension("sphere meshes exist for n in {1, 2}");
  }
  const int D = scene.n + scene.d;
  DiscreteImmersion out = embed(base, D, scene.subspace);
  if (scene.center.size() == D) out.vertices.rowwise() += scene.center.transpose();
  return out;
}

}  // namespace mcflow::analytic
