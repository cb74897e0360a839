#include "mcflow/analytic.hpp"
#include "mcflow/error.hpp"

#include "oracles/oracle_values.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mcflow;
using namespace mcflow::analytic;

namespace {
constexpr double pi = std::numbers::pi;
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_SUITE("analytic") {

TEST_CASE("ball volumes and sphere areas match high-precision values") {
  for (const auto& b : oracle::kBalls) {
    CHECK(rel(unit_ball_volume(b.n), b.ball_volume) <= 1e-12);
    CHECK(rel(unit_sphere_area(b.n), b.sphere_area) <= 1e-12);
  }
  CHECK(unit_sphere_area(2) == doctest::Approx(4.0 * pi).epsilon(1e-15));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-15));
  CHECK(rel(unit_sphere_area(25), 2.0 * std::pow(pi, 13.0) / std::tgamma(13.0)) <= 1e-12);
}

TEST_CASE("shrinking sphere") {
  SphereScene s;
  s.n = 2;
  s.r0 = 1.0;
  const auto st = sphere_state(s, 0.125);
  CHECK(st.r * st.r == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(st.h2 == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(st.a2 == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(st.aring2 == 0.0);
  CHECK(st.T == doctest::Approx(0.25));
  CHECK_THROWS_AS(sphere_state(s, 0.25), PastSingularity);
  CHECK_THROWS_AS(sphere_state(s, 1.0), PastSingularity);
}

TEST_CASE("sphere products") {
  SphereProductScene c;
  c.p = 1;
  c.q = 1;
  c.a0 = c.b0 = 1.0;
  CHECK(c.singular_time() == doctest::Approx(0.5));
  for (double t : {0.0, 0.1, 0.3, 0.49}) {
    const auto st = sphere_product_state(c, t);
    CHECK(st.aring2 / st.h2 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(st.a * st.a == doctest::Approx(1.0 - 2.0 * t).epsilon(1e-14));
  }
  SphereProductScene p;
  p.p = 2;
  p.q = 1;
  p.a0 = 1.0;
  p.b0 = 1.0;
  CHECK(p.singular_time() == doctest::Approx(0.25));
  CHECK(p.ambient_dim() == 5);
  CHECK_THROWS_AS(sphere_product_state(p, 0.3), PastSingularity);
}

TEST_CASE("spacetime integral against direct quadrature in t") {
  SphereScene s;
  s.n = 2;
  s.r0 = 1.0;
  const double t_end = 0.2;
  for (double alpha : {4.0, 5.5, 8.0}) {
    // int_0^t_end (n/r)^alpha A_n r^n dt by composite Simpson
    const int m = 20000;
    double acc = 0.0;
    for (int k = 0; k <= m; ++k) {
      const double t = t_end * k / m;
      const double r = std::sqrt(1.0 - 4.0 * t);
      const double f = std::pow(2.0 / r, alpha) * 4.0 * pi * r * r;
      acc += f * (k == 0 || k == m ? 1.0 : (k % 2 ? 4.0 : 2.0));
    }
    acc *= t_end / (3.0 * m);
    CHECK(rel(spacetime_H_integral_closed_form(s, alpha, t_end), acc) <= 1e-8);
    CHECK(spacetime_H_norm_closed_form(s, alpha, t_end) == doctest::Approx(std::pow(acc, 1.0 / alpha)).epsilon(1e-8));
  }
  CHECK(spacetime_H_integral_closed_form(s, 4.0, 0.2) ==
        doctest::Approx(16.0 * pi * std::log(0.25 / 0.05)).epsilon(1e-14));
}

TEST_CASE("Hoffman-Spruck constant") {
  for (const auto& e : oracle::kHoffmanSpruck) CHECK(rel(hoffman_spruck_constant(e.n, e.alpha, e.b_real), e.value) <= 1e-12);
  CHECK(hoffman_spruck_constant(4, 0.5, true) / hoffman_spruck_constant(4, 0.5, false) == doctest::Approx(pi / 2).epsilon(1e-15));
  CHECK_THROWS_AS(hoffman_spruck_constant(1, 0.5, true), UnsupportedDimension);
  CHECK_THROWS_AS(hoffman_spruck_constant(3, 0.0, true), InvalidArgument);
  CHECK_THROWS_AS(hoffman_spruck_constant(3, 1.0, true), InvalidArgument);
}

TEST_CASE("zonal integrals on S^3 against high-precision quadrature") {
  SphereScene s;
  s.n = 3;
  s.d = 1;
  s.r0 = 1.0;
  const ZonalFunction v{{1.0, 1.0}};
  const auto& z = oracle::kZonalS3;
  const double H = 3.0;

  const auto hs = sobolev_check_zonal(s, 0.0, v, SobolevForm::hoffman_spruck);
  CHECK(rel(hs.lhs, std::pow(z.pow_hs, 2.0 / 3.0)) <= 1e-10);
  CHECK(rel(hs.rhs, hs.constant * (z.grad_abs + H * z.v_abs)) <= 1e-10);
  CHECK(rel(hs.constant, hoffman_spruck_constant(3, 0.75, false)) <= 1e-15);
  CHECK(hs.holds);

  SobolevOptions opt;
  opt.constant = 2.0;
  const auto cw = sobolev_check_zonal(s, 0.0, v, SobolevForm::curvature_weighted, opt);
  CHECK(rel(cw.lhs, std::pow(z.pow_sob, 1.0 / 3.0)) <= 1e-10);
  const double hn2 = std::pow(H, 5.0) * unit_sphere_area(3);
  CHECK(rel(cw.rhs, 2.0 * (z.grad_sq + hn2 * z.v_sq)) <= 1e-10);
}

TEST_CASE("zonal checks reject bad inputs") {
  SphereScene s;
  s.n = 3;
  const ZonalFunction neg{{-1.0, 0.5}};
  CHECK_THROWS_AS(sobolev_check_zonal(s, 0.0, neg, SobolevForm::hoffman_spruck), NegativeTestFunction);
  const ZonalFunction v{{1.0, 0.3}};
  CHECK_THROWS_AS(sobolev_check_zonal(s, 0.0, v, SobolevForm::gradient_bound), InvalidArgument);
  SphereScene curve;
  curve.n = 1;
  CHECK_THROWS(sobolev_check_zonal(curve, 0.0, v, SobolevForm::hoffman_spruck));
  CHECK_THROWS_AS(sobolev_check_zonal(s, 10.0, v, SobolevForm::hoffman_spruck), PastSingularity);
}

TEST_CASE("gradient bound holds on the sphere") {
  SphereScene s;
  s.n = 4;
  SobolevOptions opt;
  opt.s = 1.0;
  int checked = 0;
  for (const auto& f : zonal_battery()) {
    if (f.sampled_minimum() < 0.0) continue;
    CHECK(sobolev_check_zonal(s, 0.0, f, SobolevForm::gradient_bound, opt).holds);
    ++checked;
  }
  CHECK(checked >= 5);
}

TEST_CASE("calibrated curvature-weighted constant is the smallest that works") {
  const int n = 3;
  const double c = calibrate_curvature_weighted_constant(n);
  CHECK(c > 0.0);
  bool tight = false;
  for (double r0 : {0.5, 1.0, 2.0}) {
    SphereScene s;
    s.n = n;
    s.r0 = r0;
    for (const auto& f : zonal_battery()) {
      SobolevOptions ok;
      ok.constant = c * (1.0 + 1e-9);
      CHECK(sobolev_check_zonal(s, 0.0, f, SobolevForm::curvature_weighted, ok).holds);
      SobolevOptions under;
      under.constant = c * (1.0 - 1e-6);
      if (!sobolev_check_zonal(s, 0.0, f, SobolevForm::curvature_weighted, under).holds) tight = true;
    }
  }
  CHECK(tight);
}

TEST_CASE("zonal function helpers") {
  const ZonalFunction f{{1.0, 2.0, 3.0}};
  CHECK(f.value(0.5) == doctest::Approx(1.0 + 1.0 + 0.75));
  CHECK(f.derivative(0.5) == doctest::Approx(2.0 + 3.0));
  CHECK(f.sampled_minimum() == doctest::Approx(1.0 - 1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("evolution threshold is 2 on spheres") {
  for (int n : {1, 2, 3, 7}) {
    SphereScene s;
    s.n = n;
    const auto e = evolution_threshold(s, 0.1 / n);
    CHECK(e.threshold == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e.laplacian == 0.0);
    CHECK(e.du_dt == doctest::Approx(2.0 * e.u * e.u).epsilon(1e-12));
  }
}

TEST_CASE("sphere_mesh places the sphere in its subspace") {
  SphereScene s;
  s.n = 2;
  s.d = 3;
  s.r0 = 1.0;
  s.center = Vec::Zero(5);
  s.center(4) = 2.0;
  const auto m = sphere_mesh(s, 0.125, 2);
  CHECK(m.ambient_dim() == 5);
  for (Index i = 0; i < m.num_vertices(); ++i) {
    CHECK((m.vertex(i) - s.center).squaredNorm() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.vertices(i, 3) == 0.0);
  }
  SphereScene c;
  c.n = 1;
  CHECK(sphere_mesh(c, 0.0, 64).num_vertices() == 64);
}

}  // TEST_SUITE
