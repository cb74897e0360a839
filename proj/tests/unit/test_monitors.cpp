#include "mcflow/error.hpp"
#include "mcflow/flow.hpp"
#include "mcflow/meshes.hpp"
#include "mcflow/monitors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mcflow;

namespace {
constexpr double pi = std::numbers::pi;

analytic::SphereScene sphere(int n, double r0 = 1.0) {
  analytic::SphereScene s;
  s.n = n;
  s.r0 = r0;
  return s;
}

const MonitorReport& find(const std::vector<MonitorReport>& v, const std::string& name) {
  for (const auto& r : v) {
    if (r.name == name) return r;
  }
  throw std::runtime_error("missing report " + name);
}
}  // namespace

TEST_SUITE("monitors") {

TEST_CASE("lp norms") {
  CHECK(lp_norm({3.0, 4.0}, 2.0, {1.0, 1.0}) == doctest::Approx(5.0));
  CHECK(lp_norm({1.0, -1.0}, 1.0, {0.5, 0.5}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(lp_norm({1.0}, 0.5, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(lp_norm({1.0}, 2.0, {1.0, 2.0}), InvalidArgument);
}

TEST_CASE("spacetime accumulator is a trapezoid rule") {
  const auto f = curvature_field(sphere(2), 0.0);
  auto acc = start_spacetime(4.0, f);
  CHECK(acc.value == 0.0);
  acc = update_spacetime(acc, f, 0.5);
  CHECK(acc.value == doctest::Approx(0.5 * 16.0 * 4.0 * pi));
  CHECK(acc.norm() == doctest::Approx(std::pow(acc.value, 0.25)));
}

TEST_CASE("linear pinching on spheres") {
  const auto f = curvature_field(sphere(3), 0.0);
  CHECK(pinching_linear(f, 1.0 / 3.0, 0.0).verdict == Verdict::holds);
  CHECK(pinching_linear(f, 0.3, 0.0).verdict == Verdict::violated);
  CHECK(pinching_linear(f, 0.3, 0.5).verdict == Verdict::holds);
}

TEST_CASE("Andrews-Baker constants") {
  CHECK(andrews_baker_constant(3) == doctest::Approx(4.0 / 9.0));
  CHECK(andrews_baker_constant(4) == doctest::Approx(1.0 / 3.0));
  CHECK(andrews_baker_constant(2) == doctest::Approx(2.0 / 3.0));
  CHECK(pinching_andrews_baker(curvature_field(sphere(2), 0.0)).verdict == Verdict::holds);
  analytic::SphereProductScene c;
  c.p = 2;
  c.q = 2;
  CHECK(pinching_andrews_baker(curvature_field(c, 0.0)).verdict == Verdict::violated);
  const auto imm = icosphere(2);
  CHECK_THROWS_AS(pinching_andrews_baker(curvature_field(imm, compute_forms(imm))), UnsupportedDimension);
}

TEST_CASE("Chen and hmax on the unit sphere") {
  const auto r = inequality_suite(curvature_field(sphere(2), 0.0));
  CHECK(find(r, "chen").value("integral") == doctest::Approx(16.0 * pi).epsilon(1e-14));
  CHECK(find(r, "hmax").value("ratio") == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(find(r, "gradient_A").verdict == Verdict::holds);
  CHECK(find(r, "topping_ratio").verdict == Verdict::informational);
  CHECK(find(r, "topping_ratio").value("diameter") == doctest::Approx(pi));
  CHECK_THROWS_AS(find(r, "chen").value("nope"), UnknownQuantity);
}

TEST_CASE("Chen and hmax hold for sphere products and scale are invariant") {
  analytic::SphereProductScene c;
  c.p = 1;
  c.q = 3;
  c.a0 = 0.7;
  c.b0 = 1.9;
  const auto r = inequality_suite(curvature_field(c, 0.0));
  CHECK(find(r, "chen").verdict == Verdict::holds);
  CHECK(find(r, "hmax").verdict == Verdict::holds);
  const double a = find(r, "chen").value("ratio");
  c.a0 *= 3.0;
  c.b0 *= 3.0;
  CHECK(find(inequality_suite(curvature_field(c, 0.0)), "chen").value("ratio") == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("graph diameter of a polygon is half its perimeter") {
  const auto imm = polygon_circle(64, 1.0);
  const double edge = 2.0 * std::sin(pi / 64);
  CHECK(graph_diameter(imm) == doctest::Approx(32 * edge).epsilon(1e-12));
}

TEST_CASE("report JSON") {
  const auto r = pinching_linear(curvature_field(sphere(2), 0.0), 0.5, 0.0);
  const auto j = to_json(r);
  for (const char* k : {"name", "verdict", "values", "anchor"}) CHECK(j.contains(k));
  CHECK(j.at("verdict") == "holds");
  CHECK(j.at("values").contains("max_excess"));
}

TEST_CASE("trace-level monitors") {
  SchemeConfig cfg;
  cfg.stop.t_end = 0.2;
  const auto tr = run_analytic(sphere(2), cfg, MonitorSet{});
  const auto b = blowup_estimate(tr);
  CHECK(b.T_hat == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(b.T_hat_latest == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(volume_decay(tr, 0.05).verdict == Verdict::holds);
  const auto m = moser_ratio(tr, 0.2);
  CHECK(m.verdict == Verdict::informational);
  CHECK(m.value("lhs") == doctest::Approx(4.0 / (1.0 - 0.8)));
  CHECK_THROWS_AS(moser_ratio(tr, 0.3), WindowNotCovered);
  FlowTrace flat = tr;
  flat.records.back().h2_max = 0.0;
  CHECK_THROWS_AS(blowup_estimate(flat), ZeroMeanCurvature);
}

TEST_CASE("gradient inequalities on a mesh ellipsoid") {
  const auto imm = ellipsoid(3, 1.2, 1.0, 0.9);
  const auto f = compute_forms(imm);
  const auto r = inequality_suite(curvature_field(imm, f, covariant_derivative(imm, f)));
  CHECK(find(r, "gradient_A").verdict == Verdict::holds);
  CHECK(find(r, "gradient_H").verdict == Verdict::holds);
  CHECK(find(r, "gradient_A").value("constant") == doctest::Approx(3.0));
  CHECK(find(r, "gradient_H").value("constant") == doctest::Approx(6.0));
}

}  // TEST_SUITE
