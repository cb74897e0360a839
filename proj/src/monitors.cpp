#include "mcflow/monitors.hpp"

#include "mcflow/error.hpp"
#include "mcflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <string>

namespace mcflow {

double FlowTrace::st_integral(size_t i, double alpha) const {
  for (const auto& [a, v] : records.at(i).st_integral) {
    if (a == alpha) return v;
  }
  throw UnknownQuantity("no spacetime integral with alpha = " + std::to_string(alpha));
}

double CurvatureField::volume() const {
  double v = 0.0;
  for (double w : weights) v += w;
  return v;
}

namespace {

std::uint64_t mix(std::uint64_t h, double x) {
  std::uint64_t bits = 0;
  static_assert(sizeof(bits) == sizeof(x));
  std::memcpy(&bits, &x, sizeof(x));
  for (int i = 0; i < 8; ++i) {
    h ^= (bits >> (8 * i)) & 0xffu;
    h *= 1099511628211ull;
  }
  return h;
}

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;

CurvatureField single_entry(int n, double a2, double h2, double vol, double diameter) {
  CurvatureField f;
  f.n = n;
  f.analytic = true;
  f.a2 = {a2};
  f.h2 = {h2};
  f.aring2 = {std::max(0.0, a2 - h2 / n)};
  f.weights = {vol};
  f.grad_a2 = {0.0};
  f.grad_h2 = {0.0};
  f.grad_aring2 = {0.0};
  f.diameter = diameter;
  std::uint64_t h = kFnvOffset;
  for (double x : {static_cast<double>(n), a2, h2, vol, diameter}) h = mix(h, x);
  f.digest = h;
  return f;
}

MonitorReport make_report(std::string name, std::uint64_t digest, Verdict verdict, std::string anchor) {
  MonitorReport r;
  r.name = std::move(name);
  r.inputs_digest = digest;
  r.verdict = verdict;
  r.anchor = std::move(anchor);
  return r;
}

}  // namespace

CurvatureField curvature_field(const DiscreteImmersion& imm, const FundamentalForms& forms) {
  CurvatureField f;
  f.n = imm.intrinsic_dim;
  f.a2 = forms.a2();
  f.h2 = forms.h2();
  f.aring2 = forms.aring2();
  f.weights = measure_weights(imm);
  f.digest = digest(imm);
  return f;
}

CurvatureField curvature_field(const DiscreteImmersion& imm, const FundamentalForms& forms,
                               const DerivativeData& deriv) {
  CurvatureField f = curvature_field(imm, forms);
  const size_t N = deriv.at.size();
  f.grad_a2.resize(N);
  f.grad_h2.resize(N);
  f.grad_aring2.resize(N);
  for (size_t i = 0; i < N; ++i) {
    f.grad_a2[i] = deriv.at[i].grad_a2;
    f.grad_h2[i] = deriv.at[i].grad_h2;
    f.grad_aring2[i] = deriv.at[i].grad_aring2;
  }
  f.diameter = graph_diameter(imm);
  return f;
}

CurvatureField curvature_field(const analytic::SphereScene& scene, double t) {
  const auto s = analytic::sphere_state(scene, t);
  return single_entry(scene.n, s.a2, s.h2, s.vol, std::numbers::pi * s.r);
}

CurvatureField curvature_field(const analytic::SphereProductScene& scene, double t) {
  const auto s = analytic::sphere_product_state(scene, t);
  const double diam = std::numbers::pi * std::hypot(s.a, s.b);
  CurvatureField f = single_entry(scene.n(), s.a2, s.h2, s.vol, diam);
  f.aring2 = {s.aring2};
  return f;
}

double lp_norm(const std::vector<double>& field, double p, const std::vector<double>& weights) {
  if (!(p >= 1.0)) throw InvalidArgument("p must be >= 1");
  if (field.size() != weights.size()) throw InvalidArgument("field and weights differ in length");
  double acc = 0.0;
  for (size_t i = 0; i < field.size(); ++i) acc += weights[i] * std::pow(std::abs(field[i]), p);
  return std::pow(acc, 1.0 / p);
}

double h_power_integral(const CurvatureField& field, double alpha) {
  double acc = 0.0;
  for (size_t i = 0; i < field.h2.size(); ++i) acc += field.weights[i] * std::pow(field.h2[i], 0.5 * alpha);
  return acc;
}

double SpacetimeAccumulator::norm() const { return std::pow(value, 1.0 / alpha); }

SpacetimeAccumulator start_spacetime(double alpha, const CurvatureField& initial) {
  if (!(alpha >= 1.0)) throw InvalidArgument("alpha must be >= 1");
  SpacetimeAccumulator acc;
  acc.alpha = alpha;
  acc.last_integrand = h_power_integral(initial, alpha);
  return acc;
}

SpacetimeAccumulator update_spacetime(SpacetimeAccumulator acc, const CurvatureField& field, double dt) {
  if (!(dt >= 0.0)) throw InvalidArgument("dt must be >= 0");
  const double next = h_power_integral(field, acc.alpha);
  acc.value += 0.5 * dt * (acc.last_integrand + next);
  acc.last_integrand = next;
  return acc;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::violated: return "violated";
    case Verdict::informational: return "informational";
  }
  return "informational";
}

double MonitorReport::value(const std::string& key) const {
  for (const auto& [k, v] : values) {
    if (k == key) return v;
  }
  throw UnknownQuantity(name + " has no value '" + key + "'");
}

nlohmann::json to_json(const MonitorReport& report) {
  nlohmann::json values = nlohmann::json::object();
  for (const auto& [k, v] : report.values) values[k] = v;
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(report.inputs_digest));
  return {{"name", report.name},
          {"verdict", to_string(report.verdict)},
          {"values", values},
          {"anchor", report.anchor},
          {"inputs_digest", digest}};
}

MonitorReport pinching_linear(const CurvatureField& field, double a, double b) {
  if (!(a > 0.0) || !(b >= 0.0)) throw InvalidArgument("pinching needs a > 0 and b >= 0");
  double worst = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < field.a2.size(); ++i) worst = std::max(worst, field.a2[i] - a * field.h2[i] - b);
  auto r = make_report("pinching_linear", field.digest, worst <= 0.0 ? Verdict::holds : Verdict::violated,
                       "|A|^2 <= a|H|^2 + b");
  r.values = {{"a", a}, {"b", b}, {"max_excess", worst}};
  return r;
}

double andrews_baker_constant(int n) {
  if (n < 2) throw UnsupportedDimension("pinching constant needs n >= 2");
  if (n <= 3) return 4.0 / (3.0 * n);
  return 1.0 / (n - 1.0);
}

MonitorReport pinching_andrews_baker(const CurvatureField& field) {
  if (!field.analytic && field.n < 3) {
    throw UnsupportedDimension("mesh pinching check needs n >= 3, got n = " + std::to_string(field.n));
  }
  const double c = andrews_baker_constant(field.n);
  auto r = pinching_linear(field, c, 0.0);
  r.name = "pinching_andrews_baker";
  r.anchor = field.n >= 4 ? "|A|^2 <= |H|^2/(n-1), n >= 4" : "|A|^2 <= 4/(3n) |H|^2, n <= 3";
  return r;
}

std::vector<MonitorReport> inequality_suite(const CurvatureField& field, double gradient_floor) {
  const int n = field.n;
  const double vol = field.volume();
  const double bound = std::pow(n, n) * analytic::unit_ball_volume(n);
  std::vector<MonitorReport> out;

  const double hn = h_power_integral(field, n);
  auto chen = make_report("chen", field.digest, hn >= bound ? Verdict::holds : Verdict::violated,
                          "n^n omega_n <= int |H|^n");
  chen.values = {{"integral", hn}, {"bound", bound}, {"ratio", hn / bound}};
  out.push_back(chen);

  const double h2max = *std::max_element(field.h2.begin(), field.h2.end());
  const double hbound = bound / vol;
  auto hmax = make_report("hmax", field.digest, h2max >= hbound ? Verdict::holds : Verdict::violated,
                          "max|H|^2 >= n^n omega_n / Vol");
  hmax.values = {{"h2_max", h2max}, {"bound", hbound}, {"ratio", h2max / hbound}};
  out.push_back(hmax);

  if (field.diameter) {
    const double w = h_power_integral(field, n - 1);
    auto top = make_report("topping_ratio", field.digest, Verdict::informational,
                           "diam(M) <= c int |H|^{n-1}");
    top.values = {{"diameter", *field.diameter}, {"integral", w}, {"ratio", *field.diameter / w}};
    out.push_back(top);
  }

  if (!field.grad_a2.empty() && n >= 2) {
    // The floor is stated at the scale where Vol equals the unit sphere's; |grad A|^2 ~ length^-4.
    const double length = std::pow(vol / analytic::unit_sphere_area(n), 1.0 / n);
    const double floor = gradient_floor / std::pow(length, 4);
    const double cA = 3.0 * n / (2.0 * (n - 1));
    const double cH = 3.0 * n * n / (2.0 * (n - 1));
    auto gradient = [&](const char* name, const std::vector<double>& lhs, double c, const char* anchor) {
      double worst = -std::numeric_limits<double>::infinity();
      double raw = -std::numeric_limits<double>::infinity();
      double lhs_max = 0.0;
      for (size_t i = 0; i < lhs.size(); ++i) {
        raw = std::max(raw, lhs[i] - c * field.grad_aring2[i]);
        worst = std::max(worst, lhs[i] - floor - c * field.grad_aring2[i]);
        lhs_max = std::max(lhs_max, lhs[i]);
      }
      auto r = make_report(name, field.digest, worst <= 0.0 ? Verdict::holds : Verdict::violated, anchor);
      r.values = {{"constant", c}, {"max_excess", worst}, {"raw_excess", raw}, {"lhs_max", lhs_max}, {"noise_floor", floor}};
      return r;
    };
    out.push_back(gradient("gradient_A", field.grad_a2, cA, "|grad A|^2 <= 3n/(2(n-1)) |grad Å|^2"));
    out.push_back(gradient("gradient_H", field.grad_h2, cH, "|grad H|^2 <= 3n^2/(2(n-1)) |grad Å|^2"));
  }
  return out;
}

double graph_diameter(const DiscreteImmersion& imm) {
  const auto adj = vertex_adjacency(imm);
  const size_t N = adj.size();
  std::vector<double> eccentricity(N, 0.0);
  parallel_for(N, [&](size_t src) {
    std::vector<double> dist(N, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[src] = 0.0;
    heap.emplace(0.0, static_cast<int>(src));
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      if (d > dist[static_cast<size_t>(v)]) continue;
      for (int w : adj[static_cast<size_t>(v)]) {
        const double nd = d + (imm.vertices.row(v) - imm.vertices.row(w)).norm();
        if (nd < dist[static_cast<size_t>(w)]) {
          dist[static_cast<size_t>(w)] = nd;
          heap.emplace(nd, w);
        }
      }
    }
    double ecc = 0.0;
    for (double d : dist) ecc = std::max(ecc, d);
    eccentricity[src] = ecc;
  });
  return *std::max_element(eccentricity.begin(), eccentricity.end());
}

MonitorReport moser_ratio(const FlowTrace& trace, double T0) {
  const auto& rec = trace.records;
  if (rec.empty() || !(T0 > 0.0)) throw WindowNotCovered("empty trace or T0 <= 0");
  const double eps = 1e-12 * std::max(1.0, T0);
  if (rec.front().t > eps || rec.back().t < T0 - eps) {
    throw WindowNotCovered("trace spans [" + std::to_string(rec.front().t) + ", " +
                           std::to_string(rec.back().t) + "], window ends at " + std::to_string(T0));
  }
  const int n = trace.intrinsic_dim;
  const double alpha = n + 2.0;
  double lhs = 0.0;
  double integral = 0.0;
  for (size_t i = 0; i < rec.size(); ++i) {
    if (rec[i].t >= 0.5 * T0 - eps && rec[i].t <= T0 + eps) lhs = std::max(lhs, rec[i].h2_max);
    if (rec[i].t <= T0 + eps) {
      integral = trace.st_integral(i, alpha);
    } else {
      // linear interpolation inside the step that crosses T0
      const double t0 = rec[i - 1].t;
      const double f = (T0 - t0) / (rec[i].t - t0);
      integral = (1.0 - f) * trace.st_integral(i - 1, alpha) + f * trace.st_integral(i, alpha);
      break;
    }
  }
  const double rhs = std::pow(integral, 2.0 / alpha);
  MonitorReport r;
  r.name = "moser_ratio";
  r.verdict = Verdict::informational;
  r.anchor = "max over [T0/2, T0] of |H|^2 <= C (int_0^T0 int |H|^{n+2})^{2/(n+2)}";
  r.values = {{"T0", T0}, {"lhs", lhs}, {"rhs_base", rhs}, {"ratio", rhs > 0.0 ? lhs / rhs : 0.0}};
  return r;
}

MonitorReport volume_decay(const FlowTrace& trace, double tolerance) {
  double worst = 0.0;
  for (size_t i = 1; i < trace.records.size(); ++i) {
    const auto& a = trace.records[i - 1];
    const auto& b = trace.records[i];
    if (!(b.dt > 0.0)) continue;
    const double rate = (b.vol - a.vol) / b.dt;
    const double mean = 0.5 * (a.h2_integral + b.h2_integral);
    if (mean > 0.0) worst = std::max(worst, std::abs(rate + mean) / mean);
  }
  MonitorReport r;
  r.name = "volume_decay";
  r.verdict = worst <= tolerance ? Verdict::holds : Verdict::violated;
  r.anchor = "d/dt dmu = -|H|^2 dmu";
  r.values = {{"max_relative_residual", worst}, {"tolerance", tolerance}};
  return r;
}

BlowupEstimate blowup_estimate(const FlowTrace& trace) {
  if (trace.records.empty()) throw InvalidArgument("blow-up estimate needs a nonempty trace");
  const int n = trace.intrinsic_dim;
  auto estimate = [n](const TraceRecord& r) {
    if (!(r.h2_max > 0.0)) throw ZeroMeanCurvature("max |H|^2 = 0 at t = " + std::to_string(r.t));
    return r.t + n / (2.0 * r.h2_max);
  };
  BlowupEstimate out;
  out.T_hat_latest = estimate(trace.records.back());
  const size_t k = std::min<size_t>(10, trace.records.size());
  std::vector<double> last;
  for (size_t i = trace.records.size() - k; i < trace.records.size(); ++i) last.push_back(estimate(trace.records[i]));
  std::sort(last.begin(), last.end());
  out.T_hat = k % 2 ? last[k / 2] : 0.5 * (last[k / 2 - 1] + last[k / 2]);
  out.method = "t + n/(2 max|H|^2), median of last " + std::to_string(k) + " records";
  return out;
}

}  // namespace mcflow
