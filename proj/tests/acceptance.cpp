// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Reference values are recomputed here from the closed forms, not taken from the library.

#include "mcflow/analytic.hpp"
#include "mcflow/config.hpp"
#include "mcflow/flow.hpp"
#include "mcflow/rescale.hpp"
#include "mcflow/run.hpp"
#include "mcflow/snapshot.hpp"
#include "mcflow/suites.hpp"

#include "oracles/oracle_values.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mcflow;

namespace {

constexpr double pi = std::numbers::pi;

// A_n = 2 pi^{(n+1)/2} / Gamma((n+1)/2)
double sphere_area(int n) { return 2.0 * std::pow(pi, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1)); }

double rel(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAIL]");
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

fs::path scratch_root() {
  static const fs::path root = [] {
    auto p = fs::temp_directory_path() / ("mcflow_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Snapshot last_snapshot(const fs::path& dir) {
  std::ifstream in(dir / "snapshots" / "index.ndjson");
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  const auto j = nlohmann::json::parse(last);
  return read_snapshot((dir / "snapshots" / j.at("csv").get<std::string>()).string());
}

Mat random_frame(int D, int k, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Mat m(D, k);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  Eigen::HouseholderQR<Mat> qr(m);
  return qr.householderQ() * Mat::Identity(D, k);
}

RunConfig sphere_run(double t_end) {
  RunConfig cfg;
  cfg.scene.kind = SceneKind::icosphere;
  cfg.scene.r0 = 1.0;
  cfg.scene.subdiv = 4;
  cfg.scheme.stop.t_end = t_end;
  return cfg;
}

// r^2 = r0^2 - 4t reaches (0.5 r0)^2 at t = 3/16.
constexpr double kHalfRadiusTime = 3.0 / 16.0;

struct SphereRuns {
  RunResult r3, r5;
  Snapshot final3, final5;
  Vec center5;
};

const SphereRuns& sphere_runs() {
  static const SphereRuns runs = [] {
    SphereRuns s;
    const auto dir3 = scratch_root() / "sphere_r3";
    s.r3 = run(sphere_run(kHalfRadiusTime), dir3.string());
    s.final3 = last_snapshot(dir3);

    auto cfg5 = sphere_run(kHalfRadiusTime);
    cfg5.scene.ambient_dim = 5;
    cfg5.scene.embed_subspace = random_frame(5, 3, 7);
    s.center5 = Vec(5);
    s.center5 << 0.2, -0.1, 0.3, 0.05, -0.25;
    cfg5.scene.translate = s.center5;
    const auto dir5 = scratch_root() / "sphere_r5";
    s.r5 = run(cfg5, dir5.string());
    s.final5 = last_snapshot(dir5);
    return s;
  }();
  return runs;
}

double mean_radius2(const DiscreteImmersion& imm, const Vec& c) {
  double acc = 0.0;
  for (Index i = 0; i < imm.num_vertices(); ++i) acc += (imm.vertex(i) - c).squaredNorm();
  return acc / static_cast<double>(imm.num_vertices());
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  double worst = 0.0;
  double clifford = 0.0;
  struct S { int n, d; double r0; };
  struct P { int p, q; double a0, b0; };
  const std::vector<S> spheres = {{1, 1, 1.0}, {2, 1, 1.0}, {3, 2, 1.5}, {5, 3, 0.7}, {8, 1, 2.0}};
  const std::vector<P> products = {{1, 1, 1.0, 1.0}, {1, 2, 1.0, 1.3}, {2, 2, 0.8, 0.8}, {2, 3, 1.2, 1.0}, {3, 1, 1.0, 0.6}};
  for (const auto& s : spheres) {
    analytic::SphereScene sc;
    sc.n = s.n;
    sc.d = s.d;
    sc.r0 = s.r0;
    const double T = s.r0 * s.r0 / (2.0 * s.n);
    for (int k = 0; k < 100; ++k) {
      const double t = T * k / 100.0;
      const double r2 = s.r0 * s.r0 - 2.0 * s.n * t;
      const auto st = analytic::sphere_state(sc, t);
      worst = std::max({worst, rel(st.r * st.r, r2), rel(st.h2, s.n * s.n / r2), rel(st.a2, s.n / r2),
                        rel(st.vol, sphere_area(s.n) * std::pow(r2, 0.5 * s.n)), rel(st.T, T),
                        std::abs(st.aring2) * r2});
    }
  }
  for (const auto& p : products) {
    analytic::SphereProductScene sc;
    sc.p = p.p;
    sc.q = p.q;
    sc.a0 = p.a0;
    sc.b0 = p.b0;
    const double T = std::min(p.a0 * p.a0 / (2.0 * p.p), p.b0 * p.b0 / (2.0 * p.q));
    const int n = p.p + p.q;
    for (int k = 0; k < 100; ++k) {
      const double t = T * k / 100.0;
      const double a2 = p.a0 * p.a0 - 2.0 * p.p * t;
      const double b2 = p.b0 * p.b0 - 2.0 * p.q * t;
      const double h2 = p.p * p.p / a2 + p.q * p.q / b2;
      const double A2 = p.p / a2 + p.q / b2;
      const auto st = analytic::sphere_product_state(sc, t);
      worst = std::max({worst, rel(st.a * st.a, a2), rel(st.b * st.b, b2), rel(st.h2, h2), rel(st.a2, A2),
                        rel(st.aring2 + st.h2 / n, A2),
                        rel(st.vol, sphere_area(p.p) * std::pow(a2, 0.5 * p.p) * sphere_area(p.q) * std::pow(b2, 0.5 * p.q))});
      if (p.p == 1 && p.q == 1 && p.a0 == p.b0) clifford = std::max(clifford, rel(st.aring2 / st.h2, 0.5));
    }
  }
  o.require(worst <= 1e-12, "max rel err " + fmt("%.2e", worst) + " <= 1e-12 over 10 scenes x 100 times");
  o.require(clifford <= 1e-12, "Clifford |Å|^2/|H|^2 = 1/2 rel err " + fmt("%.2e", clifford));
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto& s = sphere_runs();
  const double r2_exact = 1.0 - 4.0 * kHalfRadiusTime;
  auto check = [&](const char* label, const RunResult& r, const Snapshot& fin, const Vec& c) {
    const double t = r.trace.records.back().t;
    const double r2e = 1.0 - 4.0 * t;
    const double err = std::abs(mean_radius2(fin.immersion, c) - r2e);
    double vol_worst = 0.0;
    for (const auto& rec : r.trace.records) vol_worst = std::max(vol_worst, rel(rec.vol, 4.0 * pi * (1.0 - 4.0 * rec.t)));
    o.require(std::abs(t - kHalfRadiusTime) < 1e-12 && std::abs(r2e - r2_exact) < 1e-12,
              std::string(label) + " reached r = 0.5");
    o.require(err <= 1e-2, std::string(label) + " |r^2 - r_exact^2| " + fmt("%.2e", err) + " <= 1e-2");
    o.require(vol_worst <= 1e-2, std::string(label) + " Vol rel err " + fmt("%.2e", vol_worst) + " <= 1e-2");
  };
  check("R3", s.r3, s.final3, Vec::Zero(3));
  check("R5", s.r5, s.final5, s.center5);
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto& s = sphere_runs();
  auto check = [&](const char* label, const FlowTrace& tr) {
    double worst = 0.0;
    for (size_t i = 1; i < tr.records.size(); ++i) {
      const auto& a = tr.records[i - 1];
      const auto& b = tr.records[i];
      const double rate = (b.vol - a.vol) / (b.t - a.t);
      const double mean = 0.5 * (a.h2_integral + b.h2_integral);
      worst = std::max(worst, std::abs(rate + mean) / mean);
    }
    o.require(worst <= 0.05, std::string(label) + " max |dVol/dt + int|H|^2| / int|H|^2 = " + fmt("%.4f", worst) + " <= 0.05");
  };
  check("R3", s.r3.trace);
  check("R5", s.r5.trace);
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto& s = sphere_runs();
  const int n = 2;
  const double T = 0.25;
  const double coeff = std::pow(n, n + 1) * sphere_area(n) / 2.0;  // 16 pi
  auto check = [&](const char* label, const FlowTrace& tr) {
    const auto& last = tr.records.back();
    const double closed = coeff * std::log(T / (T - last.t));
    const double got = tr.st_integral(tr.records.size() - 1, 4.0);
    o.require(rel(got, closed) <= 0.05, std::string(label) + " int int |H|^4 = " + fmt("%.4f", got) + " vs " +
                                            fmt("%.4f", closed) + " (rel " + fmt("%.4f", rel(got, closed)) + ")");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(tr.records.size());
    for (size_t i = 0; i < tr.records.size(); ++i) {
      const double x = std::log(1.0 / (T - tr.records[i].t));
      const double y = tr.st_integral(i, 4.0);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    o.require(rel(slope, coeff) <= 0.10, std::string(label) + " slope " + fmt("%.4f", slope) + " vs 16 pi (rel " +
                                             fmt("%.4f", rel(slope, coeff)) + ")");
  };
  check("R3", s.r3.trace);
  check("R5", s.r5.trace);
  return o;
}

Outcome criterion5() {
  Outcome o;
  double worst = 0.0;
  for (double r0 : {0.5, 1.0, 2.5}) {
    for (int n : {1, 2, 3, 6}) {
      analytic::SphereScene sc;
      sc.n = n;
      sc.r0 = r0;
      SchemeConfig cfg;
      cfg.stop.t_end = 0.5 * sc.singular_time();
      auto tr = run_analytic(sc, cfg, MonitorSet{});
      tr.records.resize(1);  // the t = 0 record only
      worst = std::max(worst, rel(blowup_estimate(tr).T_hat, r0 * r0 / (2.0 * n)));
    }
  }
  o.require(worst <= 1e-15, "analytic T_hat at t = 0 rel err " + fmt("%.1e", worst));
  const auto& s = sphere_runs();
  for (const auto* r : {&s.r3, &s.r5}) {
    const double e = rel(r->summary.at("T_hat").get<double>(), 0.25);
    o.require(e <= 2e-2, std::string(r == &s.r3 ? "R3" : "R5") + " mesh T_hat rel err " + fmt("%.4f", e) + " <= 0.02");
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto results = run_suite(Suite::identities, default_battery());
  for (const auto& r : results) {
    double te = 0, de = 0;
    bool ok = true;
    for (const auto& m : r.reports) {
      if (m.verdict == Verdict::violated) ok = false;
      if (m.name == "tracefree_trace") te = m.value("max_rel");
      if (m.name == "decomposition") de = m.value("max_rel");
    }
    ok = ok && te <= 1e-12 && de <= 1e-12;
    o.require(ok, r.scene + " trace " + fmt("%.1e", te) + " decomposition " + fmt("%.1e", de));
    if (r.scene == "sphere") {
      for (const auto& m : r.reports) {
        if (m.name == "gauss") o.require(m.value("order") >= 1.5, "sphere Gauss order " + fmt("%.3f", m.value("order")) + " >= 1.5");
      }
    }
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto results = run_suite(Suite::inequalities, default_battery());
  for (const auto& r : results) {
    std::string failed;
    int asserted = 0;
    for (const auto& m : r.reports) {
      if (m.name == "chen" || m.name == "hmax" || m.name == "gradient_A" || m.name == "gradient_H") {
        ++asserted;
        if (m.verdict != Verdict::holds) failed += " " + m.name;
      }
    }
    o.require(failed.empty() && asserted == 4, r.scene + (failed.empty() ? " all 4 hold" : " violated:" + failed));
    if (r.scene == "sphere") {
      for (const auto& m : r.reports) {
        if (m.name == "chen") {
          const double e = rel(m.value("integral"), 16.0 * pi);
          o.require(e <= 0.02, "sphere int |H|^2 " + fmt("%.4f", m.value("integral")) + " vs 16 pi (rel " + fmt("%.4f", e) + ")");
        }
        if (m.name == "hmax") {
          const double e = rel(m.value("ratio"), 4.0);
          o.require(e <= 0.02, "sphere hmax ratio " + fmt("%.4f", m.value("ratio")) + " vs 4");
        }
      }
    }
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  auto cfg = sphere_run(0.0);
  cfg.scheme.stop.t_end.reset();
  cfg.scheme.stop.maxA2 = 200.0;
  cfg.scene.perturbation = {{2, 0, 0.05}};
  const auto dir = scratch_root() / "perturbed_r3";
  const auto res = run(cfg, dir.string());
  const auto series = rescale_run(dir.string(), std::nullopt, std::nullopt).at("series");
  const double p0 = series.front().at("pinch_ratio").get<double>();
  const double p1 = series.back().at("pinch_ratio").get<double>();
  const double cv = series.back().at("radial_cv").get<double>();
  o.require(res.trace.stop_reason == "maxA2" || res.trace.stop_reason == "singularity",
            "stopped near the singularity (" + res.trace.stop_reason + ", max|A|^2 " +
                fmt("%.1f", res.trace.records.back().a2_max) + ")");
  o.require(p1 < p0 / 10.0, "rescaled pinch_ratio " + fmt("%.3e", p0) + " -> " + fmt("%.3e", p1) + " (< 1/10)");
  o.require(cv <= 0.02, "final radial CV " + fmt("%.4f", cv) + " <= 0.02");

  auto cfg5 = cfg;
  cfg5.scene.ambient_dim = 5;
  cfg5.scene.embed_subspace = random_frame(5, 3, 11);
  const auto dir5 = scratch_root() / "perturbed_r5";
  run(cfg5, dir5.string());
  const auto fit = subspace_dimension(last_snapshot(dir5).immersion, 1e-6);
  o.require(fit.dim == 3 && fit.residual <= 1e-8,
            "R5 subspace dim " + std::to_string(fit.dim) + " residual " + fmt("%.1e", fit.residual));
  return o;
}

Outcome criterion9() {
  Outcome o;
  double worst = 0.0, ratio = 0.0;
  for (const auto& e : oracle::kHoffmanSpruck) {
    worst = std::max(worst, rel(analytic::hoffman_spruck_constant(e.n, e.alpha, e.b_real), e.value));
    if (e.b_real) {
      const double r = analytic::hoffman_spruck_constant(e.n, e.alpha, true) /
                       analytic::hoffman_spruck_constant(e.n, e.alpha, false);
      ratio = std::max(ratio, rel(r, pi / 2.0));
    }
  }
  o.require(worst <= 1e-12, "max rel err vs high-precision values " + fmt("%.1e", worst) + " over " +
                                std::to_string(std::size(oracle::kHoffmanSpruck)) + " entries");
  o.require(ratio <= 4.0 * std::numeric_limits<double>::epsilon(), "branch ratio pi/2 rel err " + fmt("%.1e", ratio));
  return o;
}

Outcome criterion10() {
  Outcome o;
  auto cfg = sphere_run(0.1);
  const auto a = scratch_root() / "repro_a";
  const auto b = scratch_root() / "repro_b";
  run(cfg, a.string());
  run(cfg, b.string());
  const auto ta = slurp(a / "trace.ndjson");
  o.require(!ta.empty() && ta == slurp(b / "trace.ndjson"), "identical configs give byte-identical trace.ndjson");

  auto moved = cfg;
  moved.scene.embed_subspace = random_frame(3, 3, 5);
  moved.scene.translate = Vec(3);
  moved.scene.translate << 0.3, -0.2, 0.5;
  const auto c = scratch_root() / "repro_moved";
  run(moved, c.string());
  const auto ra = read_trace(a.string()).records;
  const auto rc = read_trace(c.string()).records;
  double worst = 0.0;
  bool same_len = ra.size() == rc.size();
  for (size_t i = 0; same_len && i < ra.size(); ++i) {
    std::vector<std::pair<double, double>> cols = {
        {ra[i].t, rc[i].t}, {ra[i].dt, rc[i].dt}, {ra[i].vol, rc[i].vol}, {ra[i].h2_max, rc[i].h2_max},
        {ra[i].h2_min, rc[i].h2_min}, {ra[i].a2_max, rc[i].a2_max}, {ra[i].aring2_max, rc[i].aring2_max},
        {ra[i].pinch_ratio, rc[i].pinch_ratio}, {ra[i].h2_integral, rc[i].h2_integral},
        {ra[i].lb_discrepancy, rc[i].lb_discrepancy}};
    for (size_t k = 0; k < ra[i].aring_p_norms.size(); ++k) cols.emplace_back(ra[i].aring_p_norms[k].second, rc[i].aring_p_norms[k].second);
    for (size_t k = 0; k < ra[i].st_integral.size(); ++k) cols.emplace_back(ra[i].st_integral[k].second, rc[i].st_integral[k].second);
    for (const auto& [x, y] : cols) worst = std::max(worst, std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)}));
  }
  o.require(same_len && worst <= 1e-10, "rotated+translated run: " + std::to_string(rc.size()) + " records, max column diff " +
                                            fmt("%.1e", worst) + " <= 1e-10");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                          criterion6, criterion7, criterion8, criterion9, criterion10};
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("criterion %zu: %s (%.1f s) %s\n", i + 1, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(scratch_root());
  return failures == 0 ? 0 : 1;
}
