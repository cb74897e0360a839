#include "mcflow/config.hpp"
#include "mcflow/error.hpp"
#include "mcflow/meshes.hpp"
#include "mcflow/run.hpp"
#include "mcflow/snapshot.hpp"
#include "mcflow/suites.hpp"

#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;
using namespace mcflow;

namespace {

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("mcflow_unit_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::vector<double>> read_columns(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<double> row;
    double x;
    while (ss >> x) row.push_back(x);
    rows.push_back(row);
  }
  return rows;
}

template <class E>
std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const E& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("minimal config fills defaults") {
  const auto c = parse_config(R"({"scene":{"kind":"icosphere","r0":1.0,"subdiv":4},"stop":{"maxA2":200}})");
  CHECK(c.scheme.scheme == Scheme::semi_implicit);
  CHECK(c.monitors.alpha == std::vector<double>{4.0});
  CHECK(c.monitors.p == std::vector<double>{2.0});
  CHECK(c.scheme.stop.maxA2 == 200.0);
  CHECK(c.pinching_a() == doctest::Approx(1.0));
}

TEST_CASE("validation errors name the field") {
  CHECK(field_of<ValidationError>(R"({"scene":{"kind":"icosphere"},"monitors":{"alpha":3}})") == "monitors.alpha");
  CHECK(field_of<ValidationError>(R"({"scene":{"kind":"clifford_torus","a0":0.0}})") == "scene.a0");
  CHECK(field_of<ValidationError>(R"({"scene":{"kind":"icosphere"},"bogus":1})").find("bogus") != std::string::npos);
  CHECK(field_of<ValidationError>(R"({"scene":{"kind":"icosphere","r0":1,"perturbation":{"modes":[{"degree":2,"order":0,"amplitude":0.4}]}}})")
            .find("perturbation") != std::string::npos);
  CHECK(field_of<ValidationError>(R"({"scene":{"kind":"teapot"}})").find("kind") != std::string::npos);
  try {
    parse_config(R"({"scene":{"kind":"icosphere"},"monitors":{"alpha":3}})");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("n + 2") != std::string::npos);
  }
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_config("{\n  \"scene\": {\"kind\": \"icosphere\"},\n  \"cfl\": ,\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() >= 9);
  }
}

TEST_CASE("load_config reports missing files") { CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), IoError); }

TEST_CASE("config round trip") {
  const std::vector<std::string> texts = {
      R"({"scene":{"kind":"icosphere","r0":1.5,"subdiv":3},"stop":{"t_end":0.1}})",
      R"({"scene":{"kind":"polygon_circle","r0":2,"vertices":64,"perturbation":{"modes":[{"degree":3,"order":1,"amplitude":0.1}]}},"redistribute_every":5,"scheme":"explicit","stop":{"step_cap":10}})",
      R"({"scene":{"kind":"ellipsoid","axes":[1.2,1,0.9],"subdiv":2,"ambient_dim":5,"embed_subspace":[[1,0,0,0,0],[0,0,1,0,0],[0,0,0,0,1]],"translate":[1,2,3,4,5]},"monitors":{"a":0.4,"b":0.1,"p":[2,4],"alpha":[4,6]},"snapshot_every":3,"seed":9,"stop":{"maxA2":50}})",
      R"({"scene":{"kind":"analytic_sphere_product","p":2,"q":1,"a0":1,"b0":2,"extra_codim":1},"stop":{"t_end":0.1,"step_cap":50}})",
  };
  for (const auto& t : texts) {
    const auto c = parse_config(t);
    CHECK(config_from_json(to_json(c)) == c);
  }
}

TEST_CASE("snapshot round trip") {
  const auto dir = temp_dir("snap");
  const auto imm = clifford_torus(12);
  const auto forms = compute_forms(imm);
  const auto path = (dir / "s.csv").string();
  write_snapshot(path, imm, forms);
  CHECK(sidecar_path(path) == (dir / "s.elements").string());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x0,x1,x2,x3,H2,A2,Aring2,weight");
  const auto s = read_snapshot(path);
  CHECK(s.immersion.intrinsic_dim == 2);
  CHECK((s.immersion.vertices - imm.vertices).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.immersion.elements - imm.elements).cwiseAbs().maxCoeff() == 0);
  CHECK(s.h2[5] == forms.at[5].h2);
  CHECK_THROWS_AS(read_snapshot((dir / "missing.csv").string()), IoError);
}

TEST_CASE("trace record JSON round trip") {
  TraceRecord r;
  r.step = 3;
  r.t = 0.125;
  r.dt = 0.01;
  r.vol = 2.5;
  r.h2_max = 4.0;
  r.h2_min = 3.5;
  r.a2_max = 2.0;
  r.aring_p_norms = {{2.0, 0.1}, {4.0, 0.2}};
  r.st_integral = {{4.0, 1.5}};
  r.scheme = "semi_implicit";
  const auto j = to_json(r);
  CHECK(j.begin().key() == "t");
  CHECK(j.at("aring_p_norms").at("2") == 0.1);
  CHECK(j.at("st_integral_alpha").at("4") == 1.5);
  const auto back = trace_record_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.step == 3);
  CHECK(back.aring_p_norms == r.aring_p_norms);
  CHECK(back.st_integral == r.st_integral);
  CHECK(back.scheme == r.scheme);
}

TEST_CASE("run artifacts, plot data and rescaling") {
  const auto dir = temp_dir("run");
  auto cfg = parse_config(R"({"scene":{"kind":"icosphere","r0":1.0,"subdiv":3},"stop":{"t_end":0.1},"snapshot_every":4})");
  const auto res = run(cfg, dir.string());
  CHECK(res.exit_code == exit_code::ok);
  for (const char* f : {"MANIFEST", "trace.ndjson", "monitors.json", "summary.json", "snapshots/index.ndjson"}) CHECK(fs::exists(dir / f));
  std::ifstream m(dir / "MANIFEST");
  const auto manifest = nlohmann::json::parse(m);
  CHECK(manifest.at("status") == "complete");
  std::ifstream s(dir / "summary.json");
  const auto summary = nlohmann::json::parse(s);
  for (const char* k : {"T_hat", "final_roundness", "spacetime_norms", "verdicts"}) CHECK(summary.contains(k));

  const auto tr = read_trace(dir.string());
  CHECK(tr.records.size() == res.trace.records.size());
  CHECK(tr.intrinsic_dim == 2);

  const auto path = emit_plotdata(dir.string(), {"t", "vol", "st_integral"});
  const auto rows = read_columns(path);
  CHECK(rows.size() == tr.records.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i][1] == doctest::Approx(4.0 * std::numbers::pi * (1.0 - 4.0 * rows[i][0])).epsilon(1e-2));
    if (i > 0) CHECK(rows[i][2] >= rows[i - 1][2]);
  }
  CHECK_THROWS_AS(emit_plotdata(dir.string(), {}), UnknownQuantity);
  CHECK_THROWS_AS(emit_plotdata(dir.string(), {"t", "curvature"}), UnknownQuantity);

  const auto round = rescale_run(dir.string(), 0.25, Vec::Zero(3));
  CHECK(round.at("series").size() >= 2);
  CHECK(round.at("series").back().at("radial_cv").get<double>() < 1e-2);
  CHECK(fs::exists(dir / "roundness.json"));
  CHECK_THROWS_AS(rescale_run(dir.string(), 0.25, Vec::Zero(2)), ValidationError);

  // a torn final line from an interrupted append is ignored
  {
    std::ofstream app(dir / "trace.ndjson", std::ios::app);
    app << "{\"t\":0.2,\"dt\"";
  }
  CHECK(read_trace(dir.string()).records.size() == tr.records.size());
}

TEST_CASE("violated monitor maps to exit code 2") {
  const auto dir = temp_dir("violation");
  auto cfg = parse_config(R"({"scene":{"kind":"analytic_sphere","n":3,"r0":1},"stop":{"t_end":0.05},"monitors":{"a":0.2}})");
  CHECK(run(cfg, dir.string()).exit_code == exit_code::violation);
}

TEST_CASE("analytic run passes its identity monitors") {
  const auto dir = temp_dir("analytic");
  auto cfg = parse_config(R"({"scene":{"kind":"analytic_sphere","n":2,"r0":1},"stop":{"t_end":0.2}})");
  const auto res = run(cfg, dir.string());
  CHECK(res.exit_code == exit_code::ok);
  CHECK(res.summary.at("T_hat").get<double>() == doctest::Approx(0.25).epsilon(1e-14));
  for (const auto& r : identity_checks(cfg.scene)) CHECK(r.verdict != Verdict::violated);
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(ParseError("x", 1, 1)) == exit_code::config);
  CHECK(exit_code_for(ValidationError("f", "x")) == exit_code::config);
  CHECK(exit_code_for(IoError("x")) == exit_code::config);
  CHECK(exit_code_for(SolverFailure("x")) == exit_code::numerical);
  CHECK(exit_code_for(FitIllConditioned("x")) == exit_code::numerical);
  CHECK(exit_code_for(MaxStepsExceeded("x")) == exit_code::numerical);
}

TEST_CASE("scene arguments and oracle records") {
  const auto spec = scene_from_argument(R"({"kind":"analytic_sphere","n":2,"d":1,"r0":1})");
  const auto j = oracle_record(spec, 0.125);
  CHECK(j.at("r2").get<double>() == doctest::Approx(0.5));
  CHECK(j.at("h2").get<double>() == doctest::Approx(8.0));
  const auto dir = temp_dir("scene");
  {
    std::ofstream out(dir / "s.json");
    out << R"({"kind":"analytic_sphere_product","p":1,"q":1,"a0":1,"b0":1})";
  }
  const auto prod = oracle_record(scene_from_argument((dir / "s.json").string()), 0.1);
  CHECK(prod.at("pinch_ratio").get<double>() == doctest::Approx(0.5));
  CHECK_THROWS_AS(oracle_record(scene_from_argument(R"({"kind":"icosphere"})"), 0.0), ValidationError);
}

TEST_CASE("scene building") {
  SceneSpec s;
  s.kind = SceneKind::icosphere;
  s.subdiv = 2;
  s.perturbation = {{2, 0, 0.05}};
  const auto imm = std::get<DiscreteImmersion>(build_scene(s));
  const Vec r = imm.vertices.rowwise().norm();
  CHECK(r.maxCoeff() > 1.0 + 1e-3);
  CHECK(r.minCoeff() < 1.0 - 1e-3);
  CHECK(r.maxCoeff() < 1.0 + 0.06 * std::sqrt(5.0) + 1e-12);
  const auto fine = refined(s);
  CHECK(fine.subdiv == 3);
  s.kind = SceneKind::analytic_sphere;
  s.perturbation.clear();
  CHECK_THROWS_AS(refined(s), InvalidArgument);
  CHECK(std::holds_alternative<analytic::SphereScene>(build_scene(s)));
}

TEST_CASE("suite JSON") {
  SceneSpec s;
  s.kind = SceneKind::analytic_sphere_product;
  s.p = 2;
  s.q = 1;
  const auto res = run_suite(Suite::identities, {{"prod", s}});
  const auto j = to_json(res);
  CHECK(j.at(0).at("scene") == "prod");
  CHECK(j.at(0).at("reports").size() == 4);
  CHECK(suite_from_string("inequalities") == Suite::inequalities);
  CHECK_THROWS_AS(suite_from_string("all"), InvalidArgument);
}

}  // TEST_SUITE
