#include "mcflow/run.hpp"

#include "mcflow/error.hpp"
#include "mcflow/flow.hpp"
#include "mcflow/rescale.hpp"
#include "mcflow/snapshot.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace mcflow {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ValidationError*>(&e)) return exit_code::config;
  if (dynamic_cast<const InvalidImmersion*>(&e) || dynamic_cast<const DegenerateElement*>(&e)) {
    return exit_code::config;
  }
  if (dynamic_cast<const UnknownQuantity*>(&e) || dynamic_cast<const IoError*>(&e) ||
      dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const UnsupportedDimension*>(&e)) {
    return exit_code::config;
  }
  return exit_code::numerical;
}

int verdict_exit_code(const std::vector<MonitorReport>& reports) {
  for (const auto& r : reports) {
    if (r.verdict == Verdict::violated) return exit_code::violation;
  }
  return exit_code::ok;
}

namespace {

std::string key(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); }

// Append-only file; every line goes out in a single write(2).
class LineWriter {
 public:
  explicit LineWriter(const std::string& path) {
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_APPEND, 0644);
    if (fd_ < 0) throw IoError("cannot open " + path);
  }
  ~LineWriter() {
    if (fd_ >= 0) ::close(fd_);
  }
  LineWriter(const LineWriter&) = delete;
  LineWriter& operator=(const LineWriter&) = delete;

  void append(std::string line) {
    line += '\n';
    const ssize_t w = ::write(fd_, line.data(), line.size());
    if (w != static_cast<ssize_t>(line.size())) throw IoError("short write");
  }

 private:
  int fd_ = -1;
};

void write_json_atomic(const fs::path& path, const nlohmann::json& j) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::vector<std::pair<double, double>> pairs_from(const nlohmann::json& obj) {
  std::vector<std::pair<double, double>> out;
  for (auto it = obj.begin(); it != obj.end(); ++it) out.emplace_back(std::stod(it.key()), it.value().get<double>());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

nlohmann::ordered_json to_json(const TraceRecord& r) {
  nlohmann::ordered_json j;
  j["t"] = r.t;
  j["dt"] = r.dt;
  j["vol"] = r.vol;
  j["h2_max"] = r.h2_max;
  j["h2_min"] = r.h2_min;
  j["a2_max"] = r.a2_max;
  nlohmann::ordered_json p = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.aring_p_norms) p[key(k)] = v;
  j["aring_p_norms"] = p;
  nlohmann::ordered_json st = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.st_integral) st[key(k)] = v;
  j["st_integral_alpha"] = st;
  j["scheme"] = r.scheme;
  j["step"] = r.step;
  j["aring2_max"] = r.aring2_max;
  j["pinch_ratio"] = r.pinch_ratio;
  j["h2_integral"] = r.h2_integral;
  j["lb_discrepancy"] = r.lb_discrepancy;
  return j;
}

TraceRecord trace_record_from_json(const nlohmann::json& j) {
  TraceRecord r;
  try {
    r.t = j.at("t").get<double>();
    r.dt = j.at("dt").get<double>();
    r.vol = j.at("vol").get<double>();
    r.h2_max = j.at("h2_max").get<double>();
    r.h2_min = j.at("h2_min").get<double>();
    r.a2_max = j.at("a2_max").get<double>();
    r.aring_p_norms = pairs_from(j.at("aring_p_norms"));
    r.st_integral = pairs_from(j.at("st_integral_alpha"));
    r.scheme = j.at("scheme").get<std::string>();
    r.step = j.value("step", 0L);
    r.aring2_max = j.value("aring2_max", 0.0);
    r.pinch_ratio = j.value("pinch_ratio", 0.0);
    r.h2_integral = j.value("h2_integral", 0.0);
    r.lb_discrepancy = j.value("lb_discrepancy", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed trace record: ") + e.what());
  }
  return r;
}

FlowTrace read_trace(const std::string& dir) {
  const auto manifest = read_json_file(fs::path(dir) / "MANIFEST");
  FlowTrace trace;
  trace.intrinsic_dim = manifest.value("intrinsic_dim", 0);
  trace.ambient_dim = manifest.value("ambient_dim", 0);
  trace.stop_reason = manifest.value("stop_reason", "");
  std::ifstream in(fs::path(dir) / "trace.ndjson");
  if (!in) throw IoError("cannot read " + (fs::path(dir) / "trace.ndjson").string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      break;  // torn final line of an interrupted run
    }
    trace.records.push_back(trace_record_from_json(j));
  }
  return trace;
}

namespace {

class Manifest {
 public:
  Manifest(fs::path dir, const RunConfig& cfg, int n, int D) : path_(std::move(dir) / "MANIFEST") {
    j_["status"] = "incomplete";
    j_["intrinsic_dim"] = n;
    j_["ambient_dim"] = D;
    j_["scene"] = to_string(cfg.scene.kind);
    j_["scheme"] = is_analytic(cfg.scene.kind) ? "analytic" : to_string(cfg.scheme.scheme);
    j_["config"] = to_json(cfg);
    j_["files"] = nlohmann::json::array();
    flush();
  }
  void add(const std::string& file) {
    j_["files"].push_back(file);
  }
  void set(const std::string& k, nlohmann::json v) { j_[k] = std::move(v); }
  void flush() { write_json_atomic(path_, j_); }

 private:
  fs::path path_;
  nlohmann::json j_;
};

std::vector<MonitorReport> final_mesh_reports(const DiscreteImmersion& imm, const FundamentalForms& forms,
                                              const FlowTrace& trace, const RunConfig& cfg) {
  const auto deriv = covariant_derivative(imm, forms, cfg.scheme.ring + 1);
  const auto field = curvature_field(imm, forms, deriv);
  std::vector<MonitorReport> out;
  out.push_back(pinching_linear(field, cfg.pinching_a(), cfg.monitors.b));
  if (field.n >= 3) out.push_back(pinching_andrews_baker(field));
  for (auto& r : inequality_suite(field)) out.push_back(std::move(r));
  if (trace.records.back().t > 0.0) out.push_back(moser_ratio(trace, trace.records.back().t));
  out.push_back(volume_decay(trace));
  return out;
}

template <class Scene>
std::vector<MonitorReport> final_analytic_reports(const Scene& scene, const FlowTrace& trace, const RunConfig& cfg) {
  const auto field = curvature_field(scene, trace.records.back().t);
  std::vector<MonitorReport> out;
  out.push_back(pinching_linear(field, cfg.pinching_a(), cfg.monitors.b));
  if (field.n >= 2) out.push_back(pinching_andrews_baker(field));
  for (auto& r : inequality_suite(field)) out.push_back(std::move(r));
  if (trace.records.back().t > 0.0) out.push_back(moser_ratio(trace, trace.records.back().t));
  out.push_back(volume_decay(trace, 1e-10 + 0.5 * cfg.scheme.cfl));
  return out;
}

nlohmann::json spacetime_json(const FlowTrace& trace, double (*f)(double, double)) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [a, v] : trace.records.back().st_integral) j[key(a)] = f(v, a);
  return j;
}

}  // namespace

RunResult run(const RunConfig& cfg, const std::string& out_dir) {
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir / "snapshots", ec);
  if (ec) throw IoError("cannot create " + (dir / "snapshots").string() + ": " + ec.message());

  const auto built = build_scene(cfg.scene);
  const int n = intrinsic_dim(cfg.scene);
  const int D = ambient_dim(cfg.scene);
  Manifest manifest(dir, cfg, n, D);

  MonitorSet monitors;
  monitors.alphas = cfg.monitors.alpha;
  monitors.p_norms = cfg.monitors.p;

  RunResult result;
  nlohmann::json summary;
  try {
    LineWriter trace_out((dir / "trace.ndjson").string());
    manifest.add("trace.ndjson");
    manifest.flush();

    if (const auto* imm = std::get_if<DiscreteImmersion>(&built)) {
      LineWriter index_out((dir / "snapshots" / "index.ndjson").string());
      manifest.add("snapshots/index.ndjson");
      long last_snapshot = -1;
      auto snapshot = [&](const FlowState& s, const FundamentalForms& f) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%06ld", s.step_index);
        write_snapshot((dir / "snapshots" / (std::string(name) + ".csv")).string(), s.immersion, f);
        nlohmann::ordered_json line;
        line["step"] = s.step_index;
        line["t"] = s.t;
        line["csv"] = std::string(name) + ".csv";
        line["elements"] = std::string(name) + ".elements";
        index_out.append(line.dump());
        last_snapshot = s.step_index;
      };
      FundamentalForms last_forms;
      StepObserver observer = [&](const FlowState& s, const FundamentalForms& f, const TraceRecord& r) {
        trace_out.append(to_json(r).dump());
        if (s.step_index % cfg.snapshot_every == 0) snapshot(s, f);
        last_forms = f;
      };
      FlowState state;
      state.immersion = *imm;
      result.trace = run_until(state, cfg.scheme, monitors, observer);
      if (last_snapshot != state.step_index) snapshot(state, last_forms);

      result.reports = final_mesh_reports(state.immersion, last_forms, result.trace, cfg);
      const auto blow = blowup_estimate(result.trace);
      const auto center = estimate_center(result.trace);
      summary["T_hat"] = blow.T_hat;
      summary["T_hat_latest"] = blow.T_hat_latest;
      summary["T_hat_method"] = blow.method;
      summary["center"] = std::vector<double>(center.center.data(), center.center.data() + center.center.size());
      summary["center_drift"] = center.drift;
      summary["max_h_offset"] = center.max_h_offset;
      if (state.t < blow.T_hat) {
        const auto rescaled = parabolic_rescale(state, center.center, blow.T_hat);
        const auto round = roundness_metrics(rescaled, cfg.scheme.ring);
        summary["final_roundness"] = {{"pinch_ratio", round.pinch_ratio},
                                      {"radial_cv", round.radial_cv},
                                      {"hausdorff_to_unit_sphere", round.hausdorff_to_unit_sphere},
                                      {"lambda", rescaled.lambda}};
      } else {
        summary["final_roundness"] = nullptr;
      }
    } else {
      auto run_closed = [&](const auto& scene) {
        result.trace = run_analytic(scene, cfg.scheme, monitors);
        for (const auto& r : result.trace.records) trace_out.append(to_json(r).dump());
        result.reports = final_analytic_reports(scene, result.trace, cfg);
        const auto blow = blowup_estimate(result.trace);
        summary["T_hat"] = blow.T_hat;
        summary["T_hat_latest"] = blow.T_hat_latest;
        summary["T_hat_method"] = blow.method;
        summary["T_exact"] = scene.singular_time();
        summary["final_roundness"] = {{"pinch_ratio", result.trace.records.back().pinch_ratio}};
      };
      if (const auto* s = std::get_if<analytic::SphereScene>(&built)) run_closed(*s);
      if (const auto* s = std::get_if<analytic::SphereProductScene>(&built)) run_closed(*s);
    }
  } catch (const std::exception& e) {
    manifest.set("status", "failed");
    manifest.set("error", e.what());
    manifest.set("exit_code", exit_code_for(e));
    manifest.flush();
    throw;
  }

  nlohmann::json reports = nlohmann::json::array();
  for (const auto& r : result.reports) reports.push_back(to_json(r));
  write_json_atomic(dir / "monitors.json", reports);
  manifest.add("monitors.json");

  result.exit_code = verdict_exit_code(result.reports);
  const auto& last = result.trace.records.back();
  summary["final_t"] = last.t;
  summary["steps"] = last.step;
  summary["stop_reason"] = result.trace.stop_reason;
  summary["spacetime_integrals"] = spacetime_json(result.trace, [](double v, double) { return v; });
  summary["spacetime_norms"] = spacetime_json(result.trace, [](double v, double a) { return std::pow(v, 1.0 / a); });
  nlohmann::json verdicts = nlohmann::json::object();
  for (const auto& r : result.reports) verdicts[r.name] = to_string(r.verdict);
  summary["verdicts"] = verdicts;
  nlohmann::json series = nlohmann::json::array();
  for (const auto& r : result.trace.records) series.push_back({r.t, finite_or_null(r.pinch_ratio)});
  summary["pinch_ratio_series"] = series;
  summary["exit_code"] = result.exit_code;
  write_json_atomic(dir / "summary.json", summary);
  manifest.add("summary.json");

  manifest.set("status", "complete");
  manifest.set("stop_reason", result.trace.stop_reason);
  manifest.set("exit_code", result.exit_code);
  manifest.set("records", result.trace.records.size());
  manifest.flush();
  result.summary = std::move(summary);
  return result;
}

namespace {

std::vector<std::string> plot_names() {
  return {"t", "dt", "vol", "h2_max", "h2_min", "a2_max", "aring2_max", "pinch_ratio", "h2_integral",
          "lb_discrepancy", "step", "st_integral", "st_integral_<alpha>", "aring_p_norm", "aring_p_<p>"};
}

double lookup(const TraceRecord& r, const std::string& q) {
  static const std::map<std::string, double TraceRecord::*> scalars = {
      {"t", &TraceRecord::t},
      {"dt", &TraceRecord::dt},
      {"vol", &TraceRecord::vol},
      {"h2_max", &TraceRecord::h2_max},
      {"h2_min", &TraceRecord::h2_min},
      {"a2_max", &TraceRecord::a2_max},
      {"aring2_max", &TraceRecord::aring2_max},
      {"pinch_ratio", &TraceRecord::pinch_ratio},
      {"h2_integral", &TraceRecord::h2_integral},
      {"lb_discrepancy", &TraceRecord::lb_discrepancy},
  };
  if (const auto it = scalars.find(q); it != scalars.end()) return r.*(it->second);
  if (q == "step") return static_cast<double>(r.step);
  auto from = [&q](const std::vector<std::pair<double, double>>& list, const std::string& prefix) -> double {
    if (q == prefix.substr(0, prefix.size() - 1) && !list.empty()) return list.front().second;
    if (q.rfind(prefix, 0) == 0) {
      const std::string tail = q.substr(prefix.size());
      for (const auto& [k, v] : list) {
        if (key(k) == tail) return v;
      }
    }
    throw UnknownQuantity(q);
  };
  if (q.rfind("st_integral", 0) == 0) return from(r.st_integral, "st_integral_");
  if (q == "aring_p_norm") return r.aring_p_norms.empty() ? throw UnknownQuantity(q) : r.aring_p_norms.front().second;
  if (q.rfind("aring_p_", 0) == 0) return from(r.aring_p_norms, "aring_p_");
  throw UnknownQuantity(q);
}

}  // namespace

std::string emit_plotdata(const std::string& trace_dir, const std::vector<std::string>& quantities) {
  std::vector<std::string> cols;
  for (const auto& q : quantities) {
    if (q != "t" && std::find(cols.begin(), cols.end(), q) == cols.end()) cols.push_back(q);
  }
  if (quantities.empty()) throw UnknownQuantity("empty quantity list");
  const auto trace = read_trace(trace_dir);
  if (trace.records.empty()) throw IoError("trace has no records");
  std::string list;
  for (const auto& n : plot_names()) list += (list.empty() ? "" : ", ") + n;
  for (const auto& c : cols) {
    try {
      lookup(trace.records.front(), c);
    } catch (const UnknownQuantity&) {
      throw UnknownQuantity("'" + c + "' (known: " + list + ")");
    }
  }
  std::string stem = "t";
  for (const auto& c : cols) stem += "_" + c;
  const fs::path out_dir = fs::path(trace_dir) / "plot";
  fs::create_directories(out_dir);
  const fs::path path = out_dir / (stem + ".dat");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# t";
  for (const auto& c : cols) out << ' ' << c;
  out << '\n';
  char buf[32];
  for (const auto& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%.17g", r.t);
    out << buf;
    for (const auto& c : cols) {
      std::snprintf(buf, sizeof buf, "%.17g", lookup(r, c));
      out << ' ' << buf;
    }
    out << '\n';
  }
  return path.string();
}

nlohmann::json rescale_run(const std::string& trace_dir, std::optional<double> T_hat, std::optional<Vec> center) {
  const fs::path dir(trace_dir);
  const auto trace = read_trace(trace_dir);
  if (trace.records.empty()) throw IoError("trace has no records");
  struct Entry {
    long step;
    double t;
    std::string csv;
  };
  std::vector<Entry> entries;
  {
    std::ifstream in(dir / "snapshots" / "index.ndjson");
    if (!in) throw IoError("no snapshots/index.ndjson in " + trace_dir);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        entries.push_back({j.at("step").get<long>(), j.at("t").get<double>(), j.at("csv").get<std::string>()});
      } catch (const nlohmann::json::exception&) {
        break;
      }
    }
  }
  if (entries.empty()) throw IoError("no snapshots recorded in " + trace_dir);

  std::vector<Snapshot> snaps;
  std::vector<Vec> centroids;
  for (const auto& e : entries) {
    snaps.push_back(read_snapshot((dir / "snapshots" / e.csv).string()));
    centroids.push_back(weighted_centroid(snaps.back().immersion, snaps.back().weight));
  }
  const double T = T_hat ? *T_hat : blowup_estimate(trace).T_hat;
  const auto est = estimate_center(centroids);
  const Vec c = center ? *center : est.center;
  if (c.size() != snaps.front().immersion.ambient_dim()) throw ValidationError("center", "has the wrong dimension");

  fs::create_directories(dir / "rescaled");
  nlohmann::json series = nlohmann::json::array();
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!(entries[i].t < T)) continue;
    FlowState s;
    s.immersion = snaps[i].immersion;
    s.t = entries[i].t;
    s.step_index = entries[i].step;
    const auto rescaled = parabolic_rescale(s, c, T);
    const auto forms = compute_forms(rescaled.immersion);
    write_snapshot((dir / "rescaled" / entries[i].csv).string(), rescaled.immersion, forms);
    const auto round = roundness_metrics(rescaled.immersion, forms, Vec::Zero(c.size()));
    series.push_back({{"step", entries[i].step},
                      {"t", entries[i].t},
                      {"lambda", rescaled.lambda},
                      {"pinch_ratio", round.pinch_ratio},
                      {"radial_cv", round.radial_cv},
                      {"hausdorff_to_unit_sphere", round.hausdorff_to_unit_sphere}});
  }
  nlohmann::json out = {{"T_hat", T},
                        {"center", std::vector<double>(c.data(), c.data() + c.size())},
                        {"center_drift", est.drift},
                        {"series", series}};
  write_json_atomic(dir / "roundness.json", out);
  return out;
}

}  // namespace mcflow
