#include "mcflow/config.hpp"

#include "json_reader.hpp"
#include "mcflow/error.hpp"

#include <fstream>
#include <sstream>

namespace mcflow {

double RunConfig::pinching_a() const {
  if (monitors.a) return *monitors.a;
  const int n = intrinsic_dim(scene);
  return n >= 2 ? 1.0 / (n - 1.0) : 1.0;
}

bool operator==(const SchemeConfig& a, const SchemeConfig& b) {
  return a.scheme == b.scheme && a.cfl == b.cfl && a.dt_max == b.dt_max && a.extrapolate == b.extrapolate &&
         a.redistribute_every == b.redistribute_every && a.ring == b.ring &&
         a.explicit_mesh_factor == b.explicit_mesh_factor && a.max_steps == b.max_steps &&
         a.stop.t_end == b.stop.t_end && a.stop.maxA2 == b.stop.maxA2 && a.stop.step_cap == b.stop.step_cap;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.scene == b.scene && a.scheme == b.scheme && a.monitors == b.monitors && a.out == b.out &&
         a.snapshot_every == b.snapshot_every && a.seed == b.seed;
}

nlohmann::json parse_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // byte is 1-based and points just past the offending character
    const size_t stop = std::min(text.size(), e.byte > 0 ? e.byte - 1 : 0);
    int line = 1;
    int column = 1;
    for (size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    const auto pos = what.find("parse error");
    throw ParseError(pos == std::string::npos ? what : what.substr(pos), line, column);
  }
}

RunConfig config_from_json(const nlohmann::json& j) {
  detail::ObjectReader r(j, "");
  RunConfig c;
  const auto* scene = r.get("scene");
  if (!scene) throw ValidationError("scene", "required");
  c.scene = scene_from_json(*scene, "scene");
  const int n = intrinsic_dim(c.scene);

  if (auto s = r.string("scheme")) {
    try {
      c.scheme.scheme = scheme_from_string(*s);
    } catch (const InvalidArgument&) {
      throw ValidationError("scheme", "must be explicit or semi_implicit");
    }
  }
  c.scheme.cfl = r.number("cfl", c.scheme.cfl);
  c.scheme.dt_max = r.number("dt_max", c.scheme.dt_max);
  if (auto e = r.boolean("extrapolate")) c.scheme.extrapolate = *e;
  c.scheme.redistribute_every = static_cast<int>(r.integer("redistribute_every", c.scheme.redistribute_every));
  c.scheme.ring = static_cast<int>(r.integer("ring", c.scheme.ring));
  c.scheme.explicit_mesh_factor = r.number("explicit_mesh_factor", c.scheme.explicit_mesh_factor);
  c.scheme.max_steps = r.integer("max_steps", c.scheme.max_steps);

  if (const auto* stop = r.get("stop")) {
    detail::ObjectReader sr(*stop, "stop");
    c.scheme.stop.t_end = sr.number("t_end");
    c.scheme.stop.maxA2 = sr.number("maxA2");
    c.scheme.stop.step_cap = sr.integer("step_cap");
    sr.finish();
  }
  if (const auto* mon = r.get("monitors")) {
    detail::ObjectReader mr(*mon, "monitors");
    c.monitors.a = mr.number("a");
    c.monitors.b = mr.number("b", c.monitors.b);
    if (auto p = mr.numbers("p")) c.monitors.p = *p;
    if (const auto* a = mr.get("alpha")) {
      if (a->is_number()) {
        c.monitors.alpha = {a->get<double>()};
      } else if (auto list = mr.numbers("alpha")) {
        c.monitors.alpha = *list;
      }
    }
    mr.finish();
  }
  if (c.monitors.alpha.empty()) c.monitors.alpha = {n + 2.0};
  c.out = r.string("out").value_or("");
  c.snapshot_every = static_cast<int>(r.integer("snapshot_every", c.snapshot_every));
  if (const auto* seed = r.get("seed")) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<long long>() >= 0)) {
      throw ValidationError("seed", "expected a non-negative integer");
    }
    c.seed = seed->get<std::uint64_t>();
  }
  r.finish();

  // cross-field checks
  for (double a : c.monitors.alpha) {
    if (!(a >= n + 2.0)) {
      throw ValidationError("monitors.alpha", "spacetime exponent " + std::to_string(a) +
                                                  " is below n + 2 = " + std::to_string(n + 2) +
                                                  "; the extension criterion needs alpha >= n + 2");
    }
  }
  for (double p : c.monitors.p) {
    if (!(p >= 1.0)) throw ValidationError("monitors.p", "every p must be >= 1");
  }
  if (c.monitors.a && !(*c.monitors.a > 0.0)) throw ValidationError("monitors.a", "must be > 0");
  if (!(c.monitors.b >= 0.0)) throw ValidationError("monitors.b", "must be >= 0");
  if (c.snapshot_every < 1) throw ValidationError("snapshot_every", "must be >= 1");
  if (c.scheme.redistribute_every > 0 && n != 1) {
    throw ValidationError("redistribute_every", "redistribution applies to curves only");
  }
  try {
    validate(c.scheme);
  } catch (const InvalidArgument& e) {
    throw ValidationError("scheme", e.what());
  }
  return c;
}

RunConfig parse_config(const std::string& text) { return config_from_json(parse_json(text)); }

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["scene"] = to_json(c.scene);
  j["scheme"] = to_string(c.scheme.scheme);
  j["cfl"] = c.scheme.cfl;
  j["dt_max"] = c.scheme.dt_max;
  j["extrapolate"] = c.scheme.extrapolate;
  j["redistribute_every"] = c.scheme.redistribute_every;
  j["ring"] = c.scheme.ring;
  j["explicit_mesh_factor"] = c.scheme.explicit_mesh_factor;
  j["max_steps"] = c.scheme.max_steps;
  nlohmann::json stop = nlohmann::json::object();
  if (c.scheme.stop.t_end) stop["t_end"] = *c.scheme.stop.t_end;
  if (c.scheme.stop.maxA2) stop["maxA2"] = *c.scheme.stop.maxA2;
  if (c.scheme.stop.step_cap) stop["step_cap"] = *c.scheme.stop.step_cap;
  j["stop"] = stop;
  nlohmann::json mon = {{"b", c.monitors.b}, {"p", c.monitors.p}, {"alpha", c.monitors.alpha}};
  if (c.monitors.a) mon["a"] = *c.monitors.a;
  j["monitors"] = mon;
  if (!c.out.empty()) j["out"] = c.out;
  j["snapshot_every"] = c.snapshot_every;
  j["seed"] = c.seed;
  return j;
}

}  // namespace mcflow
