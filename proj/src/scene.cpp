#include "mcflow/scene.hpp"

#include "json_reader.hpp"
#include "mcflow/error.hpp"
#include "mcflow/meshes.hpp"
#include "mcflow/snapshot.hpp"

#include <boost/math/special_functions/spherical_harmonic.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace mcflow {

namespace {

struct KindName {
  SceneKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {SceneKind::mesh_file, "mesh_file"},
    {SceneKind::icosphere, "icosphere"},
    {SceneKind::polygon_circle, "polygon_circle"},
    {SceneKind::ellipsoid, "ellipsoid"},
    {SceneKind::clifford_torus, "clifford_torus"},
    {SceneKind::analytic_sphere, "analytic_sphere"},
    {SceneKind::analytic_sphere_product, "analytic_sphere_product"},
};

bool perturbable(SceneKind k) {
  return k == SceneKind::icosphere || k == SceneKind::polygon_circle || k == SceneKind::ellipsoid;
}

bool embeddable(SceneKind k) { return k != SceneKind::analytic_sphere_product; }

double min_radius(const SceneSpec& s) {
  if (s.kind == SceneKind::ellipsoid) return *std::min_element(s.axes.begin(), s.axes.end());
  return s.r0;
}

// Real spherical harmonic scaled to unit mean square over S^2.
double real_harmonic(int l, int m, double theta, double phi) {
  const double norm = std::sqrt(4.0 * std::numbers::pi);
  if (m == 0) return norm * boost::math::spherical_harmonic_r<double>(static_cast<unsigned>(l), 0, theta, phi);
  if (m > 0) {
    return norm * std::numbers::sqrt2 * boost::math::spherical_harmonic_r<double>(static_cast<unsigned>(l), m, theta, phi);
  }
  return norm * std::numbers::sqrt2 * boost::math::spherical_harmonic_i<double>(static_cast<unsigned>(l), -m, theta, phi);
}

void apply_perturbation(DiscreteImmersion& imm, const std::vector<HarmonicMode>& modes) {
  for (Index i = 0; i < imm.num_vertices(); ++i) {
    Vec x = imm.vertex(i);
    const double r = x.norm();
    double shift = 0.0;
    if (imm.intrinsic_dim == 1) {
      const double th = std::atan2(x(1), x(0));
      for (const auto& m : modes) shift += m.amplitude * (m.order == 0 ? std::cos(m.degree * th) : std::sin(m.degree * th));
    } else {
      const double theta = std::acos(std::clamp(x(2) / r, -1.0, 1.0));
      const double phi = std::atan2(x(1), x(0));
      for (const auto& m : modes) shift += m.amplitude * real_harmonic(m.degree, m.order, theta, phi);
    }
    imm.vertices.row(i) = (x * (1.0 + shift / r)).transpose();
  }
}

int sidecar_columns(const std::string& path) {
  std::ifstream el(sidecar_path(path));
  if (!el) throw ValidationError("scene.path", "cannot read " + sidecar_path(path));
  std::string line;
  while (std::getline(el, line)) {
    std::stringstream ss(line);
    int v = 0;
    int k = 0;
    while (ss >> v) ++k;
    if (k) return k;
  }
  throw ValidationError("scene.path", sidecar_path(path) + " lists no elements");
}

int csv_columns(const std::string& path) {
  std::ifstream csv(path);
  if (!csv) throw ValidationError("scene.path", "cannot read " + path);
  std::string line;
  std::getline(csv, line);
  return static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
}

}  // namespace

const char* to_string(SceneKind k) {
  for (const auto& e : kKinds)
    if (e.kind == k) return e.name;
  return "unknown";
}

SceneKind scene_kind_from_string(const std::string& s) {
  for (const auto& e : kKinds)
    if (s == e.name) return e.kind;
  throw InvalidArgument("unknown scene kind '" + s + "'");
}

bool is_analytic(SceneKind k) {
  return k == SceneKind::analytic_sphere || k == SceneKind::analytic_sphere_product;
}

bool SceneSpec::operator==(const SceneSpec& o) const {
  auto same = [](const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
  };
  return kind == o.kind && r0 == o.r0 && subdiv == o.subdiv && vertices == o.vertices && axes == o.axes &&
         a0 == o.a0 && b0 == o.b0 && steps == o.steps && path == o.path && n == o.n && d == o.d && p == o.p &&
         q == o.q && extra_codim == o.extra_codim && ambient_dim == o.ambient_dim &&
         same(embed_subspace, o.embed_subspace) && same(translate, o.translate) && perturbation == o.perturbation;
}

int intrinsic_dim(const SceneSpec& s) {
  switch (s.kind) {
    case SceneKind::polygon_circle: return 1;
    case SceneKind::icosphere:
    case SceneKind::ellipsoid:
    case SceneKind::clifford_torus: return 2;
    case SceneKind::analytic_sphere: return s.n;
    case SceneKind::analytic_sphere_product: return s.p + s.q;
    case SceneKind::mesh_file: return sidecar_columns(s.path) - 1;
  }
  return 0;
}

int base_ambient_dim(const SceneSpec& s) {
  switch (s.kind) {
    case SceneKind::polygon_circle: return 2;
    case SceneKind::icosphere:
    case SceneKind::ellipsoid: return 3;
    case SceneKind::clifford_torus: return 4;
    case SceneKind::analytic_sphere: return s.n + s.d;
    case SceneKind::analytic_sphere_product: return s.p + s.q + 2 + s.extra_codim;
    case SceneKind::mesh_file: return csv_columns(s.path) - 4;
  }
  return 0;
}

int ambient_dim(const SceneSpec& s) {
  if (s.kind == SceneKind::analytic_sphere || s.kind == SceneKind::analytic_sphere_product) return base_ambient_dim(s);
  return s.ambient_dim.value_or(base_ambient_dim(s));
}

void validate(const SceneSpec& s, const std::string& where) {
  auto fail = [&where](const std::string& key, const std::string& what) {
    throw ValidationError(where + "." + key, what);
  };
  auto positive = [&fail](const std::string& key, double v) {
    if (!(v > 0.0)) fail(key, "must be > 0");
  };
  switch (s.kind) {
    case SceneKind::icosphere:
      positive("r0", s.r0);
      if (s.subdiv < 0 || s.subdiv > 7) fail("subdiv", "must lie in [0, 7]");
      break;
    case SceneKind::polygon_circle:
      positive("r0", s.r0);
      if (s.vertices < 8) fail("vertices", "must be >= 8");
      break;
    case SceneKind::ellipsoid:
      for (double a : s.axes) positive("axes", a);
      if (s.subdiv < 0 || s.subdiv > 7) fail("subdiv", "must lie in [0, 7]");
      break;
    case SceneKind::clifford_torus:
      positive("a0", s.a0);
      positive("b0", s.b0);
      if (s.steps < 8) fail("steps", "must be >= 8");
      break;
    case SceneKind::mesh_file:
      if (s.path.empty()) fail("path", "required for mesh_file");
      break;
    case SceneKind::analytic_sphere:
      if (s.n < 1) fail("n", "must be >= 1");
      if (s.d < 1) fail("d", "must be >= 1");
      positive("r0", s.r0);
      break;
    case SceneKind::analytic_sphere_product:
      if (s.p < 1) fail("p", "must be >= 1");
      if (s.q < 1) fail("q", "must be >= 1");
      positive("a0", s.a0);
      positive("b0", s.b0);
      if (s.extra_codim < 0) fail("extra_codim", "must be >= 0");
      break;
  }
  const int base = base_ambient_dim(s);
  const int D = ambient_dim(s);
  if (s.ambient_dim) {
    if (is_analytic(s.kind) && *s.ambient_dim != base) fail("ambient_dim", "must equal " + std::to_string(base));
    if (*s.ambient_dim < base) fail("ambient_dim", "must be >= " + std::to_string(base));
  }
  if (s.embed_subspace.size()) {
    if (!embeddable(s.kind)) fail("embed_subspace", "not supported for this kind");
    const int k = s.kind == SceneKind::analytic_sphere ? s.n + 1 : base;
    if (s.embed_subspace.rows() != D || s.embed_subspace.cols() != k) {
      fail("embed_subspace", "needs " + std::to_string(k) + " vectors of length " + std::to_string(D));
    }
    const Mat gram = s.embed_subspace.transpose() * s.embed_subspace;
    if ((gram - Mat::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10) fail("embed_subspace", "vectors must be orthonormal");
  }
  if (s.translate.size()) {
    if (!embeddable(s.kind)) fail("translate", "not supported for this kind");
    if (s.translate.size() != D) fail("translate", "needs " + std::to_string(D) + " components");
  }
  if (!s.perturbation.empty()) {
    if (!perturbable(s.kind)) fail("perturbation", "only icosphere, ellipsoid and polygon_circle accept perturbations");
    double total = 0.0;
    for (const auto& m : s.perturbation) {
      if (m.degree < 0 || m.degree > 16) fail("perturbation.degree", "must lie in [0, 16]");
      if (s.kind == SceneKind::polygon_circle) {
        if (m.order != 0 && m.order != 1) fail("perturbation.order", "curves take order 0 (cos) or 1 (sin)");
      } else if (std::abs(m.order) > m.degree) {
        fail("perturbation.order", "|order| must be <= degree");
      }
      total += std::abs(m.amplitude);
    }
    if (!(total < 0.3 * min_radius(s))) fail("perturbation.amplitude", "total amplitude must be < 0.3 x min radius");
  }
}

BuiltScene build_scene(const SceneSpec& s) {
  validate(s);
  if (s.kind == SceneKind::analytic_sphere) {
    analytic::SphereScene scene;
    scene.n = s.n;
    scene.d = s.d;
    scene.r0 = s.r0;
    scene.center = s.translate;
    scene.subspace = s.embed_subspace;
    return scene;
  }
  if (s.kind == SceneKind::analytic_sphere_product) {
    analytic::SphereProductScene scene;
    scene.p = s.p;
    scene.q = s.q;
    scene.a0 = s.a0;
    scene.b0 = s.b0;
    scene.extra_codim = s.extra_codim;
    return scene;
  }
  DiscreteImmersion imm;
  switch (s.kind) {
    case SceneKind::icosphere: imm = icosphere(s.subdiv, s.r0); break;
    case SceneKind::polygon_circle: imm = polygon_circle(s.vertices, s.r0); break;
    case SceneKind::ellipsoid: imm = ellipsoid(s.subdiv, s.axes[0], s.axes[1], s.axes[2]); break;
    case SceneKind::clifford_torus: imm = clifford_torus(s.steps, s.a0, s.b0); break;
    case SceneKind::mesh_file: imm = read_snapshot(s.path).immersion; break;
    default: break;
  }
  if (!s.perturbation.empty()) apply_perturbation(imm, s.perturbation);
  imm = embed(imm, ambient_dim(s), s.embed_subspace);
  if (s.translate.size()) imm.vertices.rowwise() += s.translate.transpose();
  validate(imm);
  return imm;
}

SceneSpec refined(const SceneSpec& s) {
  SceneSpec out = s;
  switch (s.kind) {
    case SceneKind::icosphere:
    case SceneKind::ellipsoid: out.subdiv += 1; break;
    case SceneKind::polygon_circle: out.vertices *= 2; break;
    case SceneKind::clifford_torus: out.steps *= 2; break;
    default: throw InvalidArgument(std::string("no refinement for ") + to_string(s.kind));
  }
  return out;
}

SceneSpec scene_from_json(const nlohmann::json& j, const std::string& where) {
  detail::ObjectReader r(j, where);
  SceneSpec s;
  const auto kind = r.string("kind");
  if (!kind) throw ValidationError(r.field("kind"), "required");
  try {
    s.kind = scene_kind_from_string(*kind);
  } catch (const InvalidArgument& e) {
    throw ValidationError(r.field("kind"), "unknown scene kind '" + *kind + "'");
  }
  auto as_int = [&r](const std::string& key, int fallback) { return static_cast<int>(r.integer(key, fallback)); };
  switch (s.kind) {
    case SceneKind::icosphere:
      s.r0 = r.number("r0", s.r0);
      s.subdiv = as_int("subdiv", s.subdiv);
      break;
    case SceneKind::polygon_circle:
      s.r0 = r.number("r0", s.r0);
      s.vertices = as_int("vertices", s.vertices);
      break;
    case SceneKind::ellipsoid:
      if (auto a = r.numbers("axes")) {
        if (a->size() != 3) throw ValidationError(r.field("axes"), "needs 3 semi-axes");
        std::copy(a->begin(), a->end(), s.axes.begin());
      }
      s.subdiv = as_int("subdiv", s.subdiv);
      break;
    case SceneKind::clifford_torus:
      s.a0 = r.number("a0", s.a0);
      s.b0 = r.number("b0", s.b0);
      s.steps = as_int("steps", s.steps);
      break;
    case SceneKind::mesh_file:
      s.path = r.string("path").value_or("");
      break;
    case SceneKind::analytic_sphere:
      s.n = as_int("n", s.n);
      s.d = as_int("d", s.d);
      s.r0 = r.number("r0", s.r0);
      break;
    case SceneKind::analytic_sphere_product:
      s.p = as_int("p", s.p);
      s.q = as_int("q", s.q);
      s.a0 = r.number("a0", s.a0);
      s.b0 = r.number("b0", s.b0);
      s.extra_codim = as_int("extra_codim", s.extra_codim);
      break;
  }
  if (auto D = r.integer("ambient_dim")) s.ambient_dim = static_cast<int>(*D);
  if (const auto* e = r.get("embed_subspace")) {
    if (!e->is_array() || e->empty()) throw ValidationError(r.field("embed_subspace"), "expected an array of vectors");
    const Index k = static_cast<Index>(e->size());
    Index D = -1;
    for (Index c = 0; c < k; ++c) {
      const auto& col = (*e)[static_cast<size_t>(c)];
      if (!col.is_array() || (D >= 0 && static_cast<Index>(col.size()) != D)) {
        throw ValidationError(r.field("embed_subspace"), "vectors must be arrays of equal length");
      }
      if (D < 0) {
        D = static_cast<Index>(col.size());
        s.embed_subspace.resize(D, k);
      }
      for (Index i = 0; i < D; ++i) {
        if (!col[static_cast<size_t>(i)].is_number()) throw ValidationError(r.field("embed_subspace"), "expected numbers");
        s.embed_subspace(i, c) = col[static_cast<size_t>(i)].get<double>();
      }
    }
  }
  if (auto t = r.numbers("translate")) s.translate = Eigen::Map<const Vec>(t->data(), static_cast<Index>(t->size()));
  if (const auto* p = r.get("perturbation")) {
    detail::ObjectReader pr(*p, r.field("perturbation"));
    const auto* modes = pr.get("modes");
    if (!modes || !modes->is_array()) throw ValidationError(pr.field("modes"), "expected an array of modes");
    for (size_t i = 0; i < modes->size(); ++i) {
      detail::ObjectReader mr((*modes)[i], pr.field("modes[" + std::to_string(i) + "]"));
      HarmonicMode m;
      m.degree = static_cast<int>(mr.integer("degree", 0));
      m.order = static_cast<int>(mr.integer("order", 0));
      const auto amp = mr.number("amplitude");
      if (!amp) throw ValidationError(mr.field("amplitude"), "required");
      m.amplitude = *amp;
      mr.finish();
      s.perturbation.push_back(m);
    }
    pr.finish();
  }
  r.finish();
  validate(s, where);
  return s;
}

nlohmann::json to_json(const SceneSpec& s) {
  nlohmann::json j;
  j["kind"] = to_string(s.kind);
  switch (s.kind) {
    case SceneKind::icosphere: j["r0"] = s.r0; j["subdiv"] = s.subdiv; break;
    case SceneKind::polygon_circle: j["r0"] = s.r0; j["vertices"] = s.vertices; break;
    case SceneKind::ellipsoid: j["axes"] = s.axes; j["subdiv"] = s.subdiv; break;
    case SceneKind::clifford_torus: j["a0"] = s.a0; j["b0"] = s.b0; j["steps"] = s.steps; break;
    case SceneKind::mesh_file: j["path"] = s.path; break;
    case SceneKind::analytic_sphere: j["n"] = s.n; j["d"] = s.d; j["r0"] = s.r0; break;
    case SceneKind::analytic_sphere_product:
      j["p"] = s.p;
      j["q"] = s.q;
      j["a0"] = s.a0;
      j["b0"] = s.b0;
      j["extra_codim"] = s.extra_codim;
      break;
  }
  if (s.ambient_dim) j["ambient_dim"] = *s.ambient_dim;
  if (s.embed_subspace.size()) {
    nlohmann::json cols = nlohmann::json::array();
    for (Index c = 0; c < s.embed_subspace.cols(); ++c) {
      cols.push_back(std::vector<double>(s.embed_subspace.col(c).data(), s.embed_subspace.col(c).data() + s.embed_subspace.rows()));
    }
    j["embed_subspace"] = cols;
  }
  if (s.translate.size()) j["translate"] = std::vector<double>(s.translate.data(), s.translate.data() + s.translate.size());
  if (!s.perturbation.empty()) {
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : s.perturbation) modes.push_back({{"degree", m.degree}, {"order", m.order}, {"amplitude", m.amplitude}});
    j["perturbation"] = {{"modes", modes}};
  }
  return j;
}

}  // namespace mcflow
