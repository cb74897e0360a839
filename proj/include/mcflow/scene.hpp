#pragma once

// Scene descriptions: generated meshes, mesh files and closed-form scenes.

#include "mcflow/analytic.hpp"
#include "mcflow/geometry.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mcflow {

enum class SceneKind {
  mesh_file,
  icosphere,
  polygon_circle,
  ellipsoid,
  clifford_torus,
  analytic_sphere,
  analytic_sphere_product,
};

const char* to_string(SceneKind k);
SceneKind scene_kind_from_string(const std::string& s);  // throws InvalidArgument

/// Radial perturbation mode. n = 2: real spherical harmonic Y_lm scaled to
/// unit mean square; n = 1: cos(l theta) for order 0, sin(l theta) for order 1.
struct HarmonicMode {
  int degree = 0;
  int order = 0;
  double amplitude = 0.0;

  bool operator==(const HarmonicMode&) const = default;
};

/// Only the keys meaningful for `kind` are read or written.
struct SceneSpec {
  SceneKind kind = SceneKind::icosphere;
  double r0 = 1.0;                          // icosphere, polygon_circle, analytic_sphere
  int subdiv = 3;                           // icosphere, ellipsoid
  int vertices = 128;                       // polygon_circle
  std::array<double, 3> axes{1.0, 1.0, 1.0};  // ellipsoid
  double a0 = 1.0, b0 = 1.0;                // clifford_torus, analytic_sphere_product
  int steps = 64;                           // clifford_torus
  std::string path;                         // mesh_file (snapshot CSV, sidecar .elements)
  int n = 2, d = 1;                         // analytic_sphere
  int p = 1, q = 1, extra_codim = 0;        // analytic_sphere_product
  std::optional<int> ambient_dim;
  Mat embed_subspace;                       // ambient_dim x base dim, orthonormal columns
  Vec translate;
  std::vector<HarmonicMode> perturbation;

  bool operator==(const SceneSpec& o) const;
};

bool is_analytic(SceneKind k);

/// Intrinsic dimension of the scene (reads the sidecar for mesh files).
int intrinsic_dim(const SceneSpec& spec);
/// Base ambient dimension before embedding (3 for surfaces in R^3, 4 for the torus, ...).
int base_ambient_dim(const SceneSpec& spec);
int ambient_dim(const SceneSpec& spec);

/// Throws ValidationError naming the offending field (prefixed by `where`).
void validate(const SceneSpec& spec, const std::string& where = "scene");

using BuiltScene = std::variant<DiscreteImmersion, analytic::SphereScene, analytic::SphereProductScene>;

/// Generates the mesh (with perturbation, embedding and translation applied)
/// or the closed-form scene.
BuiltScene build_scene(const SceneSpec& spec);

/// Same mesh kind with one more refinement level (subdiv + 1, twice the steps
/// or vertices). Throws InvalidArgument for mesh files and analytic scenes.
SceneSpec refined(const SceneSpec& spec);

SceneSpec scene_from_json(const nlohmann::json& j, const std::string& where = "scene");
nlohmann::json to_json(const SceneSpec& spec);

}  // namespace mcflow
