#include "mcflow/meshes.hpp"

#include "mcflow/error.hpp"

#include <cmath>
#include <array>
#include <map>
#include <numbers>
#include <utility>

namespace mcflow {

DiscreteImmersion icosphere(int subdiv, double radius) {
  if (subdiv < 0) throw InvalidArgument("subdiv must be >= 0");
  if (!(radius > 0.0)) throw InvalidArgument("radius must be > 0");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> pts = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (auto& p : pts) p.normalize();

  for (int level = 0; level < subdiv; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      pts.push_back((pts[static_cast<size_t>(a)] + pts[static_cast<size_t>(b)]).normalized());
      const int id = static_cast<int>(pts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  DiscreteImmersion imm;
  imm.intrinsic_dim = 2;
  imm.closed = true;
  imm.vertices.resize(static_cast<Index>(pts.size()), 3);
  for (size_t i = 0; i < pts.size(); ++i) imm.vertices.row(static_cast<Index>(i)) = radius * pts[i].transpose();
  imm.elements.resize(static_cast<Index>(faces.size()), 3);
  for (size_t i = 0; i < faces.size(); ++i)
    for (int c = 0; c < 3; ++c) imm.elements(static_cast<Index>(i), c) = faces[i][static_cast<size_t>(c)];
  return imm;
}

DiscreteImmersion polygon_circle(int vertices, double radius) {
  if (vertices < 3) throw InvalidArgument("polygon needs >= 3 vertices");
  if (!(radius > 0.0)) throw InvalidArgument("radius must be > 0");
  DiscreteImmersion imm;
  imm.intrinsic_dim = 1;
  imm.closed = true;
  imm.vertices.resize(vertices, 2);
  imm.elements.resize(vertices, 2);
  for (int i = 0; i < vertices; ++i) {
    const double th = 2.0 * std::numbers::pi * i / vertices;
    imm.vertices(i, 0) = radius * std::cos(th);
    imm.vertices(i, 1) = radius * std::sin(th);
    imm.elements(i, 0) = i;
    imm.elements(i, 1) = (i + 1) % vertices;
  }
  return imm;
}

DiscreteImmersion clifford_torus(int steps, double a, double b) {
  if (steps < 3) throw InvalidArgument("torus grid needs >= 3 steps");
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("torus radii must be > 0");
  DiscreteImmersion imm;
  imm.intrinsic_dim = 2;
  imm.closed = true;
  imm.vertices.resize(steps * steps, 4);
  imm.elements.resize(2 * steps * steps, 3);
  auto id = [steps](int i, int j) { return ((i + steps) % steps) * steps + (j + steps) % steps; };
  for (int i = 0; i < steps; ++i) {
    const double u = 2.0 * std::numbers::pi * i / steps;
    for (int j = 0; j < steps; ++j) {
      const double v = 2.0 * std::numbers::pi * j / steps;
      imm.vertices.row(id(i, j)) << a * std::cos(u), a * std::sin(u), b * std::cos(v), b * std::sin(v);
      const int e = 2 * id(i, j);
      imm.elements.row(e) << id(i, j), id(i + 1, j), id(i + 1, j + 1);
      imm.elements.row(e + 1) << id(i, j), id(i + 1, j + 1), id(i, j + 1);
    }
  }
  return imm;
}

DiscreteImmersion ellipsoid(int subdiv, double ax, double ay, double az) {
  if (!(ax > 0.0) || !(ay > 0.0) || !(az > 0.0)) throw InvalidArgument("semi-axes must be > 0");
  DiscreteImmersion imm = icosphere(subdiv, 1.0);
  imm.vertices.col(0) *= ax;
  imm.vertices.col(1) *= ay;
  imm.vertices.col(2) *= az;
  return imm;
}

DiscreteImmersion planar_grid(int steps, double h) {
  if (steps < 1) throw InvalidArgument("grid needs >= 1 step");
  DiscreteImmersion imm;
  imm.intrinsic_dim = 2;
  imm.closed = false;
  const int side = steps + 1;
  imm.vertices.resize(side * side, 3);
  imm.elements.resize(2 * steps * steps, 3);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) imm.vertices.row(i * side + j) << h * i, h * j, 0.0;
  int e = 0;
  for (int i = 0; i < steps; ++i)
    for (int j = 0; j < steps; ++j) {
      const int v00 = i * side + j;
      const int v10 = (i + 1) * side + j;
      imm.elements.row(e++) << v00, v10, v10 + 1;
      imm.elements.row(e++) << v00, v10 + 1, v00 + 1;
    }
  return imm;
}

DiscreteImmersion embed(const DiscreteImmersion& imm, int ambient_dim, const Mat& frame) {
  const int D0 = imm.ambient_dim();
  if (ambient_dim < D0) throw InvalidArgument("cannot embed into a smaller ambient space");
  DiscreteImmersion out = imm;
  if (frame.size() == 0) {
    out.vertices = Mat::Zero(imm.num_vertices(), ambient_dim);
    out.vertices.leftCols(D0) = imm.vertices;
    return out;
  }
  if (frame.rows() != ambient_dim || frame.cols() != D0) {
    throw InvalidArgument("embedding frame must be ambient_dim x current dim");
  }
  if (!(frame.transpose() * frame).isApprox(Mat::Identity(D0, D0), 1e-12)) {
    throw InvalidArgument("embedding frame columns must be orthonormal");
  }
  out.vertices = imm.vertices * frame.transpose();
  return out;
}

DiscreteImmersion transform(const DiscreteImmersion& imm, const Mat& rotation, const Vec& shift) {
  DiscreteImmersion out = imm;
  out.vertices = (imm.vertices * rotation.transpose()).rowwise() + shift.transpose();
  return out;
}

DiscreteImmersion scaled(const DiscreteImmersion& imm, double lambda) {
  DiscreteImmersion out = imm;
  out.vertices *= lambda;
  return out;
}

}  // namespace mcflow
