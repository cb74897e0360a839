#pragma once

#include "mcflow/geometry.hpp"

namespace mcflow {

/// Icosahedron refined `subdiv` times by edge midpoints, projected to the sphere.
/// 10 * 4^subdiv + 2 vertices.
DiscreteImmersion icosphere(int subdiv, double radius = 1.0);

/// Regular closed polygon inscribed in the circle of the given radius in R^2.
DiscreteImmersion polygon_circle(int vertices, double radius = 1.0);

/// S^1(a) x S^1(b) in R^4 as an oriented steps x steps triangulated grid.
DiscreteImmersion clifford_torus(int steps, double a = 1.0, double b = 1.0);

/// Icosphere scaled by the semi-axes (ax, ay, az).
DiscreteImmersion ellipsoid(int subdiv, double ax, double ay, double az);

/// Open planar grid patch z = 0 in R^3 with spacing h.
DiscreteImmersion planar_grid(int steps, double h = 1.0);

/// Embeds into R^{ambient_dim} through the orthonormal columns of `frame`
/// (ambient_dim x current dim); identity-coordinate embedding when `frame` is empty.
DiscreteImmersion embed(const DiscreteImmersion& imm, int ambient_dim, const Mat& frame = Mat());

/// x -> Q x + shift for every vertex.
DiscreteImmersion transform(const DiscreteImmersion& imm, const Mat& rotation, const Vec& shift);

/// x -> lambda x.
DiscreteImmersion scaled(const DiscreteImmersion& imm, double lambda);

}  // namespace mcflow
