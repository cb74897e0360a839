#pragma once

// Discrete immersions of closed curves and surfaces in R^{n+d}, and estimation
// of the extrinsic curvature quantities: frames, second fundamental form,
// tracefree part, first covariant derivative and structural-equation residuals.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace mcflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Element measures below this fraction of the mean count as collapsed.
inline constexpr double kDegenerateTol = 1e-8;
/// Largest admissible condition number of a local least-squares normal matrix.
inline constexpr double kMaxFitCondition = 1e12;
inline constexpr int kDefaultRing = 2;
/// Derivatives of A need one more ring than A itself for a stable slope.
inline constexpr int kDerivativeRing = 3;

/// Simplicial immersion: polyline (n = 1) or triangle mesh (n = 2).
/// `vertices` holds one point of R^{n+d} per row; `elements` holds n+1 vertex
/// indices per row (segments or oriented triangles).
struct DiscreteImmersion {
  int intrinsic_dim = 2;
  Mat vertices;
  Eigen::MatrixXi elements;
  bool closed = true;

  int ambient_dim() const { return static_cast<int>(vertices.cols()); }
  int codim() const { return ambient_dim() - intrinsic_dim; }
  Index num_vertices() const { return vertices.rows(); }
  Index num_elements() const { return elements.rows(); }
  Vec vertex(Index i) const { return vertices.row(i).transpose(); }
};

/// Throws InvalidImmersion (connectivity) or DegenerateElement (collapse).
void validate(const DiscreteImmersion& imm, double degenerate_tol = kDegenerateTol);

/// Length (n = 1) or area (n = 2) of every element.
std::vector<double> element_measures(const DiscreteImmersion& imm);

/// Sorted 1-ring vertex adjacency.
std::vector<std::vector<int>> vertex_adjacency(const DiscreteImmersion& imm);

/// Vertices within `ring` edge hops of `center`, excluding `center`, in BFS order.
std::vector<int> ring_neighborhood(const std::vector<std::vector<int>>& adjacency, int center,
                                   int ring);

/// True for vertices on an edge with a single incident triangle (or open polyline ends).
std::vector<bool> boundary_vertices(const DiscreteImmersion& imm);

/// Orthonormal frame at one vertex: tangent (D x n) and normal (D x d) columns.
struct VertexFrame {
  Mat tangent;
  Mat normal;
};

struct FrameField {
  int intrinsic_dim = 0;
  int ambient_dim = 0;
  int ring = kDefaultRing;
  std::vector<VertexFrame> at;
};

/// Second fundamental form at one vertex, expressed in that vertex's frame.
struct VertexForms {
  std::vector<Mat> h;      // one symmetric n x n block per normal direction
  std::vector<Mat> aring;  // tracefree part of each block
  Vec mean_curvature;      // ambient vector H = sum_alpha tr(h^alpha) e_alpha
  double a2 = 0.0;
  double h2 = 0.0;
  double aring2 = 0.0;
};

struct FundamentalForms {
  int intrinsic_dim = 0;
  FrameField frames;
  std::vector<VertexForms> at;

  std::vector<double> a2() const;
  std::vector<double> h2() const;
  std::vector<double> aring2() const;
  /// Mean curvature vectors, one row per vertex.
  Mat mean_curvature() const;
};

/// First covariant derivative of A at one vertex. `h` is indexed
/// [((alpha * n + i) * n + j) * n + k] for h^alpha_ijk.
struct VertexDerivative {
  std::vector<double> h;
  double grad_a2 = 0.0;
  double grad_h2 = 0.0;
  double grad_aring2 = 0.0;
};

struct DerivativeData {
  int intrinsic_dim = 0;
  int codim = 0;
  std::vector<VertexDerivative> at;

  double component(Index vertex, int alpha, int i, int j, int k) const {
    const int n = intrinsic_dim;
    return at[static_cast<size_t>(vertex)].h[static_cast<size_t>(((alpha * n + i) * n + j) * n + k)];
  }
};

/// PCA tangent planes of the ring neighborhoods, tilted onto the tangent plane
/// of a local quadratic jet where the neighborhood supports one.
FrameField build_frames(const DiscreteImmersion& imm, int ring = kDefaultRing);

/// Least-squares jet w^alpha = b^alpha.u + (1/2) u^T h^alpha u in each frame, with
/// cubic terms added whenever the neighborhood overdetermines them.
FundamentalForms second_fundamental_form(const DiscreteImmersion& imm, const FrameField& frames,
                                         int ring = kDefaultRing);

/// Convenience: build_frames followed by second_fundamental_form.
FundamentalForms compute_forms(const DiscreteImmersion& imm, int ring = kDefaultRing);

/// Fills aring, aring2 from h; recomputes a2, h2 and the mean curvature vector.
FundamentalForms tracefree_decompose(FundamentalForms forms);

/// Covariant derivative by transporting neighbor forms with the smallest rotation
/// between tangent planes and fitting a linear model in tangent coordinates.
DerivativeData covariant_derivative(const DiscreteImmersion& imm, const FundamentalForms& forms,
                                    int ring = kDerivativeRing);

/// Barycentric lumped measure; sums to total length or area.
std::vector<double> measure_weights(const DiscreteImmersion& imm);

/// Angle defect over barycentric area, pooled over the ring-`ring` patch of each
/// vertex (ring 0 is the single-vertex ratio). The pooled ratio converges
/// pointwise also at irregular (valence != 6) vertices. Zero on the boundary
/// and identically zero for n = 1.
std::vector<double> intrinsic_curvature(const DiscreteImmersion& imm, int ring = kDefaultRing);

/// Discrete intrinsic sectional curvature minus sum_alpha det(h^alpha).
std::vector<double> gauss_residual(const DiscreteImmersion& imm, const FundamentalForms& forms,
                                   int ring = kDefaultRing);

/// max over alpha, i, j, k of |h^alpha_ijk - h^alpha_ikj|.
std::vector<double> codazzi_residual(const DerivativeData& deriv);

/// Area-weighted centroid.
Vec weighted_centroid(const DiscreteImmersion& imm, const std::vector<double>& weights);

/// Order-sensitive FNV-1a digest of the vertex coordinates and connectivity.
std::uint64_t digest(const DiscreteImmersion& imm);

}  // namespace mcflow
