#pragma once

// Parabolic rescaling about a blow-up point and quantitative distance to the
// round unit sphere.

#include "mcflow/flow.hpp"
#include "mcflow/geometry.hpp"
#include "mcflow/trace.hpp"

#include <vector>

namespace mcflow {

struct CenterEstimate {
  Vec center;                 // latest centroid
  double drift = 0.0;         // max distance of the last 10 centroids from the latest
  double max_h_offset = 0.0;  // distance from the latest max-|H| vertex
};

/// From a sequence of area-weighted centroids (oldest first).
CenterEstimate estimate_center(const std::vector<Vec>& centroids, const Vec& max_h_point = Vec());
CenterEstimate estimate_center(const FlowTrace& trace);

struct RescaledState {
  DiscreteImmersion immersion;
  double lambda = 0.0;  // sqrt(2 n (T_hat - t))
  Vec center;
  double source_t = 0.0;
};

/// X -> (X - center) / lambda. Throws PastSingularity for t >= T_hat.
RescaledState parabolic_rescale(const FlowState& state, const Vec& center, double T_hat);

struct Roundness {
  double pinch_ratio = 0.0;  // max |Å|^2 / |H|^2
  double radial_cv = 0.0;    // std / mean of |X - center|
  double hausdorff_to_unit_sphere = 0.0;
};

/// Throws ZeroMeanCurvature when some vertex has |H| = 0.
Roundness roundness_metrics(const DiscreteImmersion& imm, const FundamentalForms& forms, const Vec& center);
/// On a rescaled state, center at the origin.
Roundness roundness_metrics(const RescaledState& state, int ring = kDefaultRing);

struct SubspaceFit {
  int dim = 0;
  double residual = 0.0;  // first discarded singular value over the largest (0 if none)
  Mat basis;              // D x dim principal directions
};

/// PCA of the centered vertices; dim counts singular values above tol * largest.
SubspaceFit subspace_dimension(const DiscreteImmersion& imm, double tol);

}  // namespace mcflow
