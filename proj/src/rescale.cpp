#include "mcflow/rescale.hpp"

#include "mcflow/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace mcflow {

CenterEstimate estimate_center(const std::vector<Vec>& centroids, const Vec& max_h_point) {
  if (centroids.empty()) throw InvalidArgument("center estimate needs at least one centroid");
  CenterEstimate out;
  out.center = centroids.back();
  const size_t k = std::min<size_t>(10, centroids.size());
  for (size_t i = centroids.size() - k; i < centroids.size(); ++i) {
    out.drift = std::max(out.drift, (centroids[i] - out.center).norm());
  }
  if (max_h_point.size() == out.center.size()) out.max_h_offset = (max_h_point - out.center).norm();
  return out;
}

CenterEstimate estimate_center(const FlowTrace& trace) {
  std::vector<Vec> c;
  c.reserve(trace.records.size());
  for (const auto& r : trace.records) c.push_back(r.centroid);
  return estimate_center(c, trace.records.empty() ? Vec() : trace.records.back().max_h_point);
}

RescaledState parabolic_rescale(const FlowState& state, const Vec& center, double T_hat) {
  if (!(state.t < T_hat)) {
    throw PastSingularity("t = " + std::to_string(state.t) + " is not below T_hat = " + std::to_string(T_hat));
  }
  const int D = state.immersion.ambient_dim();
  if (center.size() != D) throw InvalidArgument("center has the wrong dimension");
  RescaledState out;
  out.lambda = std::sqrt(2.0 * state.immersion.intrinsic_dim * (T_hat - state.t));
  out.center = center;
  out.source_t = state.t;
  out.immersion = state.immersion;
  out.immersion.vertices = (state.immersion.vertices.rowwise() - center.transpose()) / out.lambda;
  return out;
}

Roundness roundness_metrics(const DiscreteImmersion& imm, const FundamentalForms& forms, const Vec& center) {
  const Index N = imm.num_vertices();
  const int n = imm.intrinsic_dim;
  const int D = imm.ambient_dim();
  Roundness r;
  const auto h2 = forms.h2();
  const auto aring2 = forms.aring2();
  for (Index i = 0; i < N; ++i) {
    if (!(h2[static_cast<size_t>(i)] > 0.0)) {
      throw ZeroMeanCurvature("|H| = 0 at vertex " + std::to_string(i));
    }
    r.pinch_ratio = std::max(r.pinch_ratio, aring2[static_cast<size_t>(i)] / h2[static_cast<size_t>(i)]);
  }
  const Mat X = imm.vertices.rowwise() - center.transpose();
  const Vec radius = X.rowwise().norm();
  const double mean = radius.mean();
  r.radial_cv = std::sqrt((radius.array() - mean).square().mean()) / mean;

  // unit sphere inside the top n+1 principal directions through the center
  Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeThinV);
  const int k = std::min(n + 1, D);
  const Mat P = svd.matrixV().leftCols(k);
  const Mat inside = X * P;
  double radial = 0.0;
  double outside = 0.0;
  for (Index i = 0; i < N; ++i) {
    radial = std::max(radial, std::abs(inside.row(i).norm() - 1.0));
    outside = std::max(outside, (X.row(i) - inside.row(i) * P.transpose()).norm());
  }
  r.hausdorff_to_unit_sphere = radial + outside;
  return r;
}

Roundness roundness_metrics(const RescaledState& state, int ring) {
  return roundness_metrics(state.immersion, compute_forms(state.immersion, ring),
                           Vec::Zero(state.immersion.ambient_dim()));
}

SubspaceFit subspace_dimension(const DiscreteImmersion& imm, double tol) {
  const int n = imm.intrinsic_dim;
  if (imm.num_vertices() < n + 2) throw InvalidArgument("subspace fit needs >= n + 2 vertices");
  if (!(tol > 0.0)) throw InvalidArgument("tol must be > 0");
  const Mat X = imm.vertices.rowwise() - imm.vertices.colwise().mean();
  Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  SubspaceFit out;
  const double top = s(0);
  while (out.dim < s.size() && s(out.dim) > tol * top) ++out.dim;
  out.residual = out.dim < s.size() && top > 0.0 ? s(out.dim) / top : 0.0;
  out.basis = svd.matrixV().leftCols(out.dim);
  return out;
}

}  // namespace mcflow
