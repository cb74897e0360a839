#include "mcflow/error.hpp"
#include "mcflow/geometry.hpp"
#include "mcflow/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace mcflow {

namespace {

// Fixes the gauge of a unit vector: first component that is not ~0 is positive.
void fix_sign(Eigen::Ref<Vec> v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-9) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

// Orthonormal completion: columns [0, n) span `tangent`, the rest its complement.
// `hint` supplies the order in which the complement is taken.
VertexFrame complete_frame(const Mat& tangent, const Mat& hint) {
  const Index D = tangent.rows();
  const Index n = tangent.cols();
  Mat seed(D, n + hint.cols());
  seed << tangent, hint;
  Eigen::HouseholderQR<Mat> qr(seed);
  Mat Q = qr.householderQ() * Mat::Identity(D, D);
  for (Index c = 0; c < D; ++c) fix_sign(Q.col(c));
  return {Q.leftCols(n), Q.rightCols(D - n)};
}

int quadratic_terms(int n) { return n * (n + 1) / 2; }
int cubic_terms(int n) { return n * (n + 1) * (n + 2) / 6; }

struct JetFit {
  Mat slope;               // d x n, b^alpha_i
  std::vector<Mat> hess;   // d blocks of n x n
};

// offsets: rows are neighbor positions relative to the center vertex.
JetFit fit_jet(const Mat& offsets, const VertexFrame& frame, int vertex) {
  const Index n = frame.tangent.cols();
  const Index d = frame.normal.cols();
  const Index m = offsets.rows();
  // Cubic terms keep h free of the O(h) bias that third-order shape
  // variation leaves in a purely quadratic fit; used when the neighborhood
  // overdetermines them.
  const Index quadratic = n + quadratic_terms(static_cast<int>(n));
  const bool cubic = m > quadratic + cubic_terms(static_cast<int>(n));
  const Index terms = quadratic + (cubic ? cubic_terms(static_cast<int>(n)) : 0);
  if (m < terms) {
    throw FitUnderdetermined("vertex " + std::to_string(vertex) + " has " + std::to_string(m) +
                             " neighbors, jet needs " + std::to_string(terms));
  }
  Mat u = offsets * frame.tangent;
  const Mat w = offsets * frame.normal;
  const double scale = u.rowwise().norm().maxCoeff();
  if (!(scale > 0.0)) throw FitIllConditioned("vertex " + std::to_string(vertex) + " has a collapsed neighborhood");
  u /= scale;

  Mat design(m, terms);
  for (Index r = 0; r < m; ++r) {
    Index col = 0;
    for (Index i = 0; i < n; ++i) design(r, col++) = u(r, i);
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j) design(r, col++) = (i == j ? 0.5 : 1.0) * u(r, i) * u(r, j);
    if (cubic)
      for (Index i = 0; i < n; ++i)
        for (Index j = i; j < n; ++j)
          for (Index k = j; k < n; ++k) design(r, col++) = u(r, i) * u(r, j) * u(r, k);
  }
  Eigen::SelfAdjointEigenSolver<Mat> normal(design.transpose() * design, Eigen::EigenvaluesOnly);
  const Vec& ev = normal.eigenvalues();  // ascending
  if (!(ev(0) > 0.0) || ev(terms - 1) / ev(0) > kMaxFitCondition) {
    throw FitIllConditioned("vertex " + std::to_string(vertex) + " normal-equation condition exceeds 1e12");
  }
  const Mat coef = design.householderQr().solve(w / scale);  // terms x d

  JetFit fit;
  fit.slope = coef.topRows(n).transpose();
  fit.hess.assign(static_cast<size_t>(d), Mat::Zero(n, n));
  for (Index a = 0; a < d; ++a) {
    Index row = n;
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j) {
        const double hij = coef(row++, a) / scale;
        fit.hess[static_cast<size_t>(a)](i, j) = hij;
        fit.hess[static_cast<size_t>(a)](j, i) = hij;
      }
  }
  return fit;
}

Mat neighborhood_offsets(const DiscreteImmersion& imm, int center, const std::vector<int>& nbrs) {
  Mat out(static_cast<Index>(nbrs.size()), imm.ambient_dim());
  for (size_t k = 0; k < nbrs.size(); ++k) {
    out.row(static_cast<Index>(k)) = imm.vertices.row(nbrs[k]) - imm.vertices.row(center);
  }
  return out;
}

// Smallest rotation of R^D taking the plane spanned by `from` onto that of `to`,
// acting as the identity on the orthogonal complement of the principal planes.
Mat minimal_rotation(const Mat& from, const Mat& to) {
  const Index D = from.rows();
  Mat R = Mat::Identity(D, D);
  Eigen::JacobiSVD<Mat> svd(to.transpose() * from, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat A = to * svd.matrixU();
  const Mat B = from * svd.matrixV();
  for (Index k = 0; k < A.cols(); ++k) {
    const double c = std::clamp(svd.singularValues()(k), -1.0, 1.0);
    Vec perp = B.col(k) - c * A.col(k);
    const double s = perp.norm();
    if (s < 1e-14) continue;
    perp /= s;
    const Vec a = A.col(k);
    R += (c - 1.0) * (a * a.transpose() + perp * perp.transpose()) +
         s * (a * perp.transpose() - perp * a.transpose());
  }
  return R;
}

}  // namespace

FrameField build_frames(const DiscreteImmersion& imm, int ring) {
  if (ring < 1) throw InvalidArgument("ring must be >= 1");
  const int n = imm.intrinsic_dim;
  const int D = imm.ambient_dim();
  const auto adjacency = vertex_adjacency(imm);

  FrameField field;
  field.intrinsic_dim = n;
  field.ambient_dim = D;
  field.ring = ring;
  field.at.resize(static_cast<size_t>(imm.num_vertices()));

  parallel_for(field.at.size(), [&](std::size_t v) {
    const int center = static_cast<int>(v);
    const auto nbrs = ring_neighborhood(adjacency, center, ring);
    if (static_cast<int>(nbrs.size()) + 1 < n + 1) {
      throw NeighborhoodRankDeficient("vertex " + std::to_string(center) + " has too few neighbors");
    }
    Mat cloud(static_cast<Index>(nbrs.size()) + 1, D);
    cloud.row(0) = imm.vertices.row(center);
    for (size_t k = 0; k < nbrs.size(); ++k) cloud.row(static_cast<Index>(k) + 1) = imm.vertices.row(nbrs[k]);
    const Mat centered = cloud.rowwise() - cloud.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Mat> eig(centered.transpose() * centered);
    const Vec& lambda = eig.eigenvalues();  // ascending
    const double top = lambda(D - 1);
    if (!(top > 0.0) || !(lambda(D - n) > 1e-12 * top)) {
      throw NeighborhoodRankDeficient("vertex " + std::to_string(center) +
                                      " neighborhood covariance has rank < n");
    }
    Mat principal(D, D);
    for (int c = 0; c < D; ++c) principal.col(c) = eig.eigenvectors().col(D - 1 - c);
    VertexFrame frame = complete_frame(principal.leftCols(n), principal.rightCols(D - n));

    if (static_cast<int>(nbrs.size()) >= n + quadratic_terms(n)) {
      try {
        const JetFit fit = fit_jet(neighborhood_offsets(imm, center, nbrs), frame, center);
        const Mat tilted = frame.tangent + frame.normal * fit.slope;
        frame = complete_frame(tilted, frame.normal);
      } catch (const FitIllConditioned&) {
        // PCA plane stands; the curvature fit reports the failure.
      }
    }
    field.at[v] = std::move(frame);
  });
  return field;
}

FundamentalForms second_fundamental_form(const DiscreteImmersion& imm, const FrameField& frames,
                                         int ring) {
  if (static_cast<Index>(frames.at.size()) != imm.num_vertices()) {
    throw InvalidArgument("frame field does not match the immersion");
  }
  const auto adjacency = vertex_adjacency(imm);
  FundamentalForms forms;
  forms.intrinsic_dim = imm.intrinsic_dim;
  forms.frames = frames;
  forms.at.resize(frames.at.size());
  parallel_for(forms.at.size(), [&](std::size_t v) {
    const int center = static_cast<int>(v);
    const auto nbrs = ring_neighborhood(adjacency, center, ring);
    const JetFit fit = fit_jet(neighborhood_offsets(imm, center, nbrs), frames.at[v], center);
    forms.at[v].h = fit.hess;
  });
  return tracefree_decompose(std::move(forms));
}

FundamentalForms compute_forms(const DiscreteImmersion& imm, int ring) {
  return second_fundamental_form(imm, build_frames(imm, ring), ring);
}

FundamentalForms tracefree_decompose(FundamentalForms forms) {
  const int n = forms.intrinsic_dim;
  for (size_t v = 0; v < forms.at.size(); ++v) {
    auto& f = forms.at[v];
    const auto& normal = forms.frames.at[v].normal;
    f.aring.resize(f.h.size());
    f.mean_curvature = Vec::Zero(normal.rows());
    f.a2 = f.h2 = f.aring2 = 0.0;
    for (size_t a = 0; a < f.h.size(); ++a) {
      const double tr = f.h[a].trace();
      f.aring[a] = f.h[a] - (tr / n) * Mat::Identity(n, n);
      f.mean_curvature += tr * normal.col(static_cast<Index>(a));
      f.a2 += f.h[a].squaredNorm();
      f.h2 += tr * tr;
      f.aring2 += f.aring[a].squaredNorm();
    }
  }
  return forms;
}

DerivativeData covariant_derivative(const DiscreteImmersion& imm, const FundamentalForms& forms,
                                    int ring) {
  const int n = imm.intrinsic_dim;
  const int d = imm.codim();
  const auto adjacency = vertex_adjacency(imm);
  DerivativeData out;
  out.intrinsic_dim = n;
  out.codim = d;
  out.at.resize(forms.at.size());
  const int components = d * n * n;

  parallel_for(out.at.size(), [&](std::size_t v) {
    const int center = static_cast<int>(v);
    const auto& fc = forms.frames.at[v];
    auto nbrs = ring_neighborhood(adjacency, center, ring);
    nbrs.insert(nbrs.begin(), center);
    const Index m = static_cast<Index>(nbrs.size());
    if (m < n + 1) throw FitUnderdetermined("vertex " + std::to_string(center) + " derivative fit");

    Mat u(m, n);
    Mat values(m, components);
    for (Index r = 0; r < m; ++r) {
      const int nb = nbrs[static_cast<size_t>(r)];
      const auto& fn = forms.frames.at[static_cast<size_t>(nb)];
      u.row(r) = (imm.vertices.row(nb) - imm.vertices.row(center)) * fc.tangent;
      const Mat R = minimal_rotation(fn.tangent, fc.tangent);
      const Mat P = fn.tangent.transpose() * R.transpose() * fc.tangent;  // n x n
      const Mat Q = fc.normal.transpose() * R * fn.normal;                // d x d
      for (int a = 0; a < d; ++a) {
        Mat block = Mat::Zero(n, n);
        for (int b = 0; b < d; ++b) {
          block += Q(a, b) * (P.transpose() * forms.at[static_cast<size_t>(nb)].h[static_cast<size_t>(b)] * P);
        }
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) values(r, (a * n + i) * n + j) = block(i, j);
      }
    }
    const double scale = u.rowwise().norm().maxCoeff();
    if (!(scale > 0.0)) throw FitIllConditioned("vertex " + std::to_string(center) + " derivative fit");
    // Quadratic terms keep the curvature of h out of the slope when the patch supports them.
    const Index quad = n * (n + 1) / 2;
    const bool with_quad = m >= 3 * (1 + n + quad);
    Mat design(m, 1 + n + (with_quad ? quad : 0));
    design.col(0).setOnes();
    design.middleCols(1, n) = u / scale;
    if (with_quad) {
      Index c = 1 + n;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) design.col(c++) = (u.col(i).array() * u.col(j).array()).matrix() / (scale * scale);
    }
    Eigen::JacobiSVD<Mat> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (!(smin > 0.0) || (s(0) / smin) * (s(0) / smin) > kMaxFitCondition) {
      throw FitIllConditioned("vertex " + std::to_string(center) + " derivative fit");
    }
    const Mat coef = svd.solve(values);  // (n+1) x components

    auto& dv = out.at[v];
    dv.h.assign(static_cast<size_t>(components * n), 0.0);
    for (int c = 0; c < components; ++c)
      for (int k = 0; k < n; ++k) dv.h[static_cast<size_t>(c * n + k)] = coef(1 + k, c) / scale;

    for (int a = 0; a < d; ++a) {
      for (int k = 0; k < n; ++k) {
        double trace_k = 0.0;
        for (int i = 0; i < n; ++i) trace_k += out.component(center, a, i, i, k);
        dv.grad_h2 += trace_k * trace_k;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const double hijk = out.component(center, a, i, j, k);
            const double tf = hijk - (i == j ? trace_k / n : 0.0);
            dv.grad_a2 += hijk * hijk;
            dv.grad_aring2 += tf * tf;
          }
      }
    }
  });
  return out;
}

}  // namespace mcflow
