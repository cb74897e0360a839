#include "mcflow/flow.hpp"

#include "mcflow/error.hpp"
#include "mcflow/parallel.hpp"
#include "mcflow/quadrature.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mcflow {

const char* to_string(Scheme s) { return s == Scheme::explicit_euler ? "explicit" : "semi_implicit"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "explicit") return Scheme::explicit_euler;
  if (s == "semi_implicit") return Scheme::semi_implicit;
  throw InvalidArgument("unknown scheme '" + s + "' (expected explicit or semi_implicit)");
}

void validate(const SchemeConfig& cfg) {
  if (!(cfg.cfl > 0.0)) throw InvalidArgument("cfl must be > 0");
  if (cfg.scheme == Scheme::explicit_euler && cfg.cfl > 0.5) throw InvalidArgument("explicit scheme needs cfl <= 0.5");
  if (!(cfg.dt_max > 0.0)) throw InvalidArgument("dt_max must be > 0");
  if (cfg.redistribute_every < 0) throw InvalidArgument("redistribute_every must be >= 0");
  if (cfg.ring < 1) throw InvalidArgument("ring must be >= 1");
  if (!(cfg.explicit_mesh_factor > 0.0)) throw InvalidArgument("explicit_mesh_factor must be > 0");
  if (cfg.max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
  const auto& s = cfg.stop;
  if (!s.t_end && !s.maxA2 && !s.step_cap) throw InvalidArgument("no stop condition given");
  if (s.t_end && !(*s.t_end > 0.0)) throw InvalidArgument("stop.t_end must be > 0");
  if (s.maxA2 && !(*s.maxA2 > 0.0)) throw InvalidArgument("stop.maxA2 must be > 0");
  if (s.step_cap && *s.step_cap < 1) throw InvalidArgument("stop.step_cap must be >= 1");
}

namespace {

double cot_at(const Eigen::RowVectorXd& apex, const Eigen::RowVectorXd& p, const Eigen::RowVectorXd& q) {
  const Eigen::RowVectorXd a = p - apex;
  const Eigen::RowVectorXd b = q - apex;
  const double dot = a.dot(b);
  const double cross2 = a.squaredNorm() * b.squaredNorm() - dot * dot;
  if (!(cross2 > 0.0)) throw SolverFailure("zero-area triangle in Laplace assembly");
  return dot / std::sqrt(cross2);
}

void check_elements(const DiscreteImmersion& imm) {
  const auto m = element_measures(imm);
  double mean = 0.0;
  for (double x : m) mean += x;
  mean /= static_cast<double>(m.size());
  for (size_t e = 0; e < m.size(); ++e) {
    if (!(m[e] > kDegenerateTol * mean)) {
      throw StepRejected("element " + std::to_string(e) + " collapsed (measure " + std::to_string(m[e]) + ")");
    }
  }
}

double min_edge_length(const DiscreteImmersion& imm) {
  double h = std::numeric_limits<double>::infinity();
  const int k = static_cast<int>(imm.elements.cols());
  for (Index e = 0; e < imm.num_elements(); ++e) {
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        h = std::min(h, (imm.vertices.row(imm.elements(e, a)) - imm.vertices.row(imm.elements(e, b))).norm());
      }
    }
  }
  return h;
}

}  // namespace

LaplaceSystem assemble_laplace(const DiscreteImmersion& imm) {
  const Index N = imm.num_vertices();
  std::vector<Eigen::Triplet<double>> trip;
  LaplaceSystem sys;
  sys.mass = Vec::Zero(N);
  auto add_edge = [&trip](int i, int j, double w) {
    trip.emplace_back(i, j, -w);
    trip.emplace_back(j, i, -w);
    trip.emplace_back(i, i, w);
    trip.emplace_back(j, j, w);
  };
  if (imm.intrinsic_dim == 1) {
    for (Index e = 0; e < imm.num_elements(); ++e) {
      const int i = imm.elements(e, 0);
      const int j = imm.elements(e, 1);
      const double len = (imm.vertices.row(i) - imm.vertices.row(j)).norm();
      if (!(len > 0.0)) throw SolverFailure("zero-length segment in Laplace assembly");
      add_edge(i, j, 1.0 / len);
      sys.mass(i) += 0.5 * len;
      sys.mass(j) += 0.5 * len;
    }
  } else if (imm.intrinsic_dim == 2) {
    const auto area = element_measures(imm);
    for (Index e = 0; e < imm.num_elements(); ++e) {
      const int v[3] = {imm.elements(e, 0), imm.elements(e, 1), imm.elements(e, 2)};
      for (int c = 0; c < 3; ++c) {
        const int i = v[(c + 1) % 3];
        const int j = v[(c + 2) % 3];
        add_edge(i, j, 0.5 * cot_at(imm.vertices.row(v[c]), imm.vertices.row(i), imm.vertices.row(j)));
        sys.mass(v[c]) += area[static_cast<size_t>(e)] / 3.0;
      }
    }
  } else {
    throw UnsupportedDimension("Laplace assembly needs n in {1, 2}");
  }
  sys.stiffness.resize(N, N);
  sys.stiffness.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

Mat laplace_mean_curvature(const DiscreteImmersion& imm) {
  const auto sys = assemble_laplace(imm);
  Mat KX = sys.stiffness * imm.vertices;
  for (Index i = 0; i < KX.rows(); ++i) KX.row(i) /= -sys.mass(i);
  return KX;
}

double mean_curvature_discrepancy(const DiscreteImmersion& imm, const FundamentalForms& forms) {
  const Mat lb = laplace_mean_curvature(imm);
  const Mat jet = forms.mean_curvature();
  std::vector<double> rel;
  rel.reserve(static_cast<size_t>(jet.rows()));
  for (Index i = 0; i < jet.rows(); ++i) {
    const double h = jet.row(i).norm();
    if (h > 0.0) rel.push_back((jet.row(i) - lb.row(i)).norm() / h);
  }
  if (rel.empty()) return 0.0;
  const auto mid = rel.begin() + static_cast<std::ptrdiff_t>(rel.size() / 2);
  std::nth_element(rel.begin(), mid, rel.end());
  return *mid;
}

double admissible_dt(const SchemeConfig& cfg, const DiscreteImmersion& imm, double a2_max) {
  double dt = cfg.dt_max;
  if (a2_max > 0.0) dt = std::min(dt, cfg.cfl / a2_max);
  if (cfg.scheme == Scheme::explicit_euler) {
    const double h = min_edge_length(imm);
    dt = std::min(dt, cfg.explicit_mesh_factor * h * h);
  }
  return dt;
}

FlowState step_explicit(const FlowState& state, double dt, int ring) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  const auto forms = compute_forms(state.immersion, ring);
  FlowState next = state;
  next.immersion.vertices += dt * forms.mean_curvature();
  check_elements(next.immersion);
  next.t += dt;
  next.step_index += 1;
  next.last_dt = dt;
  return next;
}

FlowState step_semi_implicit(const FlowState& state, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  const auto sys = assemble_laplace(state.immersion);
  Eigen::SparseMatrix<double> lhs = dt * sys.stiffness;
  for (Index i = 0; i < sys.mass.size(); ++i) lhs.coeffRef(i, i) += sys.mass(i);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lhs);
  if (solver.info() != Eigen::Success) throw SolverFailure("factorization of M + dt K failed");
  if ((solver.vectorD().array() <= 0.0).any()) throw SolverFailure("M + dt K is not positive definite");
  const Mat rhs = sys.mass.asDiagonal() * state.immersion.vertices;
  Mat X = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !X.allFinite()) throw SolverFailure("linear solve failed");
  FlowState next = state;
  next.immersion.vertices = std::move(X);
  check_elements(next.immersion);
  next.t += dt;
  next.step_index += 1;
  next.last_dt = dt;
  return next;
}

FlowState step_semi_implicit_extrapolated(const FlowState& state, double dt) {
  const FlowState full = step_semi_implicit(state, dt);
  const FlowState half = step_semi_implicit(step_semi_implicit(state, 0.5 * dt), 0.5 * dt);
  FlowState next = full;
  next.immersion.vertices = 2.0 * half.immersion.vertices - full.immersion.vertices;
  check_elements(next.immersion);
  return next;
}

namespace {

// Periodic cubic spline through the curve's vertices with chord-length knots.
struct PeriodicSpline {
  Vec knots;  // N + 1 cumulative chord lengths
  Mat points; // N rows
  Mat second; // second derivatives at the knots

  explicit PeriodicSpline(const DiscreteImmersion& curve) {
    const Index N = curve.num_vertices();
    if (curve.intrinsic_dim != 1 || !curve.closed || N < 3) {
      throw InvalidArgument("spline needs a closed curve with >= 3 vertices");
    }
    // cycle order from the segment list
    std::vector<int> next(static_cast<size_t>(N), -1);
    for (Index e = 0; e < curve.num_elements(); ++e) next[static_cast<size_t>(curve.elements(e, 0))] = curve.elements(e, 1);
    points.resize(N, curve.ambient_dim());
    int v = 0;
    for (Index i = 0; i < N; ++i) {
      if (v < 0) throw InvalidArgument("curve is not a single cycle");
      points.row(i) = curve.vertices.row(v);
      v = next[static_cast<size_t>(v)];
    }
    if (v != 0) throw InvalidArgument("curve is not a single cycle");
    knots = Vec::Zero(N + 1);
    Vec h(N);
    for (Index i = 0; i < N; ++i) {
      h(i) = (points.row((i + 1) % N) - points.row(i)).norm();
      knots(i + 1) = knots(i) + h(i);
    }
    // h_{i-1} M_{i-1} + 2(h_{i-1} + h_i) M_i + h_i M_{i+1} = 6 (d_i - d_{i-1})
    std::vector<Eigen::Triplet<double>> trip;
    Mat rhs(N, points.cols());
    for (Index i = 0; i < N; ++i) {
      const Index prev = (i + N - 1) % N;
      trip.emplace_back(i, prev, h(prev));
      trip.emplace_back(i, i, 2.0 * (h(prev) + h(i)));
      trip.emplace_back(i, (i + 1) % N, h(i));
      rhs.row(i) = 6.0 * ((points.row((i + 1) % N) - points.row(i)) / h(i) -
                          (points.row(i) - points.row(prev)) / h(prev));
    }
    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    second = lu.solve(rhs);
  }

  Index segments() const { return points.rows(); }
  double total() const { return knots(segments()); }

  Eigen::RowVectorXd derivative(Index i, double s) const {
    const Index N = segments();
    const double h = knots(i + 1) - knots(i);
    const double a = (knots(i + 1) - s) / h;
    const double b = (s - knots(i)) / h;
    const auto& P0 = points.row(i);
    const auto& P1 = points.row((i + 1) % N);
    const auto& M0 = second.row(i);
    const auto& M1 = second.row((i + 1) % N);
    return (P1 - P0) / h + h / 6.0 * ((1.0 - 3.0 * a * a) * M0 + (3.0 * b * b - 1.0) * M1);
  }

  Eigen::RowVectorXd value(Index i, double s) const {
    const Index N = segments();
    const double h = knots(i + 1) - knots(i);
    const double a = (knots(i + 1) - s) / h;
    const double b = (s - knots(i)) / h;
    return a * points.row(i) + b * points.row((i + 1) % N) +
           h * h / 6.0 * ((a * a * a - a) * second.row(i) + (b * b * b - b) * second.row((i + 1) % N));
  }

  double arc(Index i, double from, double to, const GaussLegendre& rule) const {
    return rule.integrate([&](double s) { return derivative(i, s).norm(); }, from, to);
  }
};

const GaussLegendre& arc_rule() {
  static const GaussLegendre rule(16);
  return rule;
}

}  // namespace

double spline_length(const DiscreteImmersion& curve) {
  const PeriodicSpline sp(curve);
  double L = 0.0;
  for (Index i = 0; i < sp.segments(); ++i) L += sp.arc(i, sp.knots(i), sp.knots(i + 1), arc_rule());
  return L;
}

DiscreteImmersion redistribute(const DiscreteImmersion& curve) {
  const PeriodicSpline sp(curve);
  const Index N = sp.segments();
  const auto& rule = arc_rule();
  Vec cum = Vec::Zero(N + 1);
  for (Index i = 0; i < N; ++i) cum(i + 1) = cum(i) + sp.arc(i, sp.knots(i), sp.knots(i + 1), rule);
  const double L = cum(N);

  DiscreteImmersion out;
  out.intrinsic_dim = 1;
  out.closed = true;
  out.vertices.resize(N, curve.ambient_dim());
  out.elements.resize(N, 2);
  Index seg = 0;
  for (Index k = 0; k < N; ++k) {
    const double target = L * static_cast<double>(k) / static_cast<double>(N);
    while (seg + 1 < N && cum(seg + 1) <= target) ++seg;
    const double want = target - cum(seg);
    double lo = sp.knots(seg);
    double hi = sp.knots(seg + 1);
    double s = lo + (hi - lo) * want / (cum(seg + 1) - cum(seg));
    // Newton on the arc length inside the segment, bracketed
    for (int it = 0; it < 50; ++it) {
      const double f = sp.arc(seg, sp.knots(seg), s, rule) - want;
      if (std::abs(f) <= 1e-15 * L) break;
      if (f > 0.0) hi = s; else lo = s;
      const double speed = sp.derivative(seg, s).norm();
      double ns = s - f / speed;
      if (!(ns > lo && ns < hi)) ns = 0.5 * (lo + hi);
      s = ns;
    }
    out.vertices.row(k) = want == 0.0 ? sp.points.row(seg) : sp.value(seg, s);
    out.elements(k, 0) = static_cast<int>(k);
    out.elements(k, 1) = static_cast<int>((k + 1) % N);
  }
  return out;
}

namespace {

std::vector<double> spacetime_alphas(int n, const MonitorSet& monitors) {
  std::vector<double> alphas = monitors.alphas;
  if (std::find(alphas.begin(), alphas.end(), n + 2.0) == alphas.end()) alphas.push_back(n + 2.0);
  std::sort(alphas.begin(), alphas.end());
  return alphas;
}

struct Accumulators {
  std::vector<SpacetimeAccumulator> st;

  Accumulators(const std::vector<double>& alphas, const CurvatureField& field) {
    for (double a : alphas) st.push_back(start_spacetime(a, field));
  }
  void update(const CurvatureField& field, double dt) {
    for (auto& acc : st) acc = update_spacetime(acc, field, dt);
  }
};

TraceRecord make_record(long step, double t, double dt, const CurvatureField& field, const Accumulators& acc,
                        const MonitorSet& monitors, const std::string& scheme) {
  TraceRecord r;
  r.step = step;
  r.t = t;
  r.dt = dt;
  r.vol = field.volume();
  r.h2_max = *std::max_element(field.h2.begin(), field.h2.end());
  r.h2_min = *std::min_element(field.h2.begin(), field.h2.end());
  r.a2_max = *std::max_element(field.a2.begin(), field.a2.end());
  r.aring2_max = *std::max_element(field.aring2.begin(), field.aring2.end());
  r.pinch_ratio = 0.0;
  for (size_t i = 0; i < field.h2.size(); ++i) {
    if (field.h2[i] > 0.0) r.pinch_ratio = std::max(r.pinch_ratio, field.aring2[i] / field.h2[i]);
  }
  r.h2_integral = h_power_integral(field, 2.0);
  std::vector<double> aring(field.aring2.size());
  for (size_t i = 0; i < aring.size(); ++i) aring[i] = std::sqrt(field.aring2[i]);
  for (double p : monitors.p_norms) r.aring_p_norms.emplace_back(p, lp_norm(aring, p, field.weights));
  for (const auto& a : acc.st) r.st_integral.emplace_back(a.alpha, a.value);
  r.scheme = scheme;
  return r;
}

void fill_mesh_fields(TraceRecord& r, const DiscreteImmersion& imm, const FundamentalForms& forms,
                      const CurvatureField& field, const MonitorSet& monitors) {
  r.centroid = weighted_centroid(imm, field.weights);
  const auto h2 = forms.h2();
  const auto imax = std::max_element(h2.begin(), h2.end()) - h2.begin();
  r.max_h_point = imm.vertex(imax);
  if (monitors.lb_diagnostic) r.lb_discrepancy = mean_curvature_discrepancy(imm, forms);
}

bool reached(const StopCondition& stop, const TraceRecord& r, double t_tol) {
  if (stop.t_end && r.t >= *stop.t_end - t_tol) return true;
  if (stop.maxA2 && r.a2_max >= *stop.maxA2) return true;
  if (stop.step_cap && r.step >= *stop.step_cap) return true;
  return false;
}

std::string reason(const StopCondition& stop, const TraceRecord& r, double t_tol) {
  if (stop.maxA2 && r.a2_max >= *stop.maxA2) return "maxA2";
  if (stop.t_end && r.t >= *stop.t_end - t_tol) return "t_end";
  return "step_cap";
}

}  // namespace

FlowTrace run_until(FlowState& state, const SchemeConfig& cfg, const MonitorSet& monitors,
                    const StepObserver& observer) {
  validate(cfg);
  validate(state.immersion);
  const int n = state.immersion.intrinsic_dim;
  if (cfg.scheme == Scheme::semi_implicit && n > 2) throw UnsupportedDimension("mesh flow needs n in {1, 2}");
  const std::string scheme = to_string(cfg.scheme);
  const auto alphas = spacetime_alphas(n, monitors);
  const double t_tol = 1e-12 * std::max(1.0, cfg.stop.t_end.value_or(1.0));

  FlowTrace trace;
  trace.intrinsic_dim = n;
  trace.ambient_dim = state.immersion.ambient_dim();

  auto forms = compute_forms(state.immersion, cfg.ring);
  auto field = curvature_field(state.immersion, forms);
  Accumulators acc(alphas, field);
  auto record = make_record(state.step_index, state.t, 0.0, field, acc, monitors, scheme);
  fill_mesh_fields(record, state.immersion, forms, field, monitors);
  trace.records.push_back(record);
  if (observer) observer(state, forms, record);

  for (long k = 0;; ++k) {
    if (reached(cfg.stop, trace.records.back(), t_tol)) {
      trace.stop_reason = reason(cfg.stop, trace.records.back(), t_tol);
      break;
    }
    if (k >= cfg.max_steps) throw MaxStepsExceeded("no stop condition after " + std::to_string(k) + " steps");

    double dt = admissible_dt(cfg, state.immersion, trace.records.back().a2_max);
    if (cfg.stop.t_end) dt = std::min(dt, *cfg.stop.t_end - state.t);

    FlowState next;
    try {
      if (cfg.scheme == Scheme::explicit_euler) {
        next = step_explicit(state, dt, cfg.ring);
      } else {
        next = cfg.extrapolate ? step_semi_implicit_extrapolated(state, dt) : step_semi_implicit(state, dt);
      }
      if (n == 1 && cfg.redistribute_every > 0 && next.step_index % cfg.redistribute_every == 0) {
        next.immersion = redistribute(next.immersion);
      }
      forms = compute_forms(next.immersion, cfg.ring);
    } catch (const StepRejected&) {
      trace.stop_reason = "singularity";
      break;
    }
    state = std::move(next);
    field = curvature_field(state.immersion, forms);
    acc.update(field, dt);
    record = make_record(state.step_index, state.t, dt, field, acc, monitors, scheme);
    fill_mesh_fields(record, state.immersion, forms, field, monitors);
    trace.records.push_back(record);
    if (observer) observer(state, forms, record);
  }
  return trace;
}

namespace {

template <class Scene>
FlowTrace run_closed_form(const Scene& scene, int n, int ambient, const Vec& center, const SchemeConfig& cfg,
                          const MonitorSet& monitors) {
  validate(cfg);
  const auto alphas = spacetime_alphas(n, monitors);
  const double T = scene.singular_time();
  const double t_tol = 1e-12 * std::max(1.0, cfg.stop.t_end.value_or(1.0));
  if (cfg.stop.t_end && *cfg.stop.t_end >= T) throw PastSingularity("t_end is at or past the singular time");
  const std::string scheme = "analytic";

  FlowTrace trace;
  trace.intrinsic_dim = n;
  trace.ambient_dim = ambient;
  double t = 0.0;
  auto field = curvature_field(scene, t);
  Accumulators acc(alphas, field);
  auto push = [&](long step, double dt) {
    auto r = make_record(step, t, dt, field, acc, monitors, scheme);
    r.centroid = center;
    r.max_h_point = center;
    trace.records.push_back(r);
  };
  push(0, 0.0);
  for (long k = 0;; ++k) {
    if (reached(cfg.stop, trace.records.back(), t_tol)) {
      trace.stop_reason = reason(cfg.stop, trace.records.back(), t_tol);
      break;
    }
    if (k >= cfg.max_steps) throw MaxStepsExceeded("no stop condition after " + std::to_string(k) + " steps");
    double dt = std::min(cfg.dt_max, cfg.cfl / trace.records.back().a2_max);
    if (cfg.stop.t_end) dt = std::min(dt, *cfg.stop.t_end - t);
    t += dt;
    field = curvature_field(scene, t);
    acc.update(field, dt);
    push(k + 1, dt);
  }
  return trace;
}

}  // namespace

FlowTrace run_analytic(const analytic::SphereScene& scene, const SchemeConfig& cfg, const MonitorSet& monitors) {
  const int D = scene.n + scene.d;
  const Vec center = scene.center.size() == D ? scene.center : Vec::Zero(D);
  return run_closed_form(scene, scene.n, D, center, cfg, monitors);
}

FlowTrace run_analytic(const analytic::SphereProductScene& scene, const SchemeConfig& cfg,
                       const MonitorSet& monitors) {
  return run_closed_form(scene, scene.n(), scene.ambient_dim(), Vec::Zero(scene.ambient_dim()), cfg, monitors);
}

}  // namespace mcflow
