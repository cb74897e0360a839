#include "mcflow/geometry.hpp"

#include "mcflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numbers>
#include <string>
#include <utility>

namespace mcflow {

namespace {

double simplex_measure(const DiscreteImmersion& imm, Index e) {
  const auto& el = imm.elements;
  if (imm.intrinsic_dim == 1) {
    return (imm.vertices.row(el(e, 1)) - imm.vertices.row(el(e, 0))).norm();
  }
  const Vec a = (imm.vertices.row(el(e, 1)) - imm.vertices.row(el(e, 0))).transpose();
  const Vec b = (imm.vertices.row(el(e, 2)) - imm.vertices.row(el(e, 0))).transpose();
  const double aa = a.squaredNorm();
  const double bb = b.squaredNorm();
  const double ab = a.dot(b);
  return 0.5 * std::sqrt(std::max(0.0, aa * bb - ab * ab));
}

// Interior angle of triangle e at local corner c.
double corner_angle(const DiscreteImmersion& imm, Index e, int c) {
  const auto& el = imm.elements;
  const Vec p = imm.vertices.row(el(e, c)).transpose();
  const Vec a = imm.vertices.row(el(e, (c + 1) % 3)).transpose() - p;
  const Vec b = imm.vertices.row(el(e, (c + 2) % 3)).transpose() - p;
  const double cross = std::sqrt(std::max(0.0, a.squaredNorm() * b.squaredNorm() - a.dot(b) * a.dot(b)));
  return std::atan2(cross, a.dot(b));
}

}  // namespace

std::vector<double> element_measures(const DiscreteImmersion& imm) {
  std::vector<double> m(static_cast<size_t>(imm.num_elements()));
  for (Index e = 0; e < imm.num_elements(); ++e) m[static_cast<size_t>(e)] = simplex_measure(imm, e);
  return m;
}

void validate(const DiscreteImmersion& imm, double degenerate_tol) {
  const int n = imm.intrinsic_dim;
  if (n != 1 && n != 2) {
    throw InvalidImmersion("intrinsic dimension must be 1 or 2, got " + std::to_string(n));
  }
  if (imm.ambient_dim() < n + 1) {
    throw InvalidImmersion("ambient dimension must exceed the intrinsic dimension");
  }
  if (imm.elements.cols() != n + 1) {
    throw InvalidImmersion("elements must have n+1 vertex indices");
  }
  if (imm.num_elements() == 0) throw InvalidImmersion("no elements");
  if (!imm.vertices.allFinite()) throw InvalidImmersion("non-finite vertex coordinates");

  const Index nv = imm.num_vertices();
  std::vector<int> uses(static_cast<size_t>(nv), 0);
  for (Index e = 0; e < imm.num_elements(); ++e) {
    for (int c = 0; c <= n; ++c) {
      const int v = imm.elements(e, c);
      if (v < 0 || v >= nv) throw InvalidImmersion("element index out of range");
      ++uses[static_cast<size_t>(v)];
    }
  }
  for (Index v = 0; v < nv; ++v) {
    if (uses[static_cast<size_t>(v)] == 0) {
      throw InvalidImmersion("vertex " + std::to_string(v) + " is not referenced by any element");
    }
  }

  if (imm.closed) {
    if (n == 1) {
      std::vector<int> starts(static_cast<size_t>(nv), 0);
      std::vector<int> ends(static_cast<size_t>(nv), 0);
      for (Index e = 0; e < imm.num_elements(); ++e) {
        ++starts[static_cast<size_t>(imm.elements(e, 0))];
        ++ends[static_cast<size_t>(imm.elements(e, 1))];
      }
      for (Index v = 0; v < nv; ++v) {
        if (starts[static_cast<size_t>(v)] != 1 || ends[static_cast<size_t>(v)] != 1) {
          throw InvalidImmersion("closed polyline is not a union of oriented cycles at vertex " +
                                 std::to_string(v));
        }
      }
    } else {
      std::map<std::pair<int, int>, int> directed;
      for (Index e = 0; e < imm.num_elements(); ++e) {
        for (int c = 0; c < 3; ++c) {
          const auto key = std::make_pair(imm.elements(e, c), imm.elements(e, (c + 1) % 3));
          if (++directed[key] > 1) {
            throw InvalidImmersion("inconsistent orientation or non-manifold edge");
          }
        }
      }
      for (const auto& [edge, count] : directed) {
        if (directed.find({edge.second, edge.first}) == directed.end()) {
          throw InvalidImmersion("edge with a single incident triangle on a closed surface");
        }
      }
    }
  }

  const auto m = element_measures(imm);
  double mean = 0.0;
  for (double x : m) mean += x;
  mean /= static_cast<double>(m.size());
  for (size_t e = 0; e < m.size(); ++e) {
    if (!(m[e] > degenerate_tol * mean)) {
      throw DegenerateElement("element " + std::to_string(e) + " has measure " + std::to_string(m[e]));
    }
  }
}

std::vector<std::vector<int>> vertex_adjacency(const DiscreteImmersion& imm) {
  std::vector<std::vector<int>> adj(static_cast<size_t>(imm.num_vertices()));
  const int k = imm.intrinsic_dim + 1;
  for (Index e = 0; e < imm.num_elements(); ++e) {
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        if (a != b) adj[static_cast<size_t>(imm.elements(e, a))].push_back(imm.elements(e, b));
      }
    }
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

std::vector<int> ring_neighborhood(const std::vector<std::vector<int>>& adjacency, int center,
                                   int ring) {
  std::vector<int> out;
  std::vector<int> frontier{center};
  std::vector<int> seen{center};
  for (int r = 0; r < ring; ++r) {
    std::vector<int> next;
    for (int v : frontier) {
      for (int w : adjacency[static_cast<size_t>(v)]) {
        if (std::find(seen.begin(), seen.end(), w) == seen.end()) {
          seen.push_back(w);
          next.push_back(w);
          out.push_back(w);
        }
      }
    }
    frontier = std::move(next);
  }
  return out;
}

std::vector<bool> boundary_vertices(const DiscreteImmersion& imm) {
  std::vector<bool> boundary(static_cast<size_t>(imm.num_vertices()), false);
  if (imm.intrinsic_dim == 1) {
    std::vector<int> degree(static_cast<size_t>(imm.num_vertices()), 0);
    for (Index e = 0; e < imm.num_elements(); ++e) {
      ++degree[static_cast<size_t>(imm.elements(e, 0))];
      ++degree[static_cast<size_t>(imm.elements(e, 1))];
    }
    for (size_t v = 0; v < degree.size(); ++v) boundary[v] = degree[v] < 2;
    return boundary;
  }
  std::map<std::pair<int, int>, int> undirected;
  for (Index e = 0; e < imm.num_elements(); ++e) {
    for (int c = 0; c < 3; ++c) {
      int a = imm.elements(e, c);
      int b = imm.elements(e, (c + 1) % 3);
      if (a > b) std::swap(a, b);
      ++undirected[{a, b}];
    }
  }
  for (const auto& [edge, count] : undirected) {
    if (count == 1) {
      boundary[static_cast<size_t>(edge.first)] = true;
      boundary[static_cast<size_t>(edge.second)] = true;
    }
  }
  return boundary;
}

std::vector<double> measure_weights(const DiscreteImmersion& imm) {
  std::vector<double> w(static_cast<size_t>(imm.num_vertices()), 0.0);
  const int k = imm.intrinsic_dim + 1;
  for (Index e = 0; e < imm.num_elements(); ++e) {
    const double m = simplex_measure(imm, e);
    if (!(m > 0.0)) throw DegenerateElement("element " + std::to_string(e) + " has zero measure");
    for (int c = 0; c < k; ++c) w[static_cast<size_t>(imm.elements(e, c))] += m / k;
  }
  return w;
}

std::vector<double> intrinsic_curvature(const DiscreteImmersion& imm, int ring) {
  std::vector<double> K(static_cast<size_t>(imm.num_vertices()), 0.0);
  if (imm.intrinsic_dim == 1) return K;
  if (imm.intrinsic_dim != 2) throw UnsupportedDimension("intrinsic curvature needs n in {1,2}");
  if (ring < 0) throw InvalidArgument("ring must be >= 0");
  std::vector<double> defect(K.size(), 2.0 * std::numbers::pi);
  for (Index e = 0; e < imm.num_elements(); ++e) {
    for (int c = 0; c < 3; ++c) defect[static_cast<size_t>(imm.elements(e, c))] -= corner_angle(imm, e, c);
  }
  const auto area = measure_weights(imm);
  const auto boundary = boundary_vertices(imm);
  const auto adjacency = vertex_adjacency(imm);
  for (size_t v = 0; v < K.size(); ++v) {
    if (boundary[v]) continue;
    auto patch = ring_neighborhood(adjacency, static_cast<int>(v), ring);
    patch.push_back(static_cast<int>(v));
    double total_defect = 0.0;
    double total_area = 0.0;
    for (int u : patch) {
      if (boundary[static_cast<size_t>(u)]) continue;
      total_defect += defect[static_cast<size_t>(u)];
      total_area += area[static_cast<size_t>(u)];
    }
    K[v] = total_defect / total_area;
  }
  return K;
}

std::vector<double> gauss_residual(const DiscreteImmersion& imm, const FundamentalForms& forms, int ring) {
  const int n = imm.intrinsic_dim;
  if (n != 1 && n != 2) throw UnsupportedDimension("Gauss residual needs n in {1,2}");
  std::vector<double> r(static_cast<size_t>(imm.num_vertices()), 0.0);
  if (n == 1) return r;
  const auto K = intrinsic_curvature(imm, ring);
  const auto boundary = boundary_vertices(imm);
  for (size_t v = 0; v < r.size(); ++v) {
    if (boundary[v]) continue;
    double extrinsic = 0.0;
    for (const Mat& h : forms.at[v].h) extrinsic += h(0, 0) * h(1, 1) - h(0, 1) * h(0, 1);
    r[v] = K[v] - extrinsic;
  }
  return r;
}

std::vector<double> codazzi_residual(const DerivativeData& deriv) {
  const int n = deriv.intrinsic_dim;
  std::vector<double> r(deriv.at.size(), 0.0);
  for (size_t v = 0; v < r.size(); ++v) {
    double worst = 0.0;
    for (int a = 0; a < deriv.codim; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            worst = std::max(worst, std::abs(deriv.component(static_cast<Index>(v), a, i, j, k) -
                                             deriv.component(static_cast<Index>(v), a, i, k, j)));
    r[v] = worst;
  }
  return r;
}

Vec weighted_centroid(const DiscreteImmersion& imm, const std::vector<double>& weights) {
  Vec c = Vec::Zero(imm.ambient_dim());
  double total = 0.0;
  for (Index v = 0; v < imm.num_vertices(); ++v) {
    c += weights[static_cast<size_t>(v)] * imm.vertices.row(v).transpose();
    total += weights[static_cast<size_t>(v)];
  }
  return c / total;
}

std::uint64_t digest(const DiscreteImmersion& imm) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  const int n = imm.intrinsic_dim;
  mix(&n, sizeof n);
  for (Index r = 0; r < imm.vertices.rows(); ++r)
    for (Index c = 0; c < imm.vertices.cols(); ++c) {
      const double x = imm.vertices(r, c);
      mix(&x, sizeof x);
    }
  for (Index r = 0; r < imm.elements.rows(); ++r)
    for (Index c = 0; c < imm.elements.cols(); ++c) {
      const int x = imm.elements(r, c);
      mix(&x, sizeof x);
    }
  return h;
}

std::vector<double> FundamentalForms::a2() const {
  std::vector<double> out;
  out.reserve(at.size());
  for (const auto& f : at) out.push_back(f.a2);
  return out;
}

std::vector<double> FundamentalForms::h2() const {
  std::vector<double> out;
  out.reserve(at.size());
  for (const auto& f : at) out.push_back(f.h2);
  return out;
}

std::vector<double> FundamentalForms::aring2() const {
  std::vector<double> out;
  out.reserve(at.size());
  for (const auto& f : at) out.push_back(f.aring2);
  return out;
}

Mat FundamentalForms::mean_curvature() const {
  if (at.empty()) return Mat();
  Mat out(static_cast<Index>(at.size()), at.front().mean_curvature.size());
  for (size_t v = 0; v < at.size(); ++v) out.row(static_cast<Index>(v)) = at[v].mean_curvature.transpose();
  return out;
}

}  // namespace mcflow
