#pragma once

#include <functional>
#include <vector>

namespace mcflow {

/// Gauss–Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int order);

  /// Integral of f over [a, b].
  double integrate(const std::function<double(double)>& f, double a, double b) const;
};

}  // namespace mcflow
