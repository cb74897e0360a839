#include "mcflow/quadrature.hpp"

#include "mcflow/error.hpp"

#include <boost/math/special_functions/legendre.hpp>

namespace mcflow {

GaussLegendre::GaussLegendre(int order) {
  if (order < 1) throw InvalidArgument("quadrature order must be >= 1");
  const auto positive = boost::math::legendre_p_zeros<double>(order);  // ascending, x >= 0
  auto weight = [order](double x) {
    const double dp = boost::math::legendre_p_prime(order, x);
    return 2.0 / ((1.0 - x * x) * dp * dp);
  };
  for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
    if (*it == 0.0) continue;
    nodes.push_back(-*it);
    weights.push_back(weight(*it));
  }
  for (double x : positive) {
    nodes.push_back(x);
    weights.push_back(weight(x));
  }
}

double GaussLegendre::integrate(const std::function<double(double)>& f, double a, double b) const {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  double sum = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(mid + half * nodes[i]);
  return half * sum;
}

}  // namespace mcflow
