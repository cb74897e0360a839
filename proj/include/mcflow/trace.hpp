#pragma once

#include "mcflow/geometry.hpp"

#include <string>
#include <utility>
#include <vector>

namespace mcflow {

/// One accepted step (step 0 is the initial state, dt = 0).
struct TraceRecord {
  long step = 0;
  double t = 0.0;
  double dt = 0.0;
  double vol = 0.0;
  double h2_max = 0.0;
  double h2_min = 0.0;
  double a2_max = 0.0;
  double aring2_max = 0.0;
  double pinch_ratio = 0.0;    // max |Å|^2 / |H|^2
  double h2_integral = 0.0;    // int |H|^2 dmu
  double lb_discrepancy = 0.0; // median relative |H_jet - H_lb| (0 when not computed)
  std::vector<std::pair<double, double>> aring_p_norms;  // (p, ||Å||_p)
  std::vector<std::pair<double, double>> st_integral;    // (alpha, int int |H|^alpha)
  Vec centroid;
  Vec max_h_point;
  std::string scheme;
};

struct FlowTrace {
  int intrinsic_dim = 0;
  int ambient_dim = 0;
  std::vector<TraceRecord> records;
  std::string stop_reason;

  /// Spacetime integral for the given alpha in record i; throws UnknownQuantity if absent.
  double st_integral(size_t i, double alpha) const;
};

}  // namespace mcflow
