#pragma once

// Mesh snapshots: CSV with one row per vertex (coordinates, H2, A2, Aring2,
// weight) and a sidecar listing element vertex indices, one element per line.

#include "mcflow/geometry.hpp"

#include <string>
#include <vector>

namespace mcflow {

/// "x.csv" -> "x.elements".
std::string sidecar_path(const std::string& csv_path);

/// Writes both files. Scalar columns come from `forms`.
void write_snapshot(const std::string& csv_path, const DiscreteImmersion& imm, const FundamentalForms& forms);

struct Snapshot {
  DiscreteImmersion immersion;
  std::vector<double> h2, a2, aring2, weight;
};

/// Reads a snapshot back; the intrinsic dimension comes from the sidecar's
/// column count. Throws IoError or InvalidImmersion.
Snapshot read_snapshot(const std::string& csv_path, bool closed = true);

/// Wavefront OBJ (surfaces in R^3 only); throws UnsupportedDimension otherwise.
void write_obj(const std::string& path, const DiscreteImmersion& imm);

}  // namespace mcflow
