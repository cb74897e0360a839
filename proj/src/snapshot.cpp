#include "mcflow/snapshot.hpp"

#include "mcflow/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mcflow {

std::string sidecar_path(const std::string& csv_path) {
  const auto dot = csv_path.rfind(".csv");
  if (dot != std::string::npos && dot + 4 == csv_path.size()) return csv_path.substr(0, dot) + ".elements";
  return csv_path + ".elements";
}

namespace {

void put(std::string& line, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  line += buf;
}

}  // namespace

void write_snapshot(const std::string& csv_path, const DiscreteImmersion& imm, const FundamentalForms& forms) {
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write " + csv_path);
  const int D = imm.ambient_dim();
  std::string header;
  for (int c = 0; c < D; ++c) header += "x" + std::to_string(c) + ",";
  header += "H2,A2,Aring2,weight\n";
  csv << header;
  const auto w = measure_weights(imm);
  for (Index i = 0; i < imm.num_vertices(); ++i) {
    std::string line;
    for (int c = 0; c < D; ++c) {
      put(line, imm.vertices(i, c));
      line += ',';
    }
    const auto& f = forms.at[static_cast<size_t>(i)];
    put(line, f.h2);
    line += ',';
    put(line, f.a2);
    line += ',';
    put(line, f.aring2);
    line += ',';
    put(line, w[static_cast<size_t>(i)]);
    line += '\n';
    csv << line;
  }
  if (!csv) throw IoError("write failed: " + csv_path);

  const auto el_path = sidecar_path(csv_path);
  std::ofstream el(el_path);
  if (!el) throw IoError("cannot write " + el_path);
  for (Index e = 0; e < imm.num_elements(); ++e) {
    for (Index c = 0; c < imm.elements.cols(); ++c) el << (c ? " " : "") << imm.elements(e, c);
    el << '\n';
  }
  if (!el) throw IoError("write failed: " + el_path);
}

Snapshot read_snapshot(const std::string& csv_path, bool closed) {
  std::ifstream csv(csv_path);
  if (!csv) throw IoError("cannot read " + csv_path);
  std::string line;
  if (!std::getline(csv, line)) throw IoError(csv_path + " is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const int cols = static_cast<int>(header.size());
  const int D = cols - 4;
  if (D < 2 || header[static_cast<size_t>(D)] != "H2" || header.back() != "weight") {
    throw IoError(csv_path + ": header must be x0,...,x{D-1},H2,A2,Aring2,weight");
  }
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(csv, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw IoError(csv_path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(row.size()) != cols) {
      throw IoError(csv_path + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols) + " columns");
    }
    rows.push_back(std::move(row));
  }

  const auto el_path = sidecar_path(csv_path);
  std::ifstream el(el_path);
  if (!el) throw IoError("cannot read " + el_path);
  std::vector<std::vector<int>> elements;
  lineno = 0;
  while (std::getline(el, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<int> e;
    int v = 0;
    while (ss >> v) e.push_back(v);
    if (!ss.eof()) throw IoError(el_path + ":" + std::to_string(lineno) + ": bad index");
    if (!elements.empty() && e.size() != elements.front().size()) {
      throw IoError(el_path + ":" + std::to_string(lineno) + ": inconsistent element size");
    }
    elements.push_back(std::move(e));
  }
  if (elements.empty()) throw IoError(el_path + " lists no elements");
  const int k = static_cast<int>(elements.front().size());
  if (k != 2 && k != 3) throw IoError(el_path + ": elements must have 2 or 3 vertices");

  Snapshot s;
  s.immersion.intrinsic_dim = k - 1;
  s.immersion.closed = closed;
  s.immersion.vertices.resize(static_cast<Index>(rows.size()), D);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < D; ++c) s.immersion.vertices(static_cast<Index>(i), c) = rows[i][static_cast<size_t>(c)];
    s.h2.push_back(rows[i][static_cast<size_t>(D)]);
    s.a2.push_back(rows[i][static_cast<size_t>(D + 1)]);
    s.aring2.push_back(rows[i][static_cast<size_t>(D + 2)]);
    s.weight.push_back(rows[i][static_cast<size_t>(D + 3)]);
  }
  s.immersion.elements.resize(static_cast<Index>(elements.size()), k);
  for (size_t e = 0; e < elements.size(); ++e)
    for (int c = 0; c < k; ++c) s.immersion.elements(static_cast<Index>(e), c) = elements[e][static_cast<size_t>(c)];
  validate(s.immersion);
  return s;
}

void write_obj(const std::string& path, const DiscreteImmersion& imm) {
  if (imm.intrinsic_dim != 2 || imm.ambient_dim() != 3) throw UnsupportedDimension("OBJ export needs a surface in R^3");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  char buf[96];
  for (Index i = 0; i < imm.num_vertices(); ++i) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", imm.vertices(i, 0), imm.vertices(i, 1), imm.vertices(i, 2));
    out << buf;
  }
  for (Index e = 0; e < imm.num_elements(); ++e) {
    out << "f " << imm.elements(e, 0) + 1 << ' ' << imm.elements(e, 1) + 1 << ' ' << imm.elements(e, 2) + 1 << '\n';
  }
}

}  // namespace mcflow
