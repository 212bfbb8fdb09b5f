#pragma once

#include <span>
#include <string>
#include <vector>

#include "genmeter/matrix.hpp"

namespace genmeter {

// Ordered collection of d-dimensional points with optional integer labels.
// Every metric in the project consumes these.
struct Dataset {
  std::size_t dim = 0;
  std::vector<double> data;  // row-major
  std::vector<int> labels;   // empty, or one per row

  Dataset() = default;
  explicit Dataset(std::size_t d) : dim(d) {}

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  bool has_labels() const { return !labels.empty(); }

  std::span<const double> row(std::size_t r) const { return {data.data() + r * dim, dim}; }

  void append_row(std::span<const double> v) { data.insert(data.end(), v.begin(), v.end()); }
  void append_row(std::span<const double> v, int label) {
    append_row(v);
    labels.push_back(label);
  }

  Matrix to_matrix() const {
    Matrix m(size(), dim);
    m.data = data;
    return m;
  }

  static Dataset from_matrix(const Matrix& m) {
    Dataset d(m.cols);
    d.data = m.data;
    return d;
  }
};

// CSV: header "dim=<d>" or "dim=<d>,labels", one point per line.
// Binary: magic "GMDS1", counts, then little-endian 32-bit reals; round-trips
// bitwise at 32-bit precision.
Dataset load_dataset(const std::string& path);
void save_dataset_csv(const Dataset& ds, const std::string& path);
void save_dataset_binary(const Dataset& ds, const std::string& path);

}  // namespace genmeter
