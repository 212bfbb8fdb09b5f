#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "genmeter/common.hpp"

namespace genmeter {

// Dense row-major matrix of doubles. All heavy numerics in the project run
// through the handful of kernels below.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  static Matrix identity(std::size_t n);
  static Matrix from_row(std::span<const double> v);
};

// c = a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// c = a * b^T
Matrix matmul_bt(const Matrix& a, const Matrix& b);
// c = a^T * b
Matrix matmul_at(const Matrix& a, const Matrix& b);
// c += a^T * b  (accumulating version used by the backward passes)
void matmul_at_acc(const Matrix& a, const Matrix& b, Matrix& c);

Matrix transpose(const Matrix& a);

void add_inplace(Matrix& a, const Matrix& b);
void sub_inplace(Matrix& a, const Matrix& b);
void scale_inplace(Matrix& a, double s);
Matrix hadamard(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& a);
double frobenius_norm(const Matrix& a);

// Squared Euclidean distance between two equal-length vectors.
double squared_distance(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

}  // namespace genmeter
