#include "genmeter/matrix.hpp"

#include <cmath>

namespace genmeter {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_row(std::span<const double> v) {
  Matrix m(1, v.size());
  for (std::size_t i = 0; i < v.size(); ++i) m.data[i] = v[i];
  return m;
}

static void check_mul(std::size_t ac, std::size_t br, const char* what) {
  if (ac != br) throw config_error(std::string("matrix shape mismatch in ") + what);
}

// ikj order: the inner loop is a contiguous axpy over the output row, which
// the compiler vectorizes well.
Matrix matmul(const Matrix& a, const Matrix& b) {
  check_mul(a.cols, b.rows, "matmul");
  Matrix c(a.rows, b.cols);
  const std::size_t n = b.cols;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.data.data() + i * a.cols;
    double* crow = c.data.data() + i * n;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.data.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b) {
  check_mul(a.cols, b.cols, "matmul_bt");
  Matrix c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.data.data() + i * a.cols;
    double* crow = c.data.data() + i * b.rows;
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* brow = b.data.data() + j * b.cols;
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
      crow[j] = s;
    }
  }
  return c;
}

Matrix matmul_at(const Matrix& a, const Matrix& b) {
  Matrix c(a.cols, b.cols);
  matmul_at_acc(a, b, c);
  return c;
}

void matmul_at_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  check_mul(a.rows, b.rows, "matmul_at");
  if (c.rows != a.cols || c.cols != b.cols) throw config_error("matmul_at_acc: bad output shape");
  const std::size_t n = b.cols;
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* arow = a.data.data() + k * a.cols;
    const double* brow = b.data.data() + k * n;
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = c.data.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aki * brow[j];
    }
  }
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

void add_inplace(Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw config_error("add_inplace: shape mismatch");
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

void sub_inplace(Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw config_error("sub_inplace: shape mismatch");
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] -= b.data[i];
}

void scale_inplace(Matrix& a, double s) {
  for (double& x : a.data) x *= s;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw config_error("hadamard: shape mismatch");
  Matrix c(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) c.data[i] = a.data[i] * b.data[i];
  return c;
}

bool all_finite(const Matrix& a) {
  for (double x : a.data)
    if (!std::isfinite(x)) return false;
  return true;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data) s += x * x;
  return std::sqrt(s);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

}  // namespace genmeter
