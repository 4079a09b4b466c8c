#include "violin/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "violin/kernels.hpp"

namespace violin {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw std::invalid_argument("Matrix: data size does not match shape");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::outer(std::span<const double> x, std::span<const double> y) {
  Matrix m(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) m(i, j) = x[i] * y[j];
  return m;
}

Vec Matrix::operator*(std::span<const double> x) const {
  if (x.size() != cols_) throw std::invalid_argument("Matrix*vector: dimension mismatch");
  Vec y(rows_);
  kernels::gemv(data_, rows_, cols_, x, y);
  return y;
}

Vec Matrix::left_multiply(std::span<const double> x) const {
  if (x.size() != rows_) throw std::invalid_argument("vector*Matrix: dimension mismatch");
  Vec y(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) kernels::axpy(x[r], row(r), y);
  return y;
}

Matrix Matrix::operator*(const Matrix& o) const {
  if (cols_ != o.rows_) throw std::invalid_argument("Matrix*Matrix: dimension mismatch");
  Matrix m(rows_, o.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(i, k);
      if (a != 0.0) kernels::axpy(a, o.row(k), m.row(i));
    }
  return m;
}

Matrix Matrix::operator+(const Matrix& o) const {
  Matrix m = *this;
  m += o;
  return m;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Matrix+Matrix: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix Matrix::operator-(const Matrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Matrix-Matrix: shape mismatch");
  Matrix m = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) m.data_[i] -= o.data_[i];
  return m;
}

Matrix Matrix::operator*(double s) const {
  Matrix m = *this;
  for (double& v : m.data_) v *= s;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::frobenius_norm() const { return std::sqrt(kernels::dot(data_, data_)); }

double Matrix::max_abs_asymmetry() const {
  if (rows_ != cols_) throw std::invalid_argument("Matrix: not square");
  double m = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j) m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
  return m;
}

SymmetricEigen jacobi_eigen(const Matrix& input, double tol, int max_sweeps) {
  const std::size_t n = input.rows();
  if (input.cols() != n) throw std::invalid_argument("jacobi_eigen: matrix not square");
  if (input.max_abs_asymmetry() > 1e-10) throw std::invalid_argument("jacobi_eigen: matrix not symmetric");
  Matrix a = input;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (input(i, j) + input(j, i));
  Matrix v = Matrix::identity(n);
  const double scale = std::max(1.0, a.frobenius_norm());

  auto off = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < max_sweeps && off() > tol * scale; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{Vec(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

double lambda_max(const Matrix& h) {
  if (h.rows() == 0) throw std::invalid_argument("lambda_max: empty matrix");
  return jacobi_eigen(h).values.back();
}

double symmetric_spectral_norm(const Matrix& h) {
  if (h.rows() == 0) return 0.0;
  const auto e = jacobi_eigen(h);
  return std::max(std::abs(e.values.front()), std::abs(e.values.back()));
}

double operator_norm(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  const double l = lambda_max(a.transposed() * a);
  return std::sqrt(std::max(0.0, l));
}

Matrix project_operator_norm(const Matrix& a, double bound) {
  // a = U S V^T, so a V diag(min(1, b/s)) V^T clips singular values at b.
  const auto e = jacobi_eigen(a.transposed() * a);
  const std::size_t n = a.cols();
  bool clip = false;
  Vec f(n, 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::sqrt(std::max(0.0, e.values[k]));
    if (s > bound) {
      f[k] = bound / s;
      clip = true;
    }
  }
  if (!clip) return a;
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += e.vectors(i, k) * f[k] * e.vectors(j, k);
      m(i, j) = s;
    }
  return a * m;
}

double norm2(std::span<const double> x) { return std::sqrt(kernels::dot(x, x)); }

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: dimension mismatch");
  return kernels::dot(x, y);
}

Vec add(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("add: dimension mismatch");
  Vec r(x.begin(), x.end());
  kernels::axpy(1.0, y, r);
  return r;
}

Vec sub(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("sub: dimension mismatch");
  Vec r(x.begin(), x.end());
  kernels::axpy(-1.0, y, r);
  return r;
}

Vec scaled(std::span<const double> x, double s) {
  Vec r(x.begin(), x.end());
  for (double& v : r) v *= s;
  return r;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) { kernels::axpy(alpha, x, y); }

Vec project_ball(std::span<const double> x, double radius) {
  const double n = norm2(x);
  if (n <= radius) return Vec(x.begin(), x.end());
  return scaled(x, radius / n);
}

}  // namespace violin
