#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace violin {

using Vec = std::vector<double>;

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix outer(std::span<const double> x, std::span<const double> y);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Vec operator*(std::span<const double> x) const;
  Matrix operator*(const Matrix& other) const;
  Matrix operator+(const Matrix& other) const;
  Matrix operator-(const Matrix& other) const;
  Matrix operator*(double s) const;
  Matrix& operator+=(const Matrix& other);
  Matrix transposed() const;
  // x^T A
  Vec left_multiply(std::span<const double> x) const;

  double frobenius_norm() const;
  double max_abs_asymmetry() const;
  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SymmetricEigen {
  Vec values;      // ascending
  Matrix vectors;  // column k is the eigenvector of values[k]
};

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm is below
// tol * max(1, ||A||_F). Throws on asymmetric input (beyond 1e-10).
SymmetricEigen jacobi_eigen(const Matrix& a, double tol = 1e-12, int max_sweeps = 100);

double lambda_max(const Matrix& h);
// Spectral norm of a symmetric matrix (max |eigenvalue|).
double symmetric_spectral_norm(const Matrix& h);
// Operator 2-norm of a general matrix.
double operator_norm(const Matrix& a);
// Nearest matrix (in Frobenius norm) with operator norm <= bound.
Matrix project_operator_norm(const Matrix& a, double bound = 1.0);

double norm2(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
Vec add(std::span<const double> x, std::span<const double> y);
Vec sub(std::span<const double> x, std::span<const double> y);
Vec scaled(std::span<const double> x, double s);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// Radial projection onto the ball of the given radius.
Vec project_ball(std::span<const double> x, double radius);

}  // namespace violin
