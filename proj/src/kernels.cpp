#include "violin/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace violin::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sqdist_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double max_scalar(const double* x, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

double sum_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

const KernelTable kScalar{dot_scalar, sqdist_scalar, axpy_scalar, max_scalar, sum_scalar, gemv_scalar};

Backend detect() {
  if (const char* env = std::getenv("VIOLIN_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2" && backend_supported(Backend::Avx2)) return Backend::Avx2;
  }
  return backend_supported(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<const KernelTable*>& active_ptr() {
  static std::atomic<const KernelTable*> ptr{&table(detect())};
  return ptr;
}

void check_same(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernels: length mismatch");
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

bool backend_supported(Backend b) {
  if (b == Backend::Scalar) return true;
#if defined(__x86_64__) || defined(__i386__)
  if (avx2_table() == nullptr) return false;
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& table(Backend b) {
  if (b == Backend::Avx2) {
    if (!backend_supported(b)) throw std::runtime_error("kernels: AVX2 backend not available on this CPU");
    return *avx2_table();
  }
  return kScalar;
}

Backend active_backend() {
  return active_ptr().load() == &kScalar ? Backend::Scalar : Backend::Avx2;
}

void set_backend(Backend b) { active_ptr().store(&table(b)); }

std::string_view backend_name(Backend b) { return b == Backend::Scalar ? "scalar" : "avx2"; }

double dot(std::span<const double> x, std::span<const double> y) {
  check_same(x.size(), y.size());
  return active_ptr().load()->dot(x.data(), y.data(), x.size());
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
  check_same(x.size(), y.size());
  return active_ptr().load()->squared_distance(x.data(), y.data(), x.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same(x.size(), y.size());
  active_ptr().load()->axpy(alpha, x.data(), y.data(), x.size());
}

double max_element(std::span<const double> x) { return active_ptr().load()->max_element(x.data(), x.size()); }

double sum(std::span<const double> x) { return active_ptr().load()->sum(x.data(), x.size()); }

void gemv(std::span<const double> a, std::size_t rows, std::size_t cols, std::span<const double> x,
          std::span<double> y) {
  if (a.size() != rows * cols || x.size() != cols || y.size() != rows)
    throw std::invalid_argument("kernels: gemv shape mismatch");
  active_ptr().load()->gemv(a.data(), rows, cols, x.data(), y.data());
}

}  // namespace violin::kernels
