#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace violin::kernels {

enum class Backend { Scalar, Avx2 };

// Raw-pointer kernel table. Every backend computes the same quantities; only
// the summation order differs, so results agree to a few ulps.
struct KernelTable {
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*squared_distance)(const double* x, const double* y, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*max_element)(const double* x, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  // y = A x for row-major A (rows x cols)
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
};

const KernelTable& scalar_table();
// Returns nullptr when the library was built without the AVX2 translation unit.
const KernelTable* avx2_table();

bool backend_supported(Backend b);
const KernelTable& table(Backend b);

// Backend used by the span wrappers below. Chosen once at startup from CPU
// features, overridable with VIOLIN_SIMD=scalar|avx2.
Backend active_backend();
void set_backend(Backend b);
std::string_view backend_name(Backend b);

double dot(std::span<const double> x, std::span<const double> y);
double squared_distance(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double max_element(std::span<const double> x);
double sum(std::span<const double> x);
void gemv(std::span<const double> a, std::size_t rows, std::size_t cols, std::span<const double> x,
          std::span<double> y);

}  // namespace violin::kernels
