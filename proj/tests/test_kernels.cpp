#include <gtest/gtest.h>

#include <cmath>

#include "violin/kernels.hpp"
#include "violin/random.hpp"

using namespace violin;
using kernels::Backend;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(a)); }

class KernelEquivalence : public ::testing::TestWithParam<std::size_t> {
 protected:
  void SetUp() override {
    if (!kernels::backend_supported(Backend::Avx2)) GTEST_SKIP() << "AVX2 not available";
  }
};

TEST_P(KernelEquivalence, AllKernelsMatchScalarReference) {
  const std::size_t n = GetParam();
  const auto& s = kernels::scalar_table();
  const auto& v = kernels::table(Backend::Avx2);
  Rng rng(n + 11);
  for (int rep = 0; rep < 20; ++rep) {
    const Vec x = rng.gaussian(n);
    const Vec y = rng.gaussian(n);
    EXPECT_LE(rel(s.dot(x.data(), y.data(), n), v.dot(x.data(), y.data(), n)), 1e-12);
    EXPECT_LE(rel(s.squared_distance(x.data(), y.data(), n), v.squared_distance(x.data(), y.data(), n)), 1e-12);
    EXPECT_LE(rel(s.sum(x.data(), n), v.sum(x.data(), n)), 1e-12);
    if (n > 0) EXPECT_EQ(s.max_element(x.data(), n), v.max_element(x.data(), n));

    Vec ys = y, yv = y;
    s.axpy(0.37, x.data(), ys.data(), n);
    v.axpy(0.37, x.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LE(rel(ys[i], yv[i]), 1e-15);

    const std::size_t rows = 5;
    const Vec a = rng.gaussian(rows * n);
    Vec outs(rows), outv(rows);
    s.gemv(a.data(), rows, n, x.data(), outs.data());
    v.gemv(a.data(), rows, n, x.data(), outv.data());
    for (std::size_t r = 0; r < rows; ++r) EXPECT_LE(rel(outs[r], outv[r]), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Lengths, KernelEquivalence, ::testing::Values(0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 67, 1000));

TEST(Kernels, MaxOfEmptyIsNegativeInfinity) {
  EXPECT_TRUE(std::isinf(kernels::scalar_table().max_element(nullptr, 0)));
}

TEST(Kernels, ScalarAlwaysSupported) { EXPECT_TRUE(kernels::backend_supported(Backend::Scalar)); }

TEST(Kernels, SwitchingBackendKeepsResults) {
  const Backend before = kernels::active_backend();
  const Vec x{1.0, 2.0, 3.0, 4.0, 5.0};
  const Vec y{5.0, 4.0, 3.0, 2.0, 1.0};
  kernels::set_backend(Backend::Scalar);
  EXPECT_EQ(kernels::active_backend(), Backend::Scalar);
  EXPECT_DOUBLE_EQ(kernels::dot(x, y), 35.0);
  if (kernels::backend_supported(Backend::Avx2)) {
    kernels::set_backend(Backend::Avx2);
    EXPECT_DOUBLE_EQ(kernels::dot(x, y), 35.0);
    EXPECT_DOUBLE_EQ(kernels::squared_distance(x, y), 40.0);
  }
  kernels::set_backend(before);
}

TEST(Kernels, LengthMismatchThrows) {
  const Vec x{1.0, 2.0};
  const Vec y{1.0};
  EXPECT_THROW(kernels::dot(x, y), std::invalid_argument);
}

}  // namespace
