#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "lensless/simd/kernels.hpp"

using namespace lensless::simd;

namespace {

std::vector<double> rand_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

std::vector<std::complex<double>> rand_cvec(std::size_t n, std::uint64_t seed) {
  const auto re = rand_vec(n, seed), im = rand_vec(n, seed + 99);
  std::vector<std::complex<double>> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = {re[i], im[i]};
  return v;
}

const std::size_t kLengths[] = {0, 1, 3, 4, 5, 7, 8, 17, 64, 1001};

}  // namespace

TEST(Simd, ActiveTableIsKnown) {
  const std::string name = active_kernels().name;
  EXPECT_TRUE(name == "scalar" || name == "avx2") << name;
}

TEST(Simd, ScalarMatchesDefinitions) {
  const KernelTable& s = scalar_kernels();
  const std::vector<double> x{1.0, -2.0, 3.0}, y{4.0, 5.0, -6.0};
  EXPECT_DOUBLE_EQ(s.dot(x.data(), y.data(), 3), 4.0 - 10.0 - 18.0);
  EXPECT_DOUBLE_EQ(s.squared_distance(x.data(), y.data(), 3), 9.0 + 49.0 + 81.0);
  std::vector<double> z = y;
  s.axpy(2.0, x.data(), z.data(), 3);
  EXPECT_EQ(z, (std::vector<double>{6.0, 1.0, 0.0}));
  std::vector<double> r(3);
  s.leaky_relu(x.data(), r.data(), 3, 0.1);
  EXPECT_DOUBLE_EQ(r[1], -0.2);
  EXPECT_DOUBLE_EQ(r[2], 3.0);
  const std::complex<double> a{1.0, 2.0}, b{3.0, -1.0};
  std::complex<double> out;
  s.complex_mul(&a, &b, &out, 1);
  EXPECT_EQ(out, a * b);
  s.complex_mul_conj(&a, &b, &out, 1);
  EXPECT_EQ(out, std::conj(a) * b);
}

class AvxEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    avx_ = avx2_kernels();
    if (avx_ == nullptr) GTEST_SKIP() << "AVX2 kernels unavailable on this CPU";
  }
  const KernelTable* avx_ = nullptr;
};

TEST_F(AvxEquivalence, Reductions) {
  const KernelTable& s = scalar_kernels();
  for (std::size_t n : kLengths) {
    const auto x = rand_vec(n, n + 1), y = rand_vec(n, n + 2);
    const double ds = s.dot(x.data(), y.data(), n), da = avx_->dot(x.data(), y.data(), n);
    const double scale = std::max(1.0, static_cast<double>(n));
    EXPECT_NEAR(ds, da, 1e-13 * scale) << n;
    EXPECT_NEAR(s.squared_distance(x.data(), y.data(), n), avx_->squared_distance(x.data(), y.data(), n),
                1e-13 * scale)
        << n;
  }
}

TEST_F(AvxEquivalence, Elementwise) {
  const KernelTable& s = scalar_kernels();
  for (std::size_t n : kLengths) {
    const auto x = rand_vec(n, n + 3);
    auto ys = rand_vec(n, n + 4), ya = ys;
    s.axpy(-0.75, x.data(), ys.data(), n);
    avx_->axpy(-0.75, x.data(), ya.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(ys[i], ya[i], 1e-15) << n;

    std::vector<double> ls(n), la(x);
    s.leaky_relu(x.data(), ls.data(), n, 0.02);
    avx_->leaky_relu(la.data(), la.data(), n, 0.02);
    EXPECT_EQ(ls, la) << n;

    const auto a = rand_cvec(n, n + 5), b = rand_cvec(n, n + 6);
    std::vector<std::complex<double>> cs(n), ca(a);
    s.complex_mul(a.data(), b.data(), cs.data(), n);
    avx_->complex_mul(ca.data(), b.data(), ca.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(std::abs(cs[i] - ca[i]), 0.0, 1e-14) << n;
    std::vector<std::complex<double>> ds(n), da(b);
    s.complex_mul_conj(a.data(), b.data(), ds.data(), n);
    avx_->complex_mul_conj(a.data(), da.data(), da.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(std::abs(ds[i] - da[i]), 0.0, 1e-14) << n;
  }
}

TEST_F(AvxEquivalence, LeakyReluSignedZeroAndBoundary) {
  const std::vector<double> x{0.0, -0.0, 1e-300, -1e-300, 5.0};
  std::vector<double> a(5), b(5);
  scalar_kernels().leaky_relu(x.data(), a.data(), 5, 0.5);
  avx_->leaky_relu(x.data(), b.data(), 5, 0.5);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(a[i], b[i]);
}
