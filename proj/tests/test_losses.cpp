#include <gtest/gtest.h>

#include <cmath>

#include "lensless/error.hpp"
#include "lensless/forward.hpp"
#include "lensless/losses.hpp"
#include "oracles.hpp"

using namespace lensless;

namespace {

double brute_contextual(const FeatureSet& p, const FeatureSet& q) {
  double total = 0.0;
  for (const auto& a : p) {
    double best = INFINITY;
    for (const auto& b : q) {
      double ab = 0.0, aa = 0.0, bb = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        ab += a[k] * b[k];
        aa += a[k] * a[k];
        bb += b[k] * b[k];
      }
      const double d = (aa == 0.0 || bb == 0.0) ? 1.0 : 1.0 - ab / (std::sqrt(aa) * std::sqrt(bb));
      best = std::min(best, d);
    }
    total += best;
  }
  return total / static_cast<double>(p.size());
}

FeatureSet random_set(int n, int d, std::uint64_t seed) {
  const Tensor t = oracle::random_tensor(n, d, 1, seed);
  FeatureSet s(n, std::vector<double>(d));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) s[i][k] = t(i, k);
  return s;
}

// Direct windowed SSIM on one channel: 11x11 Gaussian (sigma 1.5) at every valid position.
double ssim_oracle(const Tensor& a, const Tensor& b, double peak) {
  double g[11], gs = 0.0;
  for (int i = 0; i < 11; ++i) gs += g[i] = std::exp(-0.5 * (i - 5) * (i - 5) / 2.25);
  const double c1 = std::pow(0.01 * peak, 2), c2 = std::pow(0.03 * peak, 2);
  double acc = 0.0;
  int n = 0;
  for (int y = 0; y + 11 <= a.height(); ++y)
    for (int x = 0; x + 11 <= a.width(); ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          const double w = g[i] * g[j] / (gs * gs), u = a(y + i, x + j), v = b(y + i, x + j);
          ma += w * u;
          mb += w * v;
          saa += w * u * u;
          sbb += w * v * v;
          sab += w * u * v;
        }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++n;
    }
  return acc / n;
}

}  // namespace

TEST(Mse, ValuesAndSymmetry) {
  const Tensor a = oracle::random_tensor(4, 5, 2, 1), b = oracle::random_tensor(4, 5, 2, 2);
  EXPECT_EQ(mse(a, a).value, 0.0);
  EXPECT_NEAR(mse(a + Tensor(4, 5, 2, 1.0), a).value, 1.0, 1e-14);
  EXPECT_EQ(mse(a, b).value, mse(b, a).value);
  EXPECT_GE(mse(a, b).value, 0.0);
  EXPECT_THROW(mse(a, Tensor(4, 5, 1)), InvalidArgument);
  const LossValue same = mse(a, a);
  for (double v : same.grad.values()) EXPECT_EQ(v, 0.0);
}

TEST(Mse, GradientMatchesFiniteDifferences) {
  const Tensor a = oracle::random_tensor(3, 4, 2, 3), b = oracle::random_tensor(3, 4, 2, 4);
  const LossValue l = mse(a, b);
  const double h = 1e-6;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Tensor p = a, m = a;
    p.data()[i] += h;
    m.data()[i] -= h;
    const double fd = (mse(p, b).value - mse(m, b).value) / (2 * h);
    num += (fd - l.grad.data()[i]) * (fd - l.grad.data()[i]);
    den += fd * fd;
  }
  EXPECT_LT(std::sqrt(num / den), 1e-6);
}

TEST(WeightedTotal, Examples) {
  const Tensor g1(2, 2, 1, 1.0), g2(2, 2, 1, -2.0);
  const LossValue one = weighted_total({{3.0, g1}}, {1.0});
  EXPECT_EQ(one.value, 3.0);
  EXPECT_EQ(one.grad, g1);
  const LossValue zero = weighted_total({{3.0, g1}, {4.0, g2}}, {0.0, 0.0});
  EXPECT_EQ(zero.value, 0.0);
  EXPECT_EQ(zero.grad.max_abs(), 0.0);
  const LossValue hand = weighted_total({{2.0, g1}, {4.0, g2}}, {1.0, 0.5});
  EXPECT_DOUBLE_EQ(hand.value, 4.0);
  for (double v : hand.grad.values()) EXPECT_DOUBLE_EQ(v, 0.0);
  EXPECT_THROW(weighted_total({{2.0, g1}}, {1.0, 2.0}), InvalidArgument);
}

TEST(Contextual, AnchorsAndOracle) {
  const FeatureSet p = random_set(5, 6, 1);
  EXPECT_NEAR(contextual_loss(p, p), 0.0, 1e-15);
  EXPECT_NEAR(contextual_loss({{1, 0, 0, 0}, {0, 2, 0, 0}}, {{0, 0, 3, 0}, {0, 0, 0, -1}}), 1.0, 1e-15);
  const FeatureSet a = random_set(3, 4, 2), b = random_set(3, 4, 3);
  EXPECT_DOUBLE_EQ(contextual_loss(a, b), brute_contextual(a, b));
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureSet x = random_set(2 + trial % 5, 7, 10 + trial), y = random_set(1 + trial % 3, 7, 50 + trial);
    EXPECT_NEAR(contextual_loss(x, y), brute_contextual(x, y), 1e-15);
  }
  EXPECT_THROW(contextual_loss(a, random_set(2, 5, 4)), InvalidArgument);
  EXPECT_THROW(contextual_loss({}, a), InvalidArgument);
}

TEST(Contextual, ZeroVectorAndScaling) {
  EXPECT_DOUBLE_EQ(contextual_loss({{0, 0, 0}}, {{1, 2, 3}}), 1.0);
  const FeatureSet a = random_set(4, 5, 7);
  FeatureSet b = random_set(6, 5, 8), scaled = b;
  for (std::size_t i = 0; i < scaled.size(); ++i)
    for (double& v : scaled[i]) v *= 0.5 + i;
  EXPECT_NEAR(contextual_loss(a, b), contextual_loss(a, scaled), 1e-14);
}

TEST(PatchFeatures, CountAndContent) {
  Tensor t(5, 6, 2);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<double>(i);
  const FeatureSet f = patch_features(t, 3, 2);
  EXPECT_EQ(f.size(), 2u * 2u);
  EXPECT_EQ(f[0].size(), 18u);
  EXPECT_EQ(f[1][0], t(0, 2, 0));
  EXPECT_NEAR(contextual_loss(patch_features(t, 3, 1), patch_features(t, 3, 1)), 0.0, 1e-15);
}

TEST(Psnr, Anchors) {
  const Tensor a = oracle::random_tensor(8, 8, 3, 1, 0.0, 1.0);
  EXPECT_EQ(psnr(a, a), kPsnrInfinite);
  const Tensor z(4, 4, 1, 0.0), o(4, 4, 1, 1.0);
  EXPECT_NEAR(psnr(o, z, 255.0), 48.130803608679102, 1e-12);
  const Tensor b = oracle::random_tensor(8, 8, 3, 2, 0.0, 1.0);
  EXPECT_NEAR(psnr(3.0 * a, 3.0 * b, 3.0), psnr(a, b, 1.0), 1e-12);
  EXPECT_THROW(psnr(a, Tensor(8, 8, 1)), InvalidArgument);
  EXPECT_THROW(psnr(a, b, 0.0), InvalidArgument);
}

TEST(Psnr, DecreasesWithNoise) {
  const Tensor x = oracle::random_tensor(32, 32, 1, 5, 0.0, 1.0);
  double prev = INFINITY;
  for (double sigma : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    double mean = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) mean += psnr(add_gaussian_noise(x, sigma, s), x) / 5.0;
    EXPECT_LT(mean, prev) << sigma;
    prev = mean;
  }
}

TEST(Ssim, AnchorsAndReferenceFormula) {
  const Tensor a = oracle::random_tensor(16, 18, 1, 1, 0.0, 1.0);
  EXPECT_EQ(ssim(a, a), 1.0);
  const Tensor b = oracle::random_tensor(16, 18, 1, 2, 0.0, 1.0);
  EXPECT_NEAR(ssim(a, b), ssim_oracle(a, b, 1.0), 1e-12);
  const Tensor noisy = add_gaussian_noise(a, 0.05, 3);
  EXPECT_NEAR(ssim(noisy, a, 1.0), ssim_oracle(noisy, a, 1.0), 1e-12);
  EXPECT_THROW(ssim(Tensor(10, 20, 1), Tensor(10, 20, 1)), InvalidArgument);
}

TEST(Ssim, InversionAndOffset) {
  Tensor checker(24, 24, 1);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 24; ++x) checker(y, x) = ((y / 3 + x / 3) % 2) ? 1.0 : 0.0;
  const Tensor inverted = Tensor(24, 24, 1, 1.0) - checker;
  EXPECT_LT(ssim(checker, inverted), 0.5);
  const double off = ssim(checker + Tensor(24, 24, 1, 0.01), checker);
  EXPECT_GT(off, 0.99);
  EXPECT_LT(off, 1.0);
}
