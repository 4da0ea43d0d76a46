#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lensless/error.hpp"
#include "lensless/ops.hpp"
#include "lensless/optics.hpp"
#include "lensless/synthetic.hpp"
#include "oracles.hpp"

using namespace lensless;

namespace {

ComplexSpectrum random_field(int h, int w, std::uint64_t seed) {
  const Tensor re = oracle::random_tensor(h, w, 1, seed), im = oracle::random_tensor(h, w, 1, seed + 1);
  ComplexSpectrum f(h, w, 1);
  for (std::size_t i = 0; i < f.size(); ++i) f.data()[i] = {re.data()[i], im.data()[i]};
  return f;
}

double energy(const ComplexSpectrum& f) {
  double e = 0.0;
  for (const Complex& z : f.data()) e += std::norm(z);
  return e;
}

}  // namespace

// At lambda d = N p^2 the sampled Fresnel impulse response exp(i pi n^2 / N) / (i N)
// is N-periodic and its DFT is exactly the transfer-function chirp, so direct
// circular summation with that kernel must agree to rounding.
TEST(Fresnel, MatchesDirectSummationAtCriticalSampling) {
  const int n = 16;
  const double pitch = 8e-6, lambda = 500e-9;
  const double d = n * pitch * pitch / lambda;
  const ComplexSpectrum u1 = random_field(n, n, 3);
  const ComplexSpectrum u2 = propagate_fresnel(u1, lambda, d, pitch);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      Complex s = 0.0;
      for (int yy = 0; yy < n; ++yy)
        for (int xx = 0; xx < n; ++xx) {
          const int dy = y - yy, dx = x - xx;
          const double ph = std::numbers::pi * (dy * dy + dx * dx) / n;
          s += u1(yy, xx) * Complex(std::cos(ph), std::sin(ph));
        }
      s /= Complex(0.0, n);
      EXPECT_NEAR(std::abs(u2(y, x) - s), 0.0, 1e-10);
    }
}

TEST(Fresnel, ConservesEnergy) {
  const ComplexSpectrum u1 = random_field(24, 20, 5);
  const ComplexSpectrum u2 = propagate_fresnel(u1, 532e-9, 1e-4, 5e-6);
  EXPECT_NEAR(energy(u2), energy(u1), 1e-10 * energy(u1));
}

TEST(Fresnel, ComposesAdditively) {
  const ComplexSpectrum u = random_field(16, 16, 7);
  const double lambda = 600e-9, pitch = 6e-6;
  const ComplexSpectrum two = propagate_fresnel(propagate_fresnel(u, lambda, 2e-5, pitch), lambda, 3e-5, pitch);
  const ComplexSpectrum one = propagate_fresnel(u, lambda, 5e-5, pitch);
  double err = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(one.data()[i] - two.data()[i]));
  EXPECT_LT(err, 1e-10);
}

TEST(Fresnel, AliasingDistanceRejectedWithDetail) {
  try {
    fresnel_transfer(8, 8, 500e-9, 1.0, 1e-6);
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("aliases"), std::string::npos);
  }
  EXPECT_THROW(fresnel_transfer(8, 8, -1.0, 1.0, 1e-6), InvalidArgument);
}

TEST(Fresnel, FlatMaskGivesUniformPsf) {
  MaskHeightProfile mask{Tensor(16, 16, 1, 1e-6), 10e-6};
  const Psf psf = simulate_psf_fresnel(mask, 532e-9, 1e-3, 10e-6);
  for (double v : psf.kernel.data()) EXPECT_NEAR(v, 1.0, 1e-10);
}

TEST(Fresnel, PsfIsNonNegativeAndResampled) {
  const MaskHeightProfile mask = random_height_profile(32, 10e-6, 2e-6, 1.5, 3);
  const Psf same = simulate_psf_fresnel(mask, 532e-9, 2e-3, 10e-6);
  EXPECT_EQ(same.kernel.height(), 32);
  for (double v : same.kernel.data()) EXPECT_GE(v, 0.0);
  const Psf half = simulate_psf_fresnel(mask, 532e-9, 2e-3, 20e-6);
  EXPECT_EQ(half.kernel.height(), 16);
  EXPECT_EQ(half.pitch, 20e-6);
  const Psf rgb = simulate_psf_fresnel_rgb(mask, 2e-3, 10e-6);
  EXPECT_EQ(rgb.kernel.channels(), 3);
  const Psf n = rgb.normalized();
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(n.kernel.channel(c).sum(), 1.0, 1e-12);
}

TEST(Mask, Validation) {
  MaskHeightProfile bad{Tensor(4, 4, 1, -1e-6), 1e-6};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  MaskHeightProfile index{Tensor(4, 4, 1), 1e-6, 1.0};
  EXPECT_THROW(index.validate(), InvalidArgument);
  Psf zero{Tensor(3, 3, 1), 1.0};
  EXPECT_THROW(zero.normalized(), InvalidArgument);
}

TEST(Separable, HandComputedFactor) {
  // b = {1,0,1,1,0}; row i reads b[(floor(1.5 i) + 1 - j) mod 5]
  const Matrix phi = separable_factor({1, -1, 1, 1, -1}, 4, 2, 1.5, 0.0);
  EXPECT_EQ(phi, Matrix(4, 2, {0, 1, 1, 0, 0, 1, 1, 0}));
}

TEST(Separable, IndexOracleAndConstantAlongSlope) {
  const std::vector<int> code = random_code(90, 4);
  const double m = 1.75;
  const Matrix phi = separable_factor(code, 40, 24, m, 0.0);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 24; ++j) {
      const long idx = ((static_cast<long>(std::floor(m * i)) + 23 - j) % 90 + 90) % 90;
      EXPECT_EQ(phi(i, j), code[idx] > 0 ? 1.0 : 0.0);
      EXPECT_GE(phi(i, j), 0.0);
    }
  // unit slope: one code element per scene pixel, so diagonals are constant
  const Matrix unit = separable_factor(code, 30, 24, 1.0, 0.0);
  for (int i = 1; i < 30; ++i)
    for (int j = 1; j < 24; ++j) EXPECT_EQ(unit(i, j), unit(i - 1, j - 1));
}

TEST(Separable, Validation) {
  EXPECT_THROW(separable_factor({1, -1}, 4, 3, 1.0, 0.0), InvalidArgument);
  EXPECT_THROW(separable_factor({1, 0, 1}, 4, 3, 1.0, 0.0), InvalidArgument);
  EXPECT_THROW(separable_factor({1, -1, 1}, 4, 3, 0.0, 0.0), InvalidArgument);
  CameraGeometry g{10e-6, 1.5e-3, 0.3, 0.064, 0.064, 32, 32, 48, 48};
  g.scene_dist = 0.0;
  EXPECT_THROW(simulate_separable_system(random_code(80, 1), random_code(80, 2), g, 0.0), InvalidArgument);
}

TEST(Separable, BlurIsColumnConvolution) {
  const std::vector<int> code = random_code(80, 9);
  const Matrix sharp = separable_factor(code, 48, 32, 1.0, 0.0);
  const Matrix blur = separable_factor(code, 48, 32, 1.0, 0.8);
  const auto k = gaussian_kernel(0.8);
  const int r = static_cast<int>(k.size() / 2);
  for (int j = 0; j < 32; ++j)
    for (int i = r; i < 48 - r; ++i) {
      double s = 0.0;
      for (int t = -r; t <= r; ++t) s += k[t + r] * sharp(i + t, j);
      EXPECT_NEAR(blur(i, j), s, 1e-14);
    }
}
