#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lensless/error.hpp"
#include "lensless/forward.hpp"
#include "lensless/ops.hpp"
#include "oracles.hpp"

using namespace lensless;

namespace {

Tensor matvec_oracle(const Matrix& phi, const Tensor& x, int oh, int ow) {
  const std::vector<double> v = oracle::vec(x);
  std::vector<double> y(phi.rows(), 0.0);
  for (int i = 0; i < phi.rows(); ++i)
    for (int j = 0; j < phi.cols(); ++j) y[i] += phi(i, j) * v[j];
  return oracle::unvec(y, oh, ow);
}

Psf psf_of(const Tensor& k) { return Psf{k, 1.0}; }

}  // namespace

TEST(ForwardGeneral, IdentityAndSumRow) {
  const Tensor x = oracle::random_tensor(3, 4, 2, 1);
  EXPECT_EQ(forward_general(Matrix::identity(12), x, 3, 4), x);
  const Tensor s = forward_general(Matrix(1, 12, 1.0), x, 1, 1);
  for (int c = 0; c < 2; ++c) EXPECT_NEAR(s(0, 0, c), x.channel(c).sum(), 1e-14);
  EXPECT_THROW(forward_general(Matrix(4, 11), x, 2, 2), InvalidArgument);
  EXPECT_THROW(forward_general(Matrix(4, 12), x, 3, 3), InvalidArgument);
}

TEST(ForwardGeneral, MatchesMatVecOracle) {
  const Matrix phi = oracle::random_matrix(12, 9, 3);
  const Tensor x = oracle::random_tensor(3, 3, 1, 4);
  EXPECT_LT(oracle::rel_err(forward_general(phi, x, 4, 3), matvec_oracle(phi, x, 4, 3)), 1e-14);
}

TEST(ForwardSeparable, IdentityAndRankOne) {
  const Tensor x = oracle::random_tensor(4, 5, 1, 1);
  const SeparableSystem id{Matrix::identity(4), Matrix::identity(5)};
  EXPECT_EQ(forward_separable(id, x, 0.0), x);

  const Matrix l = oracle::random_matrix(6, 4, 2), r = oracle::random_matrix(7, 5, 3);
  const Tensor u = oracle::random_tensor(4, 1, 1, 4), v = oracle::random_tensor(5, 1, 1, 5);
  Tensor uv(4, 5, 1);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j) uv(i, j) = u(i, 0) * v(j, 0);
  const Tensor y = forward_separable({l, r}, uv, 0.0);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 7; ++j) {
      double lu = 0.0, rv = 0.0;
      for (int k = 0; k < 4; ++k) lu += l(i, k) * u(k, 0);
      for (int k = 0; k < 5; ++k) rv += r(j, k) * v(k, 0);
      EXPECT_NEAR(y(i, j), lu * rv, 1e-13);
    }
  EXPECT_THROW(forward_separable({l, r}, Tensor(5, 5, 1), 0.0), InvalidArgument);
}

TEST(ForwardSeparable, EqualsKroneckerGeneralModel) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 60; ++trial) {
    const int p = dim(rng), q = dim(rng), m = dim(rng), n = dim(rng);
    const Matrix l = oracle::random_matrix(m, p, 10 + trial), r = oracle::random_matrix(n, q, 100 + trial);
    const Tensor x = oracle::random_tensor(p, q, 1, 1000 + trial);
    const Tensor a = forward_separable({l, r}, x, 0.0);
    const Tensor b = matvec_oracle(oracle::kron(r, l), x, m, n);
    EXPECT_LT(oracle::rel_err(a, b), 1e-12) << p << q << m << n;
    EXPECT_LT(oracle::rel_err(forward_general(oracle::kron(r, l), x, m, n), b), 1e-12);
  }
}

TEST(ForwardConv, ImpulseCases) {
  const Tensor x = oracle::random_tensor(4, 5, 1, 2);
  Tensor centered(3, 3, 1);
  centered(1, 1) = 1.0;
  const Tensor y = forward_conv(psf_of(centered), x, 0.0);
  EXPECT_EQ(y.height(), 6);
  EXPECT_LT(oracle::max_abs_diff(y, pad_zero(x, 1, 1, 1, 1)), 1e-14);

  const Tensor p = oracle::random_tensor(3, 4, 1, 3, 0.0, 1.0);
  Tensor imp(2, 2, 1);
  imp(0, 0) = 1.0;
  EXPECT_LT(oracle::max_abs_diff(forward_conv(psf_of(p), imp, 0.0), pad_zero(p, 0, 1, 0, 1)), 1e-14);
}

TEST(ForwardConv, MatchesDirectSummationOracle) {
  const Tensor x = oracle::random_tensor(5, 5, 1, 4);
  const Tensor p = oracle::random_tensor(3, 3, 1, 5, 0.0, 1.0);
  EXPECT_LT(oracle::rel_err(forward_conv(psf_of(p), x, 0.0), oracle::conv_full(x, p)), 1e-10);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(1, 10);
  for (int trial = 0; trial < 40; ++trial) {
    const Tensor xx = oracle::random_tensor(dim(rng), dim(rng), 2, 200 + trial);
    const Tensor pp = oracle::random_tensor(dim(rng), dim(rng), trial % 2 ? 2 : 1, 300 + trial, 0.0, 1.0);
    EXPECT_LT(oracle::rel_err(forward_conv(psf_of(pp), xx, 0.0), oracle::conv_full(xx, pp)), 1e-10);
  }
}

TEST(ForwardCropConv, FullDimsMatchAndSingleSample) {
  const Tensor x = oracle::random_tensor(6, 7, 1, 6);
  const Tensor p = oracle::random_tensor(4, 3, 1, 7, 0.0, 1.0);
  const Tensor full = forward_conv(psf_of(p), x, 0.0);
  EXPECT_EQ(forward_cropconv(psf_of(p), x, full.height(), full.width(), 0.0), full);
  EXPECT_THROW(forward_cropconv(psf_of(p), x, full.height() + 1, full.width(), 0.0), InvalidArgument);

  // The single retained sensor pixel sits at the centered offset of the full grid.
  const int cy = center_offset(full.height(), 1), cx = center_offset(full.width(), 1);
  double s = 0.0;
  for (int i = 0; i < p.height(); ++i)
    for (int j = 0; j < p.width(); ++j) {
      const int sy = cy - i, sx = cx - j;
      if (sy >= 0 && sx >= 0 && sy < x.height() && sx < x.width()) s += p(i, j) * x(sy, sx);
    }
  EXPECT_NEAR(forward_cropconv(psf_of(p), x, 1, 1, 0.0)(0, 0), s, 1e-13);
}

TEST(ForwardModels, Superposition) {
  const Tensor a = oracle::random_tensor(5, 6, 1, 1), b = oracle::random_tensor(5, 6, 1, 2);
  const Psf p = psf_of(oracle::random_tensor(3, 3, 1, 3, 0.0, 1.0));
  const SeparableSystem sys{oracle::random_matrix(7, 5, 4), oracle::random_matrix(8, 6, 5)};
  EXPECT_LT(oracle::rel_err(forward_cropconv(p, a + b, 4, 5, 0.0),
                            forward_cropconv(p, a, 4, 5, 0.0) + forward_cropconv(p, b, 4, 5, 0.0)),
            1e-10);
  EXPECT_LT(oracle::rel_err(forward_separable(sys, a + b, 0.0),
                            forward_separable(sys, a, 0.0) + forward_separable(sys, b, 0.0)),
            1e-10);
  EXPECT_LT(oracle::rel_err(forward_conv(p, a + b, 0.0), forward_conv(p, a, 0.0) + forward_conv(p, b, 0.0)), 1e-10);
  EXPECT_LT(oracle::rel_err(forward_circular(p, a + b), forward_circular(p, a) + forward_circular(p, b)), 1e-10);
}

TEST(ForwardCircular, CenterAnchoredAtOrigin) {
  const Tensor x = oracle::random_tensor(8, 9, 1, 8);
  const Tensor p = oracle::random_tensor(4, 3, 1, 9, 0.0, 1.0);
  const int cy = (p.height() - 1) / 2, cx = (p.width() - 1) / 2;
  Tensor k(8, 9, 1);
  for (int i = 0; i < p.height(); ++i)
    for (int j = 0; j < p.width(); ++j) k(((i - cy) % 8 + 8) % 8, ((j - cx) % 9 + 9) % 9) = p(i, j);
  EXPECT_LT(oracle::rel_err(forward_circular(psf_of(p), x), oracle::conv_circular(x, k)), 1e-10);
}

TEST(Noise, SeededAndCalibrated) {
  const Tensor x = oracle::random_tensor(64, 64, 1, 1);
  EXPECT_EQ(add_gaussian_noise(x, 0.0, 3), x);
  EXPECT_EQ(add_gaussian_noise(x, 0.1, 3), add_gaussian_noise(x, 0.1, 3));
  EXPECT_NE(add_gaussian_noise(x, 0.1, 3), add_gaussian_noise(x, 0.1, 4));
  const Tensor d = add_gaussian_noise(x, 0.1, 3) - x;
  double m = 0.0, v = 0.0;
  for (double e : d.data()) m += e;
  m /= d.size();
  for (double e : d.data()) v += (e - m) * (e - m);
  EXPECT_NEAR(std::sqrt(v / d.size()), 0.1, 0.005);
  EXPECT_NEAR(m, 0.0, 0.006);
  const SeparableSystem id{Matrix::identity(64), Matrix::identity(64)};
  EXPECT_EQ(forward_separable(id, x, 0.05, 11), forward_separable(id, x, 0.05, 11));
  EXPECT_THROW(add_gaussian_noise(x, -1.0, 0), InvalidArgument);
}

TEST(Bayer, SplitJoin) {
  Tensor raw(4, 4, 1);
  for (int i = 0; i < 16; ++i) raw.data()[i] = i;
  const Tensor s = bayer_split(raw);
  ASSERT_EQ(s.channels(), 4);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) {
      EXPECT_EQ(s(y, x, 0), (2 * y) * 4 + 2 * x);
      EXPECT_EQ(s(y, x, 1), (2 * y) * 4 + 2 * x + 1);
      EXPECT_EQ(s(y, x, 2), (2 * y + 1) * 4 + 2 * x);
      EXPECT_EQ(s(y, x, 3), (2 * y + 1) * 4 + 2 * x + 1);
    }
  EXPECT_EQ(bayer_join(s), raw);
  const Tensor r = oracle::random_tensor(6, 8, 1, 3);
  EXPECT_EQ(bayer_join(bayer_split(r)), r);
  {
    const auto held = bayer_split(Tensor(4, 6, 1, 0.25));
    for (double v : held.data()) EXPECT_EQ(v, 0.25);
  }
  EXPECT_THROW(bayer_split(Tensor(3, 4, 1)), InvalidArgument);
  EXPECT_THROW(bayer_join(Tensor(2, 2, 3)), InvalidArgument);
}

TEST(Bayer, MosaicSelectsChannels) {
  const Tensor rgb = oracle::random_tensor(4, 6, 3, 5);
  const Tensor raw = mosaic_rgb(rgb);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) {
      const int c = (y % 2 == 0) ? (x % 2 == 0 ? 0 : 1) : (x % 2 == 0 ? 1 : 2);
      EXPECT_EQ(raw(y, x), rgb(y, x, c));
    }
}
