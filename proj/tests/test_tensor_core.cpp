#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "lensless/error.hpp"
#include "lensless/fft.hpp"
#include "lensless/ops.hpp"
#include "oracles.hpp"

using namespace lensless;

namespace {

Tensor iota(int h, int w, int c = 1) {
  Tensor t(h, w, c);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<double>(i);
  return t;
}

}  // namespace

TEST(Fft, SingleElementIsIdentity) {
  const ComplexSpectrum s = fft2(Tensor(1, 1, 1, 5.0));
  EXPECT_EQ(s(0, 0), Complex(5.0, 0.0));
}

TEST(Fft, ConstantHasOnlyDc) {
  const ComplexSpectrum s = fft2(Tensor(4, 4, 1, 2.5));
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      const Complex want = (y == 0 && x == 0) ? Complex(40.0, 0.0) : Complex(0.0, 0.0);
      EXPECT_NEAR(std::abs(s(y, x) - want), 0.0, 1e-12);
    }
}

TEST(Fft, MatchesBruteForceDft) {
  for (auto [h, w] : {std::pair{8, 8}, {7, 5}, {3, 10}}) {
    const Tensor t = oracle::random_tensor(h, w, 2, 11 + h);
    const ComplexSpectrum s = fft2(t);
    for (int c = 0; c < 2; ++c) {
      const auto ref = oracle::dft2(t, c);
      double num = 0.0, den = 0.0;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          num += std::norm(s(y, x, c) - ref[y * w + x]);
          den += std::norm(ref[y * w + x]);
        }
      EXPECT_LT(std::sqrt(num / den), 1e-10) << h << "x" << w;
    }
  }
}

TEST(Fft, EmptyTensorRejected) { EXPECT_THROW(fft2(Tensor()), InvalidArgument); }

TEST(Fft, RoundTripAllSizes) {
  for (int n : {7, 8, 16, 33}) {
    const Tensor t = oracle::random_tensor(n, n, 1, n);
    EXPECT_LT(oracle::max_abs_diff(ifft2(fft2(t)), t), 1e-10) << n;
  }
  const Tensor t = oracle::random_tensor(16, 16, 1, 3);
  EXPECT_LT(oracle::rel_err(ifft2(fft2(t)), t), 1e-12);
}

TEST(Fft, ZeroSpectrumGivesZero) {
  const Tensor z = ifft2(ComplexSpectrum(5, 6, 1));
  EXPECT_EQ(z.max_abs(), 0.0);
}

TEST(Fft, ShiftedImpulseRoundTrip) {
  Tensor imp(6, 9, 1);
  imp(4, 7) = 1.0;
  ComplexSpectrum s(6, 9, 1);
  const auto ref = oracle::dft2(imp);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 9; ++x) s(y, x) = ref[y * 9 + x];
  EXPECT_LT(oracle::max_abs_diff(ifft2(s), imp), 1e-12);
}

TEST(Fft, NonHermitianSpectrumIsNumericError) {
  ComplexSpectrum s(4, 4, 1);
  s(0, 1) = Complex(0.0, 1.0);
  EXPECT_THROW(ifft2(s), NumericError);
}

TEST(Fft, Parseval) {
  const Tensor t = oracle::random_tensor(9, 12, 1, 5);
  double e = 0.0, f = 0.0;
  for (double v : t.data()) e += v * v;
  {
    const auto held = fft2(t);
    for (const Complex& z : held.data()) f += std::norm(z);
  }
  EXPECT_NEAR(f / (9.0 * 12.0), e, 1e-10 * e);
}

TEST(Fft, Linearity) {
  const Tensor a = oracle::random_tensor(8, 6, 1, 1), b = oracle::random_tensor(8, 6, 1, 2);
  const ComplexSpectrum lhs = fft2(2.0 * a + (-3.0) * b);
  const ComplexSpectrum fa = fft2(a), fb = fft2(b);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const Complex rhs = 2.0 * fa.data()[i] - 3.0 * fb.data()[i];
    num += std::norm(lhs.data()[i] - rhs);
    den += std::norm(rhs);
  }
  EXPECT_LT(std::sqrt(num / den), 1e-10);
}

TEST(Hadamard, IdentitiesAndHandCase) {
  ComplexSpectrum a(2, 2, 1), ones(2, 2, 1, Complex(1.0, 0.0)), zeros(2, 2, 1);
  for (int i = 0; i < 4; ++i) a.data()[i] = Complex(1.0 + i, -0.5 * i);
  const ComplexSpectrum same = hadamard(a, ones);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(same.data()[i], a.data()[i]);
  {
    const auto held = hadamard(a, zeros);
    for (const Complex& z : held.data()) EXPECT_EQ(z, Complex(0.0, 0.0));
  }
  ComplexSpectrum p(2, 2, 1, Complex(1.0, 1.0)), q(2, 2, 1, Complex(1.0, -1.0));
  {
    const auto held = hadamard(p, q);
    for (const Complex& z : held.data()) EXPECT_EQ(z, Complex(2.0, 0.0));
  }
}

TEST(Hadamard, BroadcastAndMismatch) {
  ComplexSpectrum a(2, 3, 3, Complex(2.0, 0.0)), b(2, 3, 1, Complex(0.0, 1.0));
  {
    const auto held = hadamard(a, b);
    for (const Complex& z : held.data()) EXPECT_EQ(z, Complex(0.0, 2.0));
  }
  EXPECT_THROW(hadamard(a, ComplexSpectrum(3, 3, 1)), InvalidArgument);
}

TEST(Pad, Replicate) {
  const Tensor t = oracle::random_tensor(3, 4, 2, 9);
  EXPECT_EQ(pad_replicate(t, 0, 0, 0, 0), t);
  const Tensor seven = pad_replicate(Tensor(1, 1, 1, 7.0), 1, 1, 1, 1);
  EXPECT_EQ(seven, Tensor(3, 3, 1, 7.0));
  const Tensor q(2, 2, 1, {1, 2, 3, 4});
  EXPECT_EQ(pad_replicate(q, 0, 0, 1, 0), Tensor(2, 3, 1, {1, 1, 2, 3, 3, 4}));
  const Tensor p = pad_replicate(t, 2, 1, 3, 2);
  EXPECT_EQ(crop(p, 2, 3, 3, 4), t);
}

TEST(Crop, CenterConvention) {
  const Tensor t = iota(4, 4);
  EXPECT_EQ(crop_center(t, 4, 4), t);
  EXPECT_EQ(crop_center(t, 2, 2), Tensor(2, 2, 1, {5, 6, 9, 10}));
  // odd margin: the extra row/column stays at the bottom/right
  EXPECT_EQ(crop_center(iota(5, 5), 2, 2), Tensor(2, 2, 1, {6, 7, 11, 12}));
  EXPECT_THROW(crop_center(t, 5, 4), InvalidArgument);
  const Tensor r = oracle::random_tensor(5, 6, 1, 4);
  EXPECT_EQ(crop_center(pad_replicate(r, 3, 3, 3, 3), 5, 6), r);
}

TEST(Window, InteriorEqualsOuterIsOnes) {
  const Tensor w = smoothed_box_window(9, 7, 9, 7, 2.0);
  for (double v : w.data()) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Window, SmallSigmaApproachesHardBox) {
  const Tensor w = smoothed_box_window(12, 10, 6, 4, 0.1);
  Tensor box(12, 10, 1);
  for (int y = 3; y < 9; ++y)
    for (int x = 3; x < 7; ++x) box(y, x) = 1.0;
  EXPECT_LT(oracle::max_abs_diff(w, box), 1e-3);
}

TEST(Window, SymmetricRangeAndCenter) {
  const Tensor w = smoothed_box_window(40, 30, 20, 20, 1.5);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 30; ++x) {
      EXPECT_NEAR(w(y, x), w(39 - y, x), 1e-15);
      EXPECT_NEAR(w(y, x), w(y, 29 - x), 1e-15);
      EXPECT_GE(w(y, x), 0.0);
      EXPECT_LE(w(y, x), 1.0);
    }
  EXPECT_GE(w(20, 15), 1.0 - 1e-6);
  EXPECT_THROW(smoothed_box_window(4, 4, 5, 4, 1.0), InvalidArgument);
}

TEST(Blur, ConstantFlipAndImpulse) {
  const Tensor c = gaussian_blur(Tensor(6, 5, 2, 0.3), 1.2);
  for (double v : c.data()) EXPECT_NEAR(v, 0.3, 1e-15);

  const Tensor t = oracle::random_tensor(9, 8, 1, 2);
  EXPECT_LT(oracle::max_abs_diff(gaussian_blur(flip_vertical(t), 0.8), flip_vertical(gaussian_blur(t, 0.8))), 1e-14);

  const double sigma = 1.0;
  const int r = 4;
  Tensor imp(21, 21, 1);
  imp(10, 10) = 1.0;
  const Tensor b = gaussian_blur(imp, sigma);
  double norm = 0.0;
  for (int i = -r; i <= r; ++i) norm += std::exp(-0.5 * i * i / (sigma * sigma));
  for (int y = 0; y < 21; ++y)
    for (int x = 0; x < 21; ++x) {
      const int dy = y - 10, dx = x - 10;
      const double want = (std::abs(dy) <= r && std::abs(dx) <= r)
                              ? std::exp(-0.5 * (dy * dy + dx * dx) / (sigma * sigma)) / (norm * norm)
                              : 0.0;
      EXPECT_NEAR(b(y, x), want, 1e-15);
    }
}

TEST(PixelShuffle, Rearrangement) {
  const Tensor t = iota(4, 4);
  const Tensor d = pixel_shuffle_down(t, 2);
  EXPECT_EQ(d.height(), 2);
  EXPECT_EQ(d.width(), 2);
  EXPECT_EQ(d.channels(), 4);
  std::vector<double> a = t.values(), b = d.values();
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
  EXPECT_EQ(d(1, 0, 3), t(3, 1));
  EXPECT_EQ(pixel_shuffle_down(t, 1), t);
  EXPECT_EQ(pixel_shuffle_up(t, 1), t);
  EXPECT_THROW(pixel_shuffle_down(iota(3, 4), 2), InvalidArgument);
  EXPECT_THROW(pixel_shuffle_up(iota(2, 2, 3), 2), InvalidArgument);
}

TEST(PixelShuffle, ExactInverses) {
  const Tensor t = oracle::random_tensor(6, 8, 3, 1);
  EXPECT_EQ(pixel_shuffle_up(pixel_shuffle_down(t, 2), 2), t);
  const Tensor s = oracle::random_tensor(2, 2, 8, 2);
  EXPECT_EQ(pixel_shuffle_down(pixel_shuffle_up(s, 2), 2), s);
  const Tensor four = oracle::random_tensor(2, 2, 4, 3);
  EXPECT_EQ(pixel_shuffle_down(pixel_shuffle_up(four, 2), 2), four);
}

TEST(LeakyRelu, Definition) {
  const Tensor pos = oracle::random_tensor(3, 5, 1, 1, 0.0, 1.0);
  EXPECT_EQ(leaky_relu(pos, 0.01), pos);
  EXPECT_DOUBLE_EQ(leaky_relu(Tensor(1, 1, 1, -1.0), 0.01)(0, 0), -0.01);
  const Tensor any = oracle::random_tensor(7, 3, 2, 2);
  EXPECT_EQ(leaky_relu(any, 1.0), any);
}

TEST(Resize, IdentityConstantAndRamp) {
  const Tensor t = oracle::random_tensor(5, 7, 2, 8);
  EXPECT_EQ(resize(t, 5, 7, ResizeMode::nearest), t);
  for (ResizeMode m : {ResizeMode::nearest, ResizeMode::bilinear}) {
    {
      const auto held = resize(Tensor(4, 6, 1, 0.7), 9, 3, m);
      for (double v : held.data()) EXPECT_NEAR(v, 0.7, 1e-15);
    }
  }
  // source positions (i + 0.5) * 2/3 - 0.5 = -1/6, 1/2, 7/6, clamped to [0, 1]
  const Tensor ramp = resize(Tensor(1, 2, 1, {0.0, 1.0}), 1, 3, ResizeMode::bilinear);
  EXPECT_NEAR(ramp(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(ramp(0, 1), 0.5, 1e-15);
  EXPECT_NEAR(ramp(0, 2), 1.0, 1e-15);
  // nearest: source index floor((i + 0.5) * in / out)
  const Tensor nn = resize(Tensor(1, 3, 1, {1.0, 2.0, 3.0}), 1, 6, ResizeMode::nearest);
  EXPECT_EQ(nn, Tensor(1, 6, 1, {1, 1, 2, 2, 3, 3}));
}

TEST(Resize, Linearity) {
  const Tensor a = oracle::random_tensor(6, 5, 1, 1), b = oracle::random_tensor(6, 5, 1, 2);
  for (ResizeMode m : {ResizeMode::nearest, ResizeMode::bilinear}) {
    const Tensor lhs = resize(0.5 * a + 2.0 * b, 11, 4, m);
    const Tensor rhs = 0.5 * resize(a, 11, 4, m) + 2.0 * resize(b, 11, 4, m);
    EXPECT_LT(oracle::rel_err(lhs, rhs), 1e-10);
  }
}

namespace {

KernelBank random_bank(int o, int i, int kh, int kw, std::uint64_t seed) {
  KernelBank k(o, i, kh, kw);
  const Tensor r = oracle::random_tensor(1, static_cast<int>(k.values().size()), 1, seed);
  std::copy(r.data().begin(), r.data().end(), k.values().begin());
  return k;
}

}  // namespace

TEST(Conv2d, IdentityAndAveraging) {
  const Tensor t = oracle::random_tensor(5, 6, 2, 1);
  KernelBank id(2, 2, 1, 1);
  id(0, 0, 0, 0) = 1.0;
  id(1, 1, 0, 0) = 1.0;
  EXPECT_EQ(conv2d(t, id), t);
  KernelBank avg(1, 1, 3, 3, 1.0 / 9.0);
  const Tensor c = conv2d(Tensor(6, 6, 1, 4.0), avg, 1, 0);
  EXPECT_EQ(c.height(), 4);
  for (double v : c.data()) EXPECT_NEAR(v, 4.0, 1e-14);
}

TEST(Conv2d, MatchesNaiveOracle) {
  const Tensor t = oracle::random_tensor(5, 5, 1, 3);
  const KernelBank k = random_bank(1, 1, 3, 3, 4);
  EXPECT_LT(oracle::rel_err(conv2d(t, k, 1, 0), oracle::conv2d(t, k, 1, 0, {})), 1e-12);
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    std::uniform_int_distribution<int> dim(3, 8), ch(1, 3), ks(0, 2), st(1, 2), pd(0, 2);
    const int h = dim(rng), w = dim(rng), ci = ch(rng), co = ch(rng);
    const int kh = 2 * ks(rng) + 1, kw = 2 * ks(rng) + 1, stride = st(rng), pad = pd(rng);
    if (h + 2 * pad < kh || w + 2 * pad < kw) continue;
    const Tensor x = oracle::random_tensor(h, w, ci, 100 + trial);
    const KernelBank kb = random_bank(co, ci, kh, kw, 200 + trial);
    std::vector<double> bias(co);
    for (int o = 0; o < co; ++o) bias[o] = 0.1 * o - 0.05;
    EXPECT_LT(oracle::rel_err(conv2d(x, kb, stride, pad, bias), oracle::conv2d(x, kb, stride, pad, bias)), 1e-12)
        << "trial " << trial;
  }
}

TEST(Conv2d, ChannelMismatchAndEvenKernel) {
  EXPECT_THROW(conv2d(Tensor(4, 4, 2), KernelBank(1, 3, 3, 3)), InvalidArgument);
  EXPECT_THROW(conv2d(Tensor(4, 4, 1), KernelBank(1, 1, 2, 3)), InvalidArgument);
}

TEST(Conv2d, Linearity) {
  const Tensor a = oracle::random_tensor(6, 7, 2, 1), b = oracle::random_tensor(6, 7, 2, 2);
  const KernelBank k = random_bank(3, 2, 3, 3, 5);
  const Tensor lhs = conv2d(1.5 * a + (-0.5) * b, k, 1, 1);
  const Tensor rhs = 1.5 * conv2d(a, k, 1, 1) + (-0.5) * conv2d(b, k, 1, 1);
  EXPECT_LT(oracle::rel_err(lhs, rhs), 1e-10);
}

TEST(Conv2d, BackwardMatchesFiniteDifferences) {
  const Tensor x = oracle::random_tensor(5, 6, 2, 8);
  KernelBank k = random_bank(3, 2, 3, 3, 9);
  std::vector<double> bias{0.1, -0.2, 0.3};
  const Tensor g = oracle::random_tensor(5, 6, 3, 10);
  auto loss = [&](const Tensor& in, const KernelBank& kk, const std::vector<double>& bb) {
    const Tensor y = conv2d(in, kk, 1, 1, bb);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y.data()[i] * g.data()[i];
    return s;
  };
  const Tensor gx = conv2d_backward_input(g, k, 1, 5, 6);
  KernelBank gk(3, 2, 3, 3);
  std::vector<double> gb(3, 0.0);
  conv2d_backward_params(x, g, 1, gk, gb);
  const double h = 1e-6;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Tensor p = x, m = x;
    p.data()[i] += h;
    m.data()[i] -= h;
    EXPECT_NEAR(gx.data()[i], (loss(p, k, bias) - loss(m, k, bias)) / (2 * h), 1e-7);
  }
  for (std::size_t i = 0; i < k.values().size(); ++i) {
    KernelBank p = k, m = k;
    p.values()[i] += h;
    m.values()[i] -= h;
    EXPECT_NEAR(gk.values()[i], (loss(x, p, bias) - loss(x, m, bias)) / (2 * h), 1e-7);
  }
  for (int o = 0; o < 3; ++o) {
    auto p = bias, m = bias;
    p[o] += h;
    m[o] -= h;
    EXPECT_NEAR(gb[o], (loss(x, k, p) - loss(x, k, m)) / (2 * h), 1e-7);
  }
}

TEST(MatrixOps, ProductsMatchNaive) {
  const Matrix a = oracle::random_matrix(7, 5, 1), b = oracle::random_matrix(5, 9, 2);
  EXPECT_LT(oracle::rel_err(matmul(a, b), oracle::matmul(a, b)), 1e-14);
  Matrix c(5, 9, 1.0);
  const Matrix a2 = oracle::random_matrix(7, 5, 3), b2 = oracle::random_matrix(7, 9, 4);
  matmul_at_b_accumulate(a2, b2, c);
  Matrix want = oracle::matmul(oracle::transpose(a2), b2);
  for (double& v : want.data()) v += 1.0;
  EXPECT_LT(oracle::rel_err(c, want), 1e-14);
  Matrix d(5, 5);
  const Matrix b3 = oracle::random_matrix(5, 9, 5);
  matmul_a_bt_accumulate(b, b3, d);
  EXPECT_LT(oracle::rel_err(d, oracle::matmul(b, oracle::transpose(b3))), 1e-14);
  EXPECT_THROW(matmul(a, a), InvalidArgument);
}

TEST(TensorInvariants, LengthAndFiniteness) {
  const Tensor t(3, 4, 5);
  EXPECT_EQ(t.size(), 60u);
  EXPECT_TRUE(t.all_finite());
  EXPECT_THROW(Tensor(2, 2, 1, std::vector<double>(3)), InvalidArgument);
  Tensor bad(1, 2, 1);
  bad(0, 1) = std::nan("");
  EXPECT_FALSE(bad.all_finite());
}
