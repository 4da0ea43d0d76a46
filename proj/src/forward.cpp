#include "lensless/forward.hpp"

#include <random>
#include <string>

#include "lensless/error.hpp"
#include "lensless/fft.hpp"
#include "lensless/ops.hpp"

namespace lensless {
namespace {

void require_psf_channels(const Tensor& psf, const Tensor& x) {
  if (psf.channels() != 1 && psf.channels() != x.channels()) {
    throw InvalidArgument("psf has " + std::to_string(psf.channels()) + " channels but the scene has " +
                          std::to_string(x.channels()));
  }
}

}  // namespace

Tensor forward_general(const Matrix& phi, const Tensor& x, int out_rows, int out_cols) {
  const int n_in = x.height() * x.width();
  if (phi.cols() != n_in) {
    throw InvalidArgument("forward_general: phi has " + std::to_string(phi.cols()) + " columns, scene has " +
                          std::to_string(n_in) + " pixels");
  }
  if (phi.rows() != out_rows * out_cols) throw InvalidArgument("forward_general: phi rows do not match output dims");
  const int c = x.channels();
  Tensor y(out_rows, out_cols, c);
  std::vector<double> v(n_in);
  for (int ch = 0; ch < c; ++ch) {
    for (int col = 0; col < x.width(); ++col)
      for (int row = 0; row < x.height(); ++row) v[static_cast<std::size_t>(col) * x.height() + row] = x(row, col, ch);
    for (int r = 0; r < phi.rows(); ++r) {
      double s = 0.0;
      const auto prow = phi.row(r);
      for (int k = 0; k < n_in; ++k) s += prow[k] * v[k];
      y(r % out_rows, r / out_rows, ch) = s;
    }
  }
  return y;
}

Tensor forward_separable(const SeparableSystem& sys, const Tensor& x, double noise_sigma, std::uint64_t seed) {
  if (x.height() != sys.phi_l.cols() || x.width() != sys.phi_r.cols()) {
    throw InvalidArgument("forward_separable: scene " + std::to_string(x.height()) + "x" + std::to_string(x.width()) +
                          " does not match system " + std::to_string(sys.phi_l.cols()) + "x" +
                          std::to_string(sys.phi_r.cols()));
  }
  if (noise_sigma < 0.0) throw InvalidArgument("noise sigma must be >= 0");
  const Matrix phi_rt = sys.phi_r.transpose();
  std::vector<Tensor> planes;
  for (int ch = 0; ch < x.channels(); ++ch) {
    const Matrix xc = to_matrix(x.channel(ch));
    planes.push_back(to_tensor(matmul(matmul(sys.phi_l, xc), phi_rt)));
  }
  return add_gaussian_noise(Tensor::stack(planes), noise_sigma, seed);
}

Tensor forward_conv(const Psf& psf, const Tensor& x, double noise_sigma, std::uint64_t seed) {
  require_psf_channels(psf.kernel, x);
  if (noise_sigma < 0.0) throw InvalidArgument("noise sigma must be >= 0");
  const int h = x.height() + psf.kernel.height() - 1, w = x.width() + psf.kernel.width() - 1;
  const ComplexSpectrum xs = fft2(embed(x, h, w, 0, 0));
  const ComplexSpectrum ps = fft2(embed(psf.kernel, h, w, 0, 0));
  return add_gaussian_noise(ifft2_real(hadamard(xs, ps)), noise_sigma, seed);
}

Tensor forward_cropconv(const Psf& psf, const Tensor& x, int sensor_rows, int sensor_cols, double noise_sigma,
                        std::uint64_t seed) {
  const int h = x.height() + psf.kernel.height() - 1, w = x.width() + psf.kernel.width() - 1;
  if (sensor_rows > h || sensor_cols > w) {
    throw InvalidArgument("forward_cropconv: sensor " + std::to_string(sensor_rows) + "x" + std::to_string(sensor_cols) +
                          " exceeds full convolution " + std::to_string(h) + "x" + std::to_string(w));
  }
  return add_gaussian_noise(crop_center(forward_conv(psf, x, 0.0), sensor_rows, sensor_cols), noise_sigma, seed);
}

ComplexSpectrum psf_transfer(const Tensor& psf, int h, int w) {
  if (psf.height() > h || psf.width() > w) throw InvalidArgument("psf_transfer: psf larger than the grid");
  const int cy = (psf.height() - 1) / 2, cx = (psf.width() - 1) / 2;
  Tensor canvas(h, w, psf.channels());
  for (int y = 0; y < psf.height(); ++y)
    for (int x = 0; x < psf.width(); ++x)
      for (int c = 0; c < psf.channels(); ++c) canvas(((y - cy) % h + h) % h, ((x - cx) % w + w) % w, c) = psf(y, x, c);
  return fft2(canvas);
}

Tensor forward_circular(const Psf& psf, const Tensor& x) {
  require_psf_channels(psf.kernel, x);
  return ifft2_real(hadamard(fft2(x), psf_transfer(psf.kernel, x.height(), x.width())));
}

Tensor add_gaussian_noise(const Tensor& t, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw InvalidArgument("noise sigma must be >= 0");
  if (sigma == 0.0) return t;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  Tensor out = t;
  for (double& v : out.data()) v += dist(rng);
  return out;
}

Tensor bayer_split(const Tensor& raw) {
  if (raw.channels() != 1) throw InvalidArgument("bayer_split: raw must have one channel");
  if (raw.height() % 2 != 0 || raw.width() % 2 != 0) throw InvalidArgument("bayer_split: raw dims must be even");
  const int h = raw.height() / 2, w = raw.width() / 2;
  Tensor out(h, w, 4);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      out(y, x, 0) = raw(2 * y, 2 * x);
      out(y, x, 1) = raw(2 * y, 2 * x + 1);
      out(y, x, 2) = raw(2 * y + 1, 2 * x);
      out(y, x, 3) = raw(2 * y + 1, 2 * x + 1);
    }
  return out;
}

Tensor bayer_join(const Tensor& planes) {
  if (planes.channels() != 4) throw InvalidArgument("bayer_join: expected 4 channels");
  Tensor raw(planes.height() * 2, planes.width() * 2, 1);
  for (int y = 0; y < planes.height(); ++y)
    for (int x = 0; x < planes.width(); ++x) {
      raw(2 * y, 2 * x) = planes(y, x, 0);
      raw(2 * y, 2 * x + 1) = planes(y, x, 1);
      raw(2 * y + 1, 2 * x) = planes(y, x, 2);
      raw(2 * y + 1, 2 * x + 1) = planes(y, x, 3);
    }
  return raw;
}

Tensor mosaic_rgb(const Tensor& rgb) {
  if (rgb.channels() != 3) throw InvalidArgument("mosaic_rgb: expected 3 channels");
  if (rgb.height() % 2 != 0 || rgb.width() % 2 != 0) throw InvalidArgument("mosaic_rgb: dims must be even");
  Tensor raw(rgb.height(), rgb.width(), 1);
  for (int y = 0; y < rgb.height(); ++y)
    for (int x = 0; x < rgb.width(); ++x) {
      const int c = (y % 2 == 0) ? (x % 2 == 0 ? 0 : 1) : (x % 2 == 0 ? 1 : 2);
      raw(y, x) = rgb(y, x, c);
    }
  return raw;
}

}  // namespace lensless
