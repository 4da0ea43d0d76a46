#include "lensless/init.hpp"

#include <cmath>
#include <random>
#include <string>

#include "lensless/classic.hpp"
#include "lensless/error.hpp"
#include "lensless/fft.hpp"

namespace lensless {

Slopes slope_from_geometry(const CameraGeometry& g) {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string("geometry field ") + name + " must be > 0");
  };
  positive(g.pixel_pitch, "pixel_pitch");
  positive(g.mask_sensor_dist, "mask_sensor_dist");
  positive(g.scene_dist, "scene_dist");
  positive(g.scene_height, "scene_height");
  positive(g.scene_width, "scene_width");
  if (g.recon_rows < 1 || g.recon_cols < 1) throw InvalidArgument("geometry reconstruction dims must be >= 1");
  const double scale = g.mask_sensor_dist / (g.pixel_pitch * g.scene_dist);
  return {g.recon_rows / (g.scene_height * scale), g.recon_cols / (g.scene_width * scale)};
}

Matrix gen_slope_toeplitz(int rows, int cols, double slope, ResizeMode mode, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw InvalidArgument("gen_slope_toeplitz: dims must be >= 1");
  if (!(slope > 0.0)) throw InvalidArgument("gen_slope_toeplitz: slope must be > 0");
  const int stretched = static_cast<int>(std::lround(slope * rows));
  if (cols > stretched) {
    throw InvalidArgument("gen_slope_toeplitz: " + std::to_string(cols) + " columns do not fit in the " +
                          std::to_string(stretched) + "-column stretched circulant");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> v(rows);
  for (double& e : v) e = uniform(rng);

  Tensor circulant(rows, rows, 1);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < rows; ++k) circulant(i, k) = v[((i - k) % rows + rows) % rows];
  const Tensor resized = resize(circulant, rows, stretched, mode);
  std::uniform_int_distribution<int> offset_dist(0, stretched - cols);
  const int offset = offset_dist(rng);
  return to_matrix(crop(resized, 0, offset, rows, cols));
}

SepInversionWeights init_sep_calibrated(const SeparableSystem& sys, int in_channels) {
  return {sys.phi_l.transpose(), sys.phi_r, default_channel_mix(in_channels)};
}

SepInversionWeights init_sep_uncalibrated(const CameraGeometry& g, std::uint64_t seed, ResizeMode mode,
                                          int in_channels) {
  g.validate();
  const Slopes m = slope_from_geometry(g);
  const Matrix left = gen_slope_toeplitz(g.sensor_rows, g.recon_rows, m.left, mode, seed);
  const Matrix right = gen_slope_toeplitz(g.sensor_cols, g.recon_cols, m.right, mode, seed ^ 0x9E3779B97F4A7C15ULL);
  return {left.transpose(), right, default_channel_mix(in_channels)};
}

GenInversionWeights init_gen_calibrated(const Psf& psf, double k, int h, int w, int in_channels) {
  if (!(k > 0.0)) throw InvalidArgument("init_gen_calibrated: K must be > 0");
  psf.validate();
  Psf mono = psf;
  if (psf.kernel.channels() > 1) {
    Tensor avg(psf.kernel.height(), psf.kernel.width(), 1);
    for (int c = 0; c < psf.kernel.channels(); ++c) avg += psf.kernel.channel(c);
    avg *= 1.0 / psf.kernel.channels();
    mono.kernel = avg;
  }
  const Tensor w_spatial = ifft2_real(wiener_filter(mono, k, h, w));
  return {w_spatial, default_channel_mix(in_channels)};
}

GenInversionWeights init_gen_uncalibrated(const MaskHeightProfile& mask, const CameraGeometry& g, double wavelength,
                                          double k, int h, int w, int in_channels) {
  const Psf psf = simulate_psf_fresnel(mask, wavelength, g.mask_sensor_dist, g.pixel_pitch).normalized();
  return init_gen_calibrated(psf, k, h, w, in_channels);
}

}  // namespace lensless
