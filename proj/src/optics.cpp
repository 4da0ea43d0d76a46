#include "lensless/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "lensless/error.hpp"
#include "lensless/fft.hpp"
#include "lensless/init.hpp"
#include "lensless/ops.hpp"

namespace lensless {
namespace {

double dft_frequency(int k, int n, double pitch) {
  const int kk = (k <= (n - 1) / 2) ? k : k - n;
  // Nyquist bin of an even grid maps to -n/2; the chirp is even so the sign is irrelevant.
  return static_cast<double>(kk) / (n * pitch);
}

}  // namespace

void MaskHeightProfile::validate() const {
  if (heights.empty() || heights.channels() != 1) throw InvalidArgument("mask heights must be a non-empty 1-channel tensor");
  for (double h : heights.data()) {
    if (!(h >= 0.0) || !std::isfinite(h)) throw InvalidArgument("mask heights must be finite and >= 0");
  }
  if (!(feature_pitch > 0.0)) throw InvalidArgument("mask feature_pitch must be > 0");
  if (!(refractive_index > 1.0)) throw InvalidArgument("mask refractive_index must be > 1");
}

void Psf::validate() const {
  if (kernel.empty()) throw InvalidArgument("psf kernel is empty");
  if (kernel.channels() != 1 && kernel.channels() != 3) throw InvalidArgument("psf must have 1 or 3 channels");
  for (double v : kernel.data()) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("psf values must be finite and >= 0");
  }
  for (int c = 0; c < kernel.channels(); ++c) {
    if (!(kernel.channel(c).sum() > 0.0)) throw InvalidArgument("psf channel sums must be > 0");
  }
  if (!(pitch > 0.0)) throw InvalidArgument("psf pitch must be > 0");
}

Psf Psf::normalized() const {
  validate();
  Psf out = *this;
  for (int c = 0; c < kernel.channels(); ++c) {
    Tensor plane = kernel.channel(c);
    plane *= 1.0 / plane.sum();
    out.kernel.set_channel(c, plane);
  }
  return out;
}

void CameraGeometry::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string("geometry field ") + name + " must be > 0");
  };
  positive(pixel_pitch, "pixel_pitch");
  positive(mask_sensor_dist, "mask_sensor_dist");
  positive(scene_dist, "scene_dist");
  positive(scene_height, "scene_height");
  positive(scene_width, "scene_width");
  if (recon_rows < 1 || recon_cols < 1) throw InvalidArgument("geometry reconstruction dims must be >= 1");
  if (sensor_rows < 1 || sensor_cols < 1) throw InvalidArgument("geometry sensor dims must be >= 1");
}

void SeparableSystem::validate() const {
  const auto check = [](const Matrix& m, const char* name) {
    if (m.size() == 0) throw InvalidArgument(std::string(name) + " is empty");
    if (!m.all_finite()) throw InvalidArgument(std::string(name) + " has non-finite entries");
    if (m.frobenius_sq() == 0.0) throw InvalidArgument(std::string(name) + " is all zero");
  };
  check(phi_l, "phi_l");
  check(phi_r, "phi_r");
}

ComplexSpectrum fresnel_transfer(int h, int w, double wavelength, double distance, double pitch) {
  if (!(wavelength > 0.0) || !(distance > 0.0) || !(pitch > 0.0)) {
    throw InvalidArgument("fresnel: wavelength, distance and pitch must be > 0");
  }
  const double lambda_d = wavelength * distance;
  for (int n : {h, w}) {
    const double limit = n * pitch * pitch;
    if (lambda_d > limit * (1.0 + 1e-9)) {
      std::ostringstream msg;
      msg << "fresnel transfer function aliases: lambda*d = " << lambda_d << " m^2 exceeds N*pitch^2 = " << limit
          << " m^2 (N = " << n << ", pitch = " << pitch << " m); reduce the distance or enlarge the grid";
      throw InvalidArgument(msg.str());
    }
  }
  ComplexSpectrum tf(h, w, 1);
  for (int ky = 0; ky < h; ++ky) {
    const double fy = dft_frequency(ky, h, pitch);
    for (int kx = 0; kx < w; ++kx) {
      const double fx = dft_frequency(kx, w, pitch);
      const double phase = -std::numbers::pi * lambda_d * (fx * fx + fy * fy);
      tf(ky, kx) = Complex(std::cos(phase), std::sin(phase));
    }
  }
  return tf;
}

ComplexSpectrum propagate_fresnel(const ComplexSpectrum& field, double wavelength, double distance, double pitch) {
  const ComplexSpectrum tf = fresnel_transfer(field.height(), field.width(), wavelength, distance, pitch);
  return ifft2_complex(hadamard(fft2_complex(field), tf));
}

ComplexSpectrum mask_field(const MaskHeightProfile& mask, double wavelength) {
  mask.validate();
  if (!(wavelength > 0.0)) throw InvalidArgument("wavelength must be > 0");
  const Tensor& h = mask.heights;
  ComplexSpectrum field(h.height(), h.width(), 1);
  const double k = 2.0 * std::numbers::pi * (mask.refractive_index - 1.0) / wavelength;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double phi = k * h.data()[i];
    field.data()[i] = Complex(std::cos(phi), std::sin(phi));
  }
  return field;
}

Psf simulate_psf_fresnel(const MaskHeightProfile& mask, double wavelength, double distance, double out_pitch) {
  if (!(out_pitch > 0.0)) throw InvalidArgument("out_pitch must be > 0");
  const ComplexSpectrum field = propagate_fresnel(mask_field(mask, wavelength), wavelength, distance, mask.feature_pitch);
  Tensor intensity(field.height(), field.width(), 1);
  for (std::size_t i = 0; i < field.size(); ++i) intensity.data()[i] = std::norm(field.data()[i]);
  const double ratio = mask.feature_pitch / out_pitch;
  const int oh = std::max(1, static_cast<int>(std::lround(field.height() * ratio)));
  const int ow = std::max(1, static_cast<int>(std::lround(field.width() * ratio)));
  Psf psf;
  psf.pitch = out_pitch;
  psf.kernel = (oh == field.height() && ow == field.width()) ? intensity : resize(intensity, oh, ow, ResizeMode::bilinear);
  for (double& v : psf.kernel.data()) v = std::max(v, 0.0);
  return psf;
}

Psf simulate_psf_fresnel_rgb(const MaskHeightProfile& mask, double distance, double out_pitch) {
  std::vector<Tensor> planes;
  for (double lambda : kRgbWavelengths) planes.push_back(simulate_psf_fresnel(mask, lambda, distance, out_pitch).kernel);
  return Psf{Tensor::stack(planes), out_pitch};
}

Matrix separable_factor(const std::vector<int>& code, int sensor, int recon, double slope, double blur_sigma) {
  if (static_cast<int>(code.size()) < recon) {
    throw InvalidArgument("mask code of length " + std::to_string(code.size()) + " is shorter than the " +
                          std::to_string(recon) + "-pixel reconstruction dimension");
  }
  if (!(slope > 0.0)) throw InvalidArgument("separable slope must be > 0");
  for (int v : code) {
    if (v != 1 && v != -1) throw InvalidArgument("mask codes must contain only +1 and -1");
  }
  const long len = static_cast<long>(code.size());
  Matrix phi(sensor, recon);
  for (int i = 0; i < sensor; ++i) {
    const long base = static_cast<long>(std::floor(slope * i)) + recon - 1;
    for (int j = 0; j < recon; ++j) {
      const long idx = ((base - j) % len + len) % len;
      phi(i, j) = 0.5 * (code[idx] + 1);
    }
  }
  if (blur_sigma > 0.0) {
    const std::vector<double> k = gaussian_kernel(blur_sigma);
    const int r = static_cast<int>(k.size() / 2);
    Matrix blurred(sensor, recon);
    for (int j = 0; j < recon; ++j)
      for (int i = 0; i < sensor; ++i) {
        double s = 0.0;
        for (int t = -r; t <= r; ++t) s += k[t + r] * phi(std::clamp(i + t, 0, sensor - 1), j);
        blurred(i, j) = s;
      }
    phi = std::move(blurred);
  }
  return phi;
}

SeparableSystem simulate_separable_system(const std::vector<int>& code_l, const std::vector<int>& code_r,
                                          const CameraGeometry& geometry, double blur_sigma) {
  geometry.validate();
  const auto [m_l, m_r] = slope_from_geometry(geometry);
  SeparableSystem sys{separable_factor(code_l, geometry.sensor_rows, geometry.recon_rows, m_l, blur_sigma),
                      separable_factor(code_r, geometry.sensor_cols, geometry.recon_cols, m_r, blur_sigma)};
  sys.validate();
  return sys;
}

}  // namespace lensless
