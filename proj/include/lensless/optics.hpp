#pragma once

// Lensless-camera optics: Fresnel simulation of phase-mask PSFs and synthesis
// of separable calibration matrices from 1-D mask codes.

#include <array>
#include <vector>

#include "lensless/tensor.hpp"

namespace lensless {

/// Thin phase mask: heights in meters sampled every `feature_pitch` meters.
struct MaskHeightProfile {
  Tensor heights;
  double feature_pitch = 0.0;
  double refractive_index = 1.5;

  /// Throws InvalidArgument on negative heights, non-positive pitch or n <= 1.
  void validate() const;
};

/// Point spread function sampled at `pitch` meters per pixel.
struct Psf {
  Tensor kernel;
  double pitch = 1.0;

  void validate() const;
  /// Copy scaled so every channel sums to one.
  Psf normalized() const;
};

struct CameraGeometry {
  double pixel_pitch = 0.0;       ///< p, meters
  double mask_sensor_dist = 0.0;  ///< d, meters
  double scene_dist = 0.0;        ///< z, meters
  double scene_height = 0.0;      ///< H, meters
  double scene_width = 0.0;       ///< W, meters
  int recon_rows = 0;             ///< P
  int recon_cols = 0;             ///< Q
  int sensor_rows = 0;
  int sensor_cols = 0;

  void validate() const;
};

/// Separable forward operator Y = phi_l X phi_r^T.
struct SeparableSystem {
  Matrix phi_l;  ///< sensor_rows x recon_rows
  Matrix phi_r;  ///< sensor_cols x recon_cols

  void validate() const;
};

/// Default wavelengths (m) used for R, G, B when a color PSF is requested.
inline constexpr std::array<double, 3> kRgbWavelengths{640e-9, 532e-9, 460e-9};

/// exp(-i pi lambda d (fx^2 + fy^2)) on the DFT frequency grid of an h x w
/// field sampled at `pitch`. Throws InvalidArgument when lambda d exceeds
/// N pitch^2 along either axis (the transfer function would alias).
ComplexSpectrum fresnel_transfer(int h, int w, double wavelength, double distance, double pitch);

/// Propagate a complex field by `distance` with the Fresnel transfer function.
ComplexSpectrum propagate_fresnel(const ComplexSpectrum& field, double wavelength, double distance, double pitch);

/// Unit plane wave through the mask phase 2 pi (n - 1) h / lambda.
ComplexSpectrum mask_field(const MaskHeightProfile& mask, double wavelength);

/// Single-wavelength PSF: |propagated field|^2 resampled to `out_pitch`.
Psf simulate_psf_fresnel(const MaskHeightProfile& mask, double wavelength, double distance, double out_pitch);

/// 3-channel PSF at kRgbWavelengths.
Psf simulate_psf_fresnel_rgb(const MaskHeightProfile& mask, double distance, double out_pitch);

/// Separable system from two +-1 mask codes.
///
/// Column j of phi_l reads the code (mapped to {0,1}) at stride m_l down the
/// sensor rows, shifted by one code element per scene pixel:
///   phi_l(i, j) = b_l[(floor(m_l i) + P - 1 - j) mod len(code_l)]
/// where m_l comes from slope_from_geometry. Entries are therefore constant
/// along lines of slope m_l. A Gaussian blur of std `blur_sigma` (pixels,
/// 0 disables) is applied down each column. Codes must be at least as long as
/// the matching reconstruction dimension.
SeparableSystem simulate_separable_system(const std::vector<int>& code_l, const std::vector<int>& code_r,
                                          const CameraGeometry& geometry, double blur_sigma);

/// One factor of simulate_separable_system for an explicit slope.
Matrix separable_factor(const std::vector<int>& code, int sensor, int recon, double slope, double blur_sigma);

}  // namespace lensless
