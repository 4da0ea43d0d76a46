#pragma once

// Calibrated and uncalibrated initialization of the trainable inversion.

#include <cstdint>

#include "lensless/ops.hpp"
#include "lensless/optics.hpp"
#include "lensless/weights.hpp"

namespace lensless {

struct Slopes {
  double left = 0.0;   ///< m_L = P / (H d / (p z))
  double right = 0.0;  ///< m_R = Q / (W d / (p z))
};

/// Scene pixels per sensor pixel along each axis for the given geometry.
Slopes slope_from_geometry(const CameraGeometry& g);

/// Slope-matched pseudo-random Toeplitz matrix (rows x cols): a circulant
/// matrix of a uniform [0,1) vector of length `rows` is resized to
/// rows x round(slope * rows) and a rows x cols window is cut out at a
/// seed-derived column offset.
Matrix gen_slope_toeplitz(int rows, int cols, double slope, ResizeMode mode, std::uint64_t seed);

/// W1 = phi_l^T, W2 = phi_r.
SepInversionWeights init_sep_calibrated(const SeparableSystem& sys, int in_channels = 1);

/// Transposed/plain slope-matched Toeplitz stand-ins for phi_l / phi_r.
SepInversionWeights init_sep_uncalibrated(const CameraGeometry& g, std::uint64_t seed,
                                          ResizeMode mode = ResizeMode::bilinear, int in_channels = 1);

/// Spatial Wiener kernel F^-1(conj(H) / (K + |H|^2)) on an h x w grid. A
/// 3-channel PSF is averaged to one channel first.
GenInversionWeights init_gen_calibrated(const Psf& psf, double k, int h, int w, int in_channels = 1);

/// Simulates the PSF of `mask` at the geometry's mask-sensor distance and pixel
/// pitch, normalizes it to unit sum, and applies init_gen_calibrated.
GenInversionWeights init_gen_uncalibrated(const MaskHeightProfile& mask, const CameraGeometry& g, double wavelength,
                                          double k, int h, int w, int in_channels = 1);

}  // namespace lensless
