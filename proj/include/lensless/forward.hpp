#pragma once

// Measurement synthesis for the general, separable, convolutional and
// cropped-convolutional lensless models, plus noise and Bayer plumbing.

#include <cstdint>

#include "lensless/optics.hpp"
#include "lensless/tensor.hpp"

namespace lensless {

/// y = phi * vec(x) per channel, where vec stacks columns (column-major), and
/// the result is un-vectorized the same way into out_rows x out_cols.
Tensor forward_general(const Matrix& phi, const Tensor& x, int out_rows, int out_cols);

/// Y = phi_l X phi_r^T + N per channel, N ~ Gaussian(0, sigma^2) drawn from `seed`.
Tensor forward_separable(const SeparableSystem& sys, const Tensor& x, double noise_sigma, std::uint64_t seed = 0);

/// Full linear convolution P * X (dims Hx+Hp-1 by Wx+Wp-1) plus noise.
/// A 1-channel PSF applies to every channel of x.
Tensor forward_conv(const Psf& psf, const Tensor& x, double noise_sigma, std::uint64_t seed = 0);

/// Centered sensor crop of the full convolution plus noise.
Tensor forward_cropconv(const Psf& psf, const Tensor& x, int sensor_rows, int sensor_cols, double noise_sigma,
                        std::uint64_t seed = 0);

/// Circular convolution on the grid of x with the PSF center
/// (floor((Hp-1)/2), floor((Wp-1)/2)) anchored at the origin.
Tensor forward_circular(const Psf& psf, const Tensor& x);

/// DFT of the PSF embedded in an h x w grid with its center at the origin
/// (the convention shared by Wiener filtering and the learned inversion).
ComplexSpectrum psf_transfer(const Tensor& psf, int h, int w);

/// Adds i.i.d. Gaussian noise; sigma = 0 returns the input unchanged.
Tensor add_gaussian_noise(const Tensor& t, double sigma, std::uint64_t seed);

/// RGGB raw (even dims, 1 channel) -> half-resolution (R, Gr, Gb, B).
Tensor bayer_split(const Tensor& raw);
/// Exact inverse of bayer_split.
Tensor bayer_join(const Tensor& planes);
/// RGB -> RGGB raw by per-pixel channel selection.
Tensor mosaic_rgb(const Tensor& rgb);

}  // namespace lensless
