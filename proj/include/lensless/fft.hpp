#pragma once

// 2-D discrete Fourier transforms, applied independently per channel.
//
// Convention: unnormalized forward transform, 1/(H*W) on the inverse, so
// ifft2(fft2(t) (.) fft2(k)) is exactly the circular convolution t (*) k.
// Arbitrary sizes are supported; nothing is padded to a power of two.

#include "lensless/tensor.hpp"

namespace lensless {

ComplexSpectrum fft2(const Tensor& t);

/// Inverse transform of a spectrum whose inverse is real. Throws NumericError
/// when the imaginary residue exceeds 1e-6 of the largest output magnitude.
Tensor ifft2(const ComplexSpectrum& s);

/// Complex-to-complex variants used for optical fields.
ComplexSpectrum fft2_complex(const ComplexSpectrum& field);
ComplexSpectrum ifft2_complex(const ComplexSpectrum& spectrum);

/// Elementwise product. A 1-channel `b` broadcasts across the channels of `a`.
ComplexSpectrum hadamard(const ComplexSpectrum& a, const ComplexSpectrum& b);
/// Elementwise conj(a) * b with the same broadcasting rule.
ComplexSpectrum hadamard_conj(const ComplexSpectrum& a, const ComplexSpectrum& b);

/// Real part of the inverse transform, without the residue check. For
/// products that are real only up to rounding or by construction.
Tensor ifft2_real(const ComplexSpectrum& s);

}  // namespace lensless
