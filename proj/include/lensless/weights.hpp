#pragma once

// Trainable parameter containers of the learned reconstruction pipeline.

#include <vector>

#include "lensless/ops.hpp"
#include "lensless/tensor.hpp"

namespace lensless {

/// Separable inversion X = mix(f(W1 Y W2)).
struct SepInversionWeights {
  Matrix w1;           ///< recon_rows x sensor_rows
  Matrix w2;           ///< sensor_cols x recon_cols
  Matrix channel_mix;  ///< out_channels x in_channels
  double leaky_slope = 0.01;
};

/// Fourier-domain inversion X = mix(crop(F^-1(F(W) (.) F(pad(Y))))).
struct GenInversionWeights {
  Tensor w;            ///< 1 channel, padded-measurement dims
  Matrix channel_mix;  ///< out_channels x in_channels
};

struct ConvLayer {
  KernelBank kernels;
  std::vector<double> bias;
};

/// Residual convolutional enhancer operating on pixel-shuffled inputs.
struct EnhancerWeights {
  std::vector<ConvLayer> layers;
  int shuffle_factor = 2;
  double leaky_slope = 0.01;

  void validate() const;
};

/// Initial measurement-to-output channel map: 4 Bayer planes map to
/// [R; (Gr+Gb)/2; B], any other count maps to itself.
Matrix default_channel_mix(int in_channels);

/// Output channel count produced by default_channel_mix.
int default_output_channels(int in_channels);

}  // namespace lensless
