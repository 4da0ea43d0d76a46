#pragma once

// Training losses and image-quality metrics.

#include <limits>
#include <vector>

#include "lensless/tensor.hpp"

namespace lensless {

/// A scalar loss and its gradient with respect to the prediction.
struct LossValue {
  double value = 0.0;
  Tensor grad;
};

/// mean((a - b)^2); gradient 2 (a - b) / N with respect to `a`.
LossValue mse(const Tensor& a, const Tensor& b);

/// sum_i w_i L_i with gradients combined the same way.
LossValue weighted_total(const std::vector<LossValue>& terms, const std::vector<double>& weights);

using FeatureSet = std::vector<std::vector<double>>;

/// Mean over p of the smallest cosine distance 1 - <p,q>/(|p||q|) to any q.
/// A zero vector is at distance 1 from everything.
double contextual_loss(const FeatureSet& p, const FeatureSet& q);

/// Flattened k x k x C patches sampled every `stride` pixels.
FeatureSet patch_features(const Tensor& t, int k, int stride);

inline constexpr double kPsnrInfinite = std::numeric_limits<double>::infinity();

/// 10 log10(peak^2 / mse); identical inputs give kPsnrInfinite.
double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

/// Mean local SSIM over the valid region of an 11 x 11 Gaussian window
/// (sigma 1.5), averaged over channels.
double ssim(const Tensor& a, const Tensor& b, double peak = 1.0);

}  // namespace lensless
