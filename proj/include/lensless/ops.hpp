#pragma once

// Spatial tensor operations shared by the forward models, the classical
// solvers and the learned pipeline. All functions are pure.

#include <vector>

#include "lensless/tensor.hpp"

namespace lensless {

/// Edge values replicated outward; interior copied unchanged.
Tensor pad_replicate(const Tensor& t, int top, int bottom, int left, int right);
Tensor pad_zero(const Tensor& t, int top, int bottom, int left, int right);

/// Offset of a centered `inner` span inside `outer`. The odd leftover pixel
/// goes to the bottom/right margin.
constexpr int center_offset(int outer, int inner) noexcept { return (outer - inner) / 2; }

/// Centered submatrix. Throws InvalidArgument when the crop exceeds the input.
Tensor crop_center(const Tensor& t, int out_h, int out_w);
Tensor crop(const Tensor& t, int top, int left, int out_h, int out_w);

/// Zero canvas of the given dims with `t` written at (top, left).
Tensor embed(const Tensor& t, int out_h, int out_w, int top, int left);

/// Separable Gaussian blur, replicate boundary, kernel truncated at +-ceil(4 sigma)
/// and renormalized to unit sum.
Tensor gaussian_blur(const Tensor& t, double sigma);

/// Normalized 1-D Gaussian taps of length 2*ceil(4 sigma)+1.
std::vector<double> gaussian_kernel(double sigma);

/// 1-channel box of ones (centered interior_h x interior_w) blurred by gaussian_blur.
Tensor smoothed_box_window(int height, int width, int interior_h, int interior_w, double sigma);

/// Space-to-depth: out(y, x, c*r*r + dy*r + dx) = in(y*r + dy, x*r + dx, c).
Tensor pixel_shuffle_down(const Tensor& t, int factor);
/// Exact inverse of pixel_shuffle_down.
Tensor pixel_shuffle_up(const Tensor& t, int factor);

Tensor leaky_relu(const Tensor& t, double slope);

enum class ResizeMode { bilinear, nearest };

/// Half-pixel-centered resampling (align_corners = false). Bilinear clamps
/// sample coordinates to the source extent.
Tensor resize(const Tensor& t, int new_h, int new_w, ResizeMode mode);

Tensor flip_vertical(const Tensor& t);
Tensor flip_horizontal(const Tensor& t);

/// Bank of 2-D kernels indexed [out][in][ky][kx].
class KernelBank {
 public:
  KernelBank() = default;
  KernelBank(int out_channels, int in_channels, int kernel_h, int kernel_w, double fill = 0.0);

  int out_channels() const noexcept { return out_; }
  int in_channels() const noexcept { return in_; }
  int kernel_h() const noexcept { return kh_; }
  int kernel_w() const noexcept { return kw_; }

  double& operator()(int o, int i, int y, int x) noexcept { return data_[index(o, i, y, x)]; }
  double operator()(int o, int i, int y, int x) const noexcept { return data_[index(o, i, y, x)]; }

  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  friend bool operator==(const KernelBank&, const KernelBank&) = default;

 private:
  std::size_t index(int o, int i, int y, int x) const noexcept {
    return ((static_cast<std::size_t>(o) * in_ + i) * kh_ + y) * kw_ + x;
  }

  int out_ = 0, in_ = 0, kh_ = 0, kw_ = 0;
  std::vector<double> data_;
};

/// Cross-correlation (no kernel flip) with zero padding. Output dims are
/// (H + 2 pad - kh) / stride + 1. `bias`, when non-empty, has one entry per
/// output channel.
Tensor conv2d(const Tensor& t, const KernelBank& kernels, int stride = 1, int pad = 0,
              const std::vector<double>& bias = {});

/// Gradients of a stride-1 conv2d: input gradient and accumulated kernel/bias
/// gradients. `grad_out` has the forward output's shape.
Tensor conv2d_backward_input(const Tensor& grad_out, const KernelBank& kernels, int pad, int in_h, int in_w);
void conv2d_backward_params(const Tensor& input, const Tensor& grad_out, int pad, KernelBank& grad_kernels,
                            std::vector<double>& grad_bias);

/// Elementwise product; a 1-channel `b` broadcasts over the channels of `a`.
Tensor multiply(const Tensor& a, const Tensor& b);

}  // namespace lensless
