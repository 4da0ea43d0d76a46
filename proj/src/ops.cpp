#include "lensless/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lensless/error.hpp"
#include "lensless/simd/kernels.hpp"

namespace lensless {
namespace {

std::string dims_str(int h, int w) { return std::to_string(h) + "x" + std::to_string(w); }

// Channel-first copy: plane c occupies [c*H*W, (c+1)*H*W).
std::vector<double> to_planar(const Tensor& t) {
  const int c = t.channels();
  const std::size_t n = t.plane_size();
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch) out[ch * n + i] = t.data()[i * c + ch];
  return out;
}

Tensor from_planar(const std::vector<double>& planar, int h, int w, int c) {
  Tensor out(h, w, c);
  const std::size_t n = static_cast<std::size_t>(h) * w;
  for (std::size_t i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch) out.data()[i * c + ch] = planar[ch * n + i];
  return out;
}

Tensor pad_with(const Tensor& t, int top, int bottom, int left, int right, bool replicate) {
  if (top < 0 || bottom < 0 || left < 0 || right < 0) throw InvalidArgument("pad amounts must be non-negative");
  if (replicate && (t.height() == 0 || t.width() == 0) && (top + bottom + left + right) > 0) {
    throw InvalidArgument("pad_replicate: cannot replicate an empty tensor");
  }
  const int h = t.height() + top + bottom, w = t.width() + left + right, c = t.channels();
  Tensor out(h, w, c);
  for (int y = 0; y < h; ++y) {
    int sy = y - top;
    const bool row_inside = sy >= 0 && sy < t.height();
    if (!row_inside && !replicate) continue;
    sy = std::clamp(sy, 0, t.height() - 1);
    for (int x = 0; x < w; ++x) {
      int sx = x - left;
      const bool inside = row_inside && sx >= 0 && sx < t.width();
      if (!inside && !replicate) continue;
      sx = std::clamp(sx, 0, t.width() - 1);
      for (int ch = 0; ch < c; ++ch) out(y, x, ch) = t(sy, sx, ch);
    }
  }
  return out;
}

}  // namespace

Tensor pad_replicate(const Tensor& t, int top, int bottom, int left, int right) {
  return pad_with(t, top, bottom, left, right, true);
}

Tensor pad_zero(const Tensor& t, int top, int bottom, int left, int right) {
  return pad_with(t, top, bottom, left, right, false);
}

Tensor crop(const Tensor& t, int top, int left, int out_h, int out_w) {
  if (out_h < 0 || out_w < 0 || top < 0 || left < 0 || top + out_h > t.height() || left + out_w > t.width()) {
    throw InvalidArgument("crop window " + dims_str(out_h, out_w) + " at (" + std::to_string(top) + "," +
                          std::to_string(left) + ") exceeds input " + dims_str(t.height(), t.width()));
  }
  const int c = t.channels();
  Tensor out(out_h, out_w, c);
  for (int y = 0; y < out_h; ++y) {
    const double* src = &t.data()[(static_cast<std::size_t>(y + top) * t.width() + left) * c];
    std::copy(src, src + static_cast<std::size_t>(out_w) * c, &out.data()[static_cast<std::size_t>(y) * out_w * c]);
  }
  return out;
}

Tensor crop_center(const Tensor& t, int out_h, int out_w) {
  if (out_h > t.height() || out_w > t.width()) {
    throw InvalidArgument("crop_center: requested " + dims_str(out_h, out_w) + " exceeds input " +
                          dims_str(t.height(), t.width()));
  }
  return crop(t, center_offset(t.height(), out_h), center_offset(t.width(), out_w), out_h, out_w);
}

Tensor embed(const Tensor& t, int out_h, int out_w, int top, int left) {
  if (top < 0 || left < 0 || top + t.height() > out_h || left + t.width() > out_w) {
    throw InvalidArgument("embed: " + dims_str(t.height(), t.width()) + " does not fit in " + dims_str(out_h, out_w));
  }
  const int c = t.channels();
  Tensor out(out_h, out_w, c);
  for (int y = 0; y < t.height(); ++y) {
    const double* src = &t.data()[static_cast<std::size_t>(y) * t.width() * c];
    std::copy(src, src + static_cast<std::size_t>(t.width()) * c,
              &out.data()[(static_cast<std::size_t>(y + top) * out_w + left) * c]);
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian sigma must be positive");
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

Tensor gaussian_blur(const Tensor& t, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const int h = t.height(), w = t.width(), c = t.channels();
  if (h == 0 || w == 0) return t;
  Tensor tmp(h, w, c), out(h, w, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (int i = -radius; i <= radius; ++i) s += k[i + radius] * t(y, std::clamp(x + i, 0, w - 1), ch);
        tmp(y, x, ch) = s;
      }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (int i = -radius; i <= radius; ++i) s += k[i + radius] * tmp(std::clamp(y + i, 0, h - 1), x, ch);
        out(y, x, ch) = s;
      }
  return out;
}

Tensor smoothed_box_window(int height, int width, int interior_h, int interior_w, double sigma) {
  if (interior_h > height || interior_w > width) {
    throw InvalidArgument("smoothed_box_window: interior " + dims_str(interior_h, interior_w) +
                          " larger than window " + dims_str(height, width));
  }
  if (interior_h < 0 || interior_w < 0) throw InvalidArgument("smoothed_box_window: negative interior");
  Tensor box(height, width, 1);
  const int top = center_offset(height, interior_h), left = center_offset(width, interior_w);
  for (int y = top; y < top + interior_h; ++y)
    for (int x = left; x < left + interior_w; ++x) box(y, x) = 1.0;
  Tensor win = gaussian_blur(box, sigma);
  for (double& v : win.data()) v = std::clamp(v, 0.0, 1.0);
  return win;
}

Tensor pixel_shuffle_down(const Tensor& t, int r) {
  if (r < 1) throw InvalidArgument("pixel_shuffle_down: factor must be >= 1");
  if (t.height() % r != 0 || t.width() % r != 0) {
    throw InvalidArgument("pixel_shuffle_down: dims " + dims_str(t.height(), t.width()) + " not divisible by " +
                          std::to_string(r));
  }
  const int oh = t.height() / r, ow = t.width() / r, c = t.channels();
  Tensor out(oh, ow, c * r * r);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x)
      for (int ch = 0; ch < c; ++ch)
        for (int dy = 0; dy < r; ++dy)
          for (int dx = 0; dx < r; ++dx) out(y, x, ch * r * r + dy * r + dx) = t(y * r + dy, x * r + dx, ch);
  return out;
}

Tensor pixel_shuffle_up(const Tensor& t, int r) {
  if (r < 1) throw InvalidArgument("pixel_shuffle_up: factor must be >= 1");
  if (t.channels() % (r * r) != 0) {
    throw InvalidArgument("pixel_shuffle_up: " + std::to_string(t.channels()) + " channels not divisible by " +
                          std::to_string(r * r));
  }
  const int c = t.channels() / (r * r);
  Tensor out(t.height() * r, t.width() * r, c);
  for (int y = 0; y < t.height(); ++y)
    for (int x = 0; x < t.width(); ++x)
      for (int ch = 0; ch < c; ++ch)
        for (int dy = 0; dy < r; ++dy)
          for (int dx = 0; dx < r; ++dx) out(y * r + dy, x * r + dx, ch) = t(y, x, ch * r * r + dy * r + dx);
  return out;
}

Tensor leaky_relu(const Tensor& t, double slope) {
  Tensor out(t.height(), t.width(), t.channels());
  simd::active_kernels().leaky_relu(t.data().data(), out.data().data(), t.size(), slope);
  return out;
}

Tensor resize(const Tensor& t, int new_h, int new_w, ResizeMode mode) {
  if (new_h < 1 || new_w < 1) throw InvalidArgument("resize: target dims must be >= 1");
  if (t.height() < 1 || t.width() < 1) throw InvalidArgument("resize: empty input");
  const int h = t.height(), w = t.width(), c = t.channels();
  const double sy = static_cast<double>(h) / new_h, sx = static_cast<double>(w) / new_w;
  Tensor out(new_h, new_w, c);
  if (mode == ResizeMode::nearest) {
    for (int y = 0; y < new_h; ++y) {
      const int iy = std::min(static_cast<int>(std::floor((y + 0.5) * sy)), h - 1);
      for (int x = 0; x < new_w; ++x) {
        const int ix = std::min(static_cast<int>(std::floor((x + 0.5) * sx)), w - 1);
        for (int ch = 0; ch < c; ++ch) out(y, x, ch) = t(iy, ix, ch);
      }
    }
    return out;
  }
  for (int y = 0; y < new_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, h - 1);
    const double wy = fy - y0;
    for (int x = 0; x < new_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, w - 1);
      const double wx = fx - x0;
      for (int ch = 0; ch < c; ++ch) {
        const double top = (1.0 - wx) * t(y0, x0, ch) + wx * t(y0, x1, ch);
        const double bot = (1.0 - wx) * t(y1, x0, ch) + wx * t(y1, x1, ch);
        out(y, x, ch) = (1.0 - wy) * top + wy * bot;
      }
    }
  }
  return out;
}

Tensor flip_vertical(const Tensor& t) {
  Tensor out(t.height(), t.width(), t.channels());
  for (int y = 0; y < t.height(); ++y)
    for (int x = 0; x < t.width(); ++x)
      for (int c = 0; c < t.channels(); ++c) out(y, x, c) = t(t.height() - 1 - y, x, c);
  return out;
}

Tensor flip_horizontal(const Tensor& t) {
  Tensor out(t.height(), t.width(), t.channels());
  for (int y = 0; y < t.height(); ++y)
    for (int x = 0; x < t.width(); ++x)
      for (int c = 0; c < t.channels(); ++c) out(y, x, c) = t(y, t.width() - 1 - x, c);
  return out;
}

KernelBank::KernelBank(int out_channels, int in_channels, int kernel_h, int kernel_w, double fill)
    : out_(out_channels), in_(in_channels), kh_(kernel_h), kw_(kernel_w) {
  if (out_channels < 1 || in_channels < 1 || kernel_h < 1 || kernel_w < 1) {
    throw InvalidArgument("KernelBank: all dims must be >= 1");
  }
  data_.assign(static_cast<std::size_t>(out_channels) * in_channels * kernel_h * kernel_w, fill);
}

Tensor conv2d(const Tensor& t, const KernelBank& kernels, int stride, int pad, const std::vector<double>& bias) {
  if (kernels.in_channels() != t.channels()) {
    throw InvalidArgument("conv2d: input has " + std::to_string(t.channels()) + " channels, kernels expect " +
                          std::to_string(kernels.in_channels()));
  }
  if (kernels.kernel_h() % 2 == 0 || kernels.kernel_w() % 2 == 0) throw InvalidArgument("conv2d: kernel dims must be odd");
  if (stride < 1 || pad < 0) throw InvalidArgument("conv2d: stride must be >= 1 and pad >= 0");
  if (!bias.empty() && static_cast<int>(bias.size()) != kernels.out_channels()) {
    throw InvalidArgument("conv2d: bias length does not match output channels");
  }
  const int h = t.height(), w = t.width();
  const int kh = kernels.kernel_h(), kw = kernels.kernel_w();
  const int oh = (h + 2 * pad - kh) / stride + 1, ow = (w + 2 * pad - kw) / stride + 1;
  if (oh < 1 || ow < 1) throw InvalidArgument("conv2d: kernel larger than padded input");
  const int cin = t.channels(), cout = kernels.out_channels();

  const std::vector<double> in = to_planar(t);
  std::vector<double> out(static_cast<std::size_t>(cout) * oh * ow, 0.0);
  const auto& k = simd::active_kernels();
  const std::size_t in_plane = static_cast<std::size_t>(h) * w, out_plane = static_cast<std::size_t>(oh) * ow;

  for (int o = 0; o < cout; ++o) {
    double* op = &out[o * out_plane];
    if (!bias.empty()) std::fill(op, op + out_plane, bias[o]);
    for (int i = 0; i < cin; ++i) {
      const double* ip = &in[i * in_plane];
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          const double wv = kernels(o, i, ky, kx);
          if (wv == 0.0) continue;
          for (int y = 0; y < oh; ++y) {
            const int iy = y * stride + ky - pad;
            if (iy < 0 || iy >= h) continue;
            double* orow = op + static_cast<std::size_t>(y) * ow;
            const double* irow = ip + static_cast<std::size_t>(iy) * w;
            if (stride == 1) {
              const int x0 = std::max(0, pad - kx);
              const int x1 = std::min(ow, w - kx + pad);
              if (x1 > x0) k.axpy(wv, irow + (x0 + kx - pad), orow + x0, static_cast<std::size_t>(x1 - x0));
            } else {
              for (int x = 0; x < ow; ++x) {
                const int ix = x * stride + kx - pad;
                if (ix >= 0 && ix < w) orow[x] += wv * irow[ix];
              }
            }
          }
        }
      }
    }
  }
  return from_planar(out, oh, ow, cout);
}

Tensor conv2d_backward_input(const Tensor& grad_out, const KernelBank& kernels, int pad, int in_h, int in_w) {
  if (grad_out.channels() != kernels.out_channels()) throw InvalidArgument("conv2d_backward_input: channel mismatch");
  const int oh = grad_out.height(), ow = grad_out.width();
  const int kh = kernels.kernel_h(), kw = kernels.kernel_w();
  const int cin = kernels.in_channels(), cout = kernels.out_channels();
  const std::vector<double> g = to_planar(grad_out);
  std::vector<double> din(static_cast<std::size_t>(cin) * in_h * in_w, 0.0);
  const auto& k = simd::active_kernels();
  const std::size_t in_plane = static_cast<std::size_t>(in_h) * in_w, out_plane = static_cast<std::size_t>(oh) * ow;
  for (int o = 0; o < cout; ++o) {
    const double* gp = &g[o * out_plane];
    for (int i = 0; i < cin; ++i) {
      double* dp = &din[i * in_plane];
      for (int ky = 0; ky < kh; ++ky)
        for (int kx = 0; kx < kw; ++kx) {
          const double wv = kernels(o, i, ky, kx);
          if (wv == 0.0) continue;
          const int x0 = std::max(0, pad - kx);
          const int x1 = std::min(ow, in_w - kx + pad);
          if (x1 <= x0) continue;
          for (int y = 0; y < oh; ++y) {
            const int iy = y + ky - pad;
            if (iy < 0 || iy >= in_h) continue;
            k.axpy(wv, gp + static_cast<std::size_t>(y) * ow + x0, dp + static_cast<std::size_t>(iy) * in_w + (x0 + kx - pad),
                   static_cast<std::size_t>(x1 - x0));
          }
        }
    }
  }
  return from_planar(din, in_h, in_w, cin);
}

void conv2d_backward_params(const Tensor& input, const Tensor& grad_out, int pad, KernelBank& grad_kernels,
                            std::vector<double>& grad_bias) {
  const int h = input.height(), w = input.width();
  const int oh = grad_out.height(), ow = grad_out.width();
  const int kh = grad_kernels.kernel_h(), kw = grad_kernels.kernel_w();
  const int cin = grad_kernels.in_channels(), cout = grad_kernels.out_channels();
  if (input.channels() != cin || grad_out.channels() != cout) throw InvalidArgument("conv2d_backward_params: channel mismatch");
  const std::vector<double> in = to_planar(input);
  const std::vector<double> g = to_planar(grad_out);
  const auto& k = simd::active_kernels();
  const std::size_t in_plane = static_cast<std::size_t>(h) * w, out_plane = static_cast<std::size_t>(oh) * ow;
  if (grad_bias.size() != static_cast<std::size_t>(cout)) grad_bias.assign(cout, 0.0);
  for (int o = 0; o < cout; ++o) {
    const double* gp = &g[o * out_plane];
    double bsum = 0.0;
    for (std::size_t j = 0; j < out_plane; ++j) bsum += gp[j];
    grad_bias[o] += bsum;
    for (int i = 0; i < cin; ++i) {
      const double* ip = &in[i * in_plane];
      for (int ky = 0; ky < kh; ++ky)
        for (int kx = 0; kx < kw; ++kx) {
          const int x0 = std::max(0, pad - kx);
          const int x1 = std::min(ow, w - kx + pad);
          if (x1 <= x0) continue;
          double s = 0.0;
          for (int y = 0; y < oh; ++y) {
            const int iy = y + ky - pad;
            if (iy < 0 || iy >= h) continue;
            s += k.dot(gp + static_cast<std::size_t>(y) * ow + x0, ip + static_cast<std::size_t>(iy) * w + (x0 + kx - pad),
                       static_cast<std::size_t>(x1 - x0));
          }
          grad_kernels(o, i, ky, kx) += s;
        }
    }
  }
}

Tensor multiply(const Tensor& a, const Tensor& b) {
  if (a.height() != b.height() || a.width() != b.width()) throw InvalidArgument("multiply: spatial dims differ");
  if (b.channels() != a.channels() && b.channels() != 1) throw InvalidArgument("multiply: channel mismatch");
  Tensor out(a.height(), a.width(), a.channels());
  const int c = a.channels();
  if (b.channels() == c) {
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  } else {
    for (std::size_t i = 0; i < a.plane_size(); ++i)
      for (int ch = 0; ch < c; ++ch) out.data()[i * c + ch] = a.data()[i * c + ch] * b.data()[i];
  }
  return out;
}

}  // namespace lensless
