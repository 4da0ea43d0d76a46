#include "lensless/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lensless/error.hpp"
#include "lensless/ops.hpp"

namespace lensless {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Tensor random_texture_scene(int height, int width, int channels, std::uint64_t seed) {
  if (height < 1 || width < 1 || channels < 1) throw InvalidArgument("random_texture_scene: dims must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor t(height, width, channels);
  for (double& v : t.data()) v = u(rng);
  return t;
}

Tensor synthetic_scene(int height, int width, int channels, std::uint64_t seed) {
  if (height < 1 || width < 1 || channels < 1) throw InvalidArgument("synthetic_scene: dims must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor t(height, width, channels);

  std::vector<double> base(channels), gy(channels), gx(channels);
  for (int c = 0; c < channels; ++c) {
    base[c] = 0.1 + 0.3 * u(rng);
    gy[c] = 0.3 * (u(rng) - 0.5);
    gx[c] = 0.3 * (u(rng) - 0.5);
  }
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) t(y, x, c) = base[c] + gy[c] * y / height + gx[c] * x / width;

  const int shapes = 3 + static_cast<int>(u(rng) * 4);
  for (int s = 0; s < shapes; ++s) {
    const bool ellipse = u(rng) < 0.5;
    const double cy = u(rng) * height, cx = u(rng) * width;
    const double ry = (0.08 + 0.25 * u(rng)) * height, rx = (0.08 + 0.25 * u(rng)) * width;
    std::vector<double> value(channels);
    for (double& v : value) v = u(rng);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double dy = (y - cy) / ry, dx = (x - cx) / rx;
        const bool inside = ellipse ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
        if (!inside) continue;
        for (int c = 0; c < channels; ++c) t(y, x, c) = value[c];
      }
  }
  Tensor out = gaussian_blur(t, 0.7);
  for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

std::vector<int> random_code(int length, std::uint64_t seed) {
  if (length < 1) throw InvalidArgument("random_code: length must be >= 1");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<int> code(length);
  for (int& v : code) v = coin(rng) ? 1 : -1;
  return code;
}

MaskHeightProfile random_height_profile(int size, double feature_pitch, double max_height, double correlation,
                                        std::uint64_t seed) {
  if (size < 1) throw InvalidArgument("random_height_profile: size must be >= 1");
  if (!(max_height > 0.0)) throw InvalidArgument("random_height_profile: max_height must be > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor h(size, size, 1);
  for (double& v : h.data()) v = u(rng);
  if (correlation > 0.0) h = gaussian_blur(h, correlation);
  const auto [lo, hi] = std::minmax_element(h.data().begin(), h.data().end());
  const double min = *lo, range = *hi - *lo;
  for (double& v : h.data()) v = range > 0.0 ? (v - min) / range * max_height : 0.0;
  MaskHeightProfile mask{h, feature_pitch};
  mask.validate();
  return mask;
}

MaskHeightProfile perturb_heights(const MaskHeightProfile& mask, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw InvalidArgument("perturb_heights: fraction must be in [0, 1)");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-fraction, fraction);
  MaskHeightProfile out = mask;
  for (double& v : out.heights.data()) v *= 1.0 + u(rng);
  return out;
}

}  // namespace lensless
