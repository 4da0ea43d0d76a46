#pragma once

// Seeded synthetic scenes, mask codes and phase-mask height maps.

#include <cstdint>
#include <vector>

#include "lensless/optics.hpp"

namespace lensless {

/// Piecewise-smooth test scene in [0, 1]: a soft gradient background with
/// random rectangles and ellipses, lightly blurred.
Tensor synthetic_scene(int height, int width, int channels, std::uint64_t seed);

/// Independent U[0, 1) pixels: broadband content that excites every
/// spatial frequency of the system.
Tensor random_texture_scene(int height, int width, int channels, std::uint64_t seed);

/// Uniformly random +-1 sequence.
std::vector<int> random_code(int length, std::uint64_t seed);

/// Smooth random height map in [0, max_height] (white noise blurred by
/// `correlation` pixels, then rescaled).
MaskHeightProfile random_height_profile(int size, double feature_pitch, double max_height, double correlation,
                                        std::uint64_t seed);

/// Multiplies every height by an independent factor 1 + U(-fraction, fraction).
MaskHeightProfile perturb_heights(const MaskHeightProfile& mask, double fraction, std::uint64_t seed);

/// Deterministic per-item seed derived from a base seed and an index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace lensless
