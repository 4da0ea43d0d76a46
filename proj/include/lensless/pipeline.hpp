#pragma once

// Builds cameras, forward models and networks from a RunConfig, and stores
// trained models as checkpoint directories.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lensless/flatnet.hpp"
#include "lensless/io.hpp"
#include "lensless/optics.hpp"

namespace lensless {

CameraGeometry geometry_from_config(const RunConfig& config);

/// Separable system from seeded mask codes (model = sep).
SeparableSystem system_from_config(const RunConfig& config);

MaskHeightProfile mask_from_config(const RunConfig& config);

/// psf_file when given, else the Fresnel PSF of the configured mask sampled
/// at the pixel pitch, normalized to unit sum.
Psf psf_from_config(const RunConfig& config);

/// PSF of the mask with its heights perturbed by mask_perturb: the
/// geometry-only stand-in used for uncalibrated initialization.
Psf uncalibrated_psf_from_config(const RunConfig& config);

/// Full-linear-convolution dims of the general model.
std::pair<int, int> full_dims(const RunConfig& config, const Psf& psf);

/// Camera measurement of a scene under the configured model.
Tensor measure(const RunConfig& config, const Tensor& scene, std::uint64_t noise_seed);

TrainConfig train_config_from(const RunConfig& config);

/// Initialized network for the configured model and init mode.
FlatNetModel init_model_from_config(const RunConfig& config);

void save_model(const std::filesystem::path& dir, const FlatNetModel& model);
FlatNetModel load_model(const std::filesystem::path& dir);

/// Scene resized (bilinear) to the reconstruction dims and converted to the
/// configured channel count.
Tensor fit_scene(const RunConfig& config, const Tensor& image);

struct SynthesisReport {
  int train = 0;
  int test = 0;
  std::vector<std::string> skipped;
};

/// Reads every PNG in scene_dir (sorted by name), fits it to the
/// reconstruction dims, synthesizes its measurement with a per-scene noise
/// seed derived from (seed, index), and writes scenes/, measurements/ and
/// manifest.txt under out_dir. Unreadable scenes are skipped with a warning
/// on stderr; throws when no scene is usable.
SynthesisReport synthesize_dataset(const std::filesystem::path& scene_dir, const RunConfig& config,
                                   const std::filesystem::path& out_dir);

/// Samples of one split ("train", "test" or "" for both) of a synthesized dataset.
std::vector<Sample> load_dataset(const std::filesystem::path& data_dir, const std::string& split);

/// Names of the manifest entries of a split, in manifest order.
std::vector<std::string> dataset_names(const std::filesystem::path& data_dir, const std::string& split);

std::vector<double> parse_double_list(const std::string& text);
std::vector<std::string> parse_string_list(const std::string& text);

}  // namespace lensless
