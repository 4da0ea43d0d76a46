#pragma once

// Reconstruction quality as a function of how much of the sensor is kept.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lensless/flatnet.hpp"
#include "lensless/optics.hpp"

namespace lensless {

struct CropSweepConfig {
  Psf psf;
  int recon_rows = 32;
  int recon_cols = 32;
  int channels = 1;
  double noise_sigma = 0.0;
  double window_sigma = 4.0;
  double wiener_k = 1e-4;
  /// When non-empty, Wiener-based methods pick K per run from this grid by
  /// mean PSNR on the training scenes (flatnet-gen uses the padded choice).
  std::vector<double> wiener_k_grid;
  double tv_lambda = 1e-3;
  double tv_rho = 1.0;
  int tv_iterations = 200;
  int train_scenes = 16;
  int test_scenes = 8;
  TrainConfig train;  ///< budget of every FlatNet cell
};

/// Centered sensor keeping `fraction` of the full measurement area with the
/// full aspect ratio: each side is round(full_side * sqrt(fraction)).
std::pair<int, int> cropped_sensor_dims(int full_h, int full_w, double fraction);

/// Methods: "wiener" (zero-padded), "wiener-padded" (replicate pad + smoothed
/// window), "tv-admm", "flatnet-gen" (Wiener-initialized, trained per cell).
struct SeedResult {
  double fraction = 0.0;
  std::string method;
  std::uint64_t seed = 0;
  std::vector<double> psnr;  ///< per test scene
  std::vector<double> ssim;
  std::string error;         ///< non-empty when the run failed
  double wiener_k = 0.0;     ///< K used by Wiener-based methods
};

struct CropCell {
  double fraction = 0.0;
  std::string method;
  double psnr_mean = 0.0;
  double psnr_std = 0.0;
  double ssim_mean = 0.0;
  double ssim_std = 0.0;
  int n = 0;  ///< scored reconstructions
  std::vector<std::string> errors;
};

struct CropSweepTable {
  std::vector<SeedResult> runs;
  std::vector<CropCell> cells;
};

/// One (fraction, method, seed) run. Scenes, noise and training batches
/// depend only on the seed.
SeedResult run_crop_cell(const CropSweepConfig& config, double fraction, const std::string& method,
                         std::uint64_t seed);

/// Every combination, aggregated per (fraction, method) over all seeds and
/// test scenes. Failed runs are recorded in the cell and skipped.
CropSweepTable run_crop_sweep(const CropSweepConfig& config, const std::vector<double>& fractions,
                              const std::vector<std::string>& methods, const std::vector<std::uint64_t>& seeds);

/// CSV with header fraction,method,psnr_mean,psnr_std,ssim_mean,ssim_std,n and
/// numbers printed with 6 significant digits.
std::string format_results(const CropSweepTable& table);
void export_results(const CropSweepTable& table, const std::filesystem::path& path);

}  // namespace lensless
