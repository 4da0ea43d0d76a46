#include "lensless/crop_study.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <functional>
#include <memory>
#include <numeric>
#include <tuple>

#include "lensless/classic.hpp"
#include "lensless/error.hpp"
#include "lensless/forward.hpp"
#include "lensless/init.hpp"
#include "lensless/losses.hpp"
#include "lensless/ops.hpp"
#include "lensless/synthetic.hpp"

namespace lensless {
namespace {

Sample make_sample(const CropSweepConfig& c, int sr, int sc, std::uint64_t scene_seed, std::uint64_t noise_seed) {
  Tensor x = synthetic_scene(c.recon_rows, c.recon_cols, c.channels, scene_seed);
  Tensor y = forward_cropconv(c.psf, x, sr, sc, c.noise_sigma, noise_seed);
  return {std::move(y), std::move(x)};
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double e : v) ss += (e - mean) * (e - mean);
  return {mean, std::sqrt(ss / (v.size() - 1))};
}

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::pair<int, int> cropped_sensor_dims(int full_h, int full_w, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("crop fraction must be in (0, 1]");
  const double s = std::sqrt(fraction);
  return {std::max(1, static_cast<int>(std::lround(full_h * s))), std::max(1, static_cast<int>(std::lround(full_w * s)))};
}

SeedResult run_crop_cell(const CropSweepConfig& c, double fraction, const std::string& method, std::uint64_t seed) {
  SeedResult r{fraction, method, seed, {}, {}, {}, 0.0};
  const int fh = c.recon_rows + c.psf.kernel.height() - 1, fw = c.recon_cols + c.psf.kernel.width() - 1;
  const auto [sr, sc] = cropped_sensor_dims(fh, fw, fraction);

  std::vector<Sample> test;
  for (int i = 0; i < c.test_scenes; ++i) {
    test.push_back(make_sample(c, sr, sc, derive_seed(seed, 1000 + i), derive_seed(seed, 2000 + i)));
  }
  std::vector<Sample> train_set;
  for (int i = 0; i < c.train_scenes; ++i) {
    train_set.push_back(make_sample(c, sr, sc, derive_seed(seed, 3000 + i), derive_seed(seed, 4000 + i)));
  }

  const auto zero_wiener = [&](const Tensor& y, double k) {
    return wiener_deconv(embed(y, fh, fw, center_offset(fh, sr), center_offset(fw, sc)), c.psf, k, c.recon_rows,
                         c.recon_cols);
  };
  const auto padded_wiener = [&](const Tensor& y, double k) {
    return wiener_deconv(pad_and_window(y, fh, fw, c.window_sigma), c.psf, k, c.recon_rows, c.recon_cols);
  };
  const auto pick_k = [&](const std::function<Tensor(const Tensor&, double)>& recon) {
    if (c.wiener_k_grid.empty() || train_set.empty()) return c.wiener_k;
    double best_k = c.wiener_k, best = -std::numeric_limits<double>::infinity();
    for (double k : c.wiener_k_grid) {
      double total = 0.0;
      for (const Sample& s : train_set) total += psnr(recon(s.measurement, k), s.scene, 1.0);
      if (total > best) {
        best = total;
        best_k = k;
      }
    }
    return best_k;
  };

  std::function<Tensor(const Tensor&)> reconstruct;
  if (method == "wiener") {
    r.wiener_k = pick_k(zero_wiener);
    reconstruct = [&](const Tensor& y) { return zero_wiener(y, r.wiener_k); };
  } else if (method == "wiener-padded") {
    r.wiener_k = pick_k(padded_wiener);
    reconstruct = [&](const Tensor& y) { return padded_wiener(y, r.wiener_k); };
  } else if (method == "tv-admm") {
    reconstruct = [&](const Tensor& y) {
      return tv_admm(y, c.psf, {c.recon_rows, c.recon_cols, c.tv_lambda, c.tv_rho, c.tv_iterations}).scene;
    };
  } else if (method == "flatnet-gen") {
    r.wiener_k = pick_k(padded_wiener);
    FlatNetModel model;
    model.kind = InversionKind::general;
    model.gen = init_gen_calibrated(c.psf, r.wiener_k, fh, fw, c.channels);
    model.recon_rows = c.recon_rows;
    model.recon_cols = c.recon_cols;
    model.cropped = sr != fh || sc != fw;
    model.window_sigma = c.window_sigma;
    TrainConfig tc = c.train;
    tc.seed = derive_seed(seed, 5000);
    auto trained = std::make_shared<FlatNetModel>(train(model, train_set, tc).model);
    reconstruct = [trained](const Tensor& y) { return flatnet_forward(*trained, y); };
  } else {
    throw InvalidArgument("unknown crop-sweep method '" + method + "'");
  }

  for (const Sample& s : test) {
    const Tensor xr = reconstruct(s.measurement);
    r.psnr.push_back(psnr(xr, s.scene, 1.0));
    r.ssim.push_back(ssim(xr, s.scene, 1.0));
  }
  return r;
}

CropSweepTable run_crop_sweep(const CropSweepConfig& config, const std::vector<double>& fractions,
                              const std::vector<std::string>& methods, const std::vector<std::uint64_t>& seeds) {
  if (fractions.empty() || methods.empty() || seeds.empty()) {
    throw InvalidArgument("crop sweep needs at least one fraction, method and seed");
  }
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0)) throw InvalidArgument("crop fraction " + g6(f) + " is outside (0, 1]");
  config.psf.validate();

  CropSweepTable table;
  for (double f : fractions)
    for (const std::string& m : methods) {
      CropCell cell{f, m, 0, 0, 0, 0, 0, {}};
      std::vector<double> ps, ss;
      for (std::uint64_t seed : seeds) {
        SeedResult r;
        try {
          r = run_crop_cell(config, f, m, seed);
        } catch (const std::exception& e) {
          r = SeedResult{f, m, seed, {}, {}, e.what(), 0.0};
          cell.errors.push_back("seed " + std::to_string(seed) + ": " + e.what());
        }
        ps.insert(ps.end(), r.psnr.begin(), r.psnr.end());
        ss.insert(ss.end(), r.ssim.begin(), r.ssim.end());
        table.runs.push_back(std::move(r));
      }
      std::tie(cell.psnr_mean, cell.psnr_std) = mean_std(ps);
      std::tie(cell.ssim_mean, cell.ssim_std) = mean_std(ss);
      cell.n = static_cast<int>(ps.size());
      table.cells.push_back(std::move(cell));
    }
  return table;
}

std::string format_results(const CropSweepTable& table) {
  std::string out = "fraction,method,psnr_mean,psnr_std,ssim_mean,ssim_std,n\n";
  for (const CropCell& c : table.cells) {
    out += g6(c.fraction) + "," + c.method + "," + g6(c.psnr_mean) + "," + g6(c.psnr_std) + "," + g6(c.ssim_mean) +
           "," + g6(c.ssim_std) + "," + std::to_string(c.n) + "\n";
  }
  return out;
}

void export_results(const CropSweepTable& table, const std::filesystem::path& path) {
  if (table.cells.empty()) throw InvalidArgument("export_results: empty table");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << format_results(table);
  if (!f) throw Error("write failed for " + path.string());
}

}  // namespace lensless
