#include "lensless/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "lensless/error.hpp"
#include "lensless/forward.hpp"
#include "lensless/init.hpp"
#include "lensless/ops.hpp"
#include "lensless/synthetic.hpp"

namespace lensless {
namespace {

bool is_sep(const RunConfig& config) {
  const std::string m = config.get("model");
  if (m == "sep") return true;
  if (m == "gen") return false;
  throw ConfigError("model", "key 'model' must be sep or gen, got '" + m + "'");
}

bool is_calibrated(const RunConfig& config) {
  const std::string m = config.get("init");
  if (m == "calibrated") return true;
  if (m == "uncalibrated") return false;
  throw ConfigError("init", "key 'init' must be calibrated or uncalibrated, got '" + m + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Tensor measure_with(const RunConfig& config, const SeparableSystem* sys, const Psf* psf, const Tensor& scene,
                    std::uint64_t noise_seed) {
  const double noise = config.get_double("noise_sigma");
  if (sys) return forward_separable(*sys, scene, noise, noise_seed);
  if (config.get_bool("cropped")) {
    return forward_cropconv(*psf, scene, config.get_int("sensor_rows"), config.get_int("sensor_cols"), noise,
                            noise_seed);
  }
  return forward_conv(*psf, scene, noise, noise_seed);
}

Psf simulate_for(const RunConfig& config, const MaskHeightProfile& mask) {
  return simulate_psf_fresnel(mask, config.get_double("wavelength"), config.get_double("mask_sensor_dist"),
                              config.get_double("pixel_pitch"))
      .normalized();
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(f, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

const std::string& field(const std::map<std::string, std::string>& kv, const std::string& key,
                         const std::filesystem::path& where) {
  auto it = kv.find(key);
  if (it == kv.end()) throw FormatError(where.string() + ": missing field '" + key + "'");
  return it->second;
}

}  // namespace

CameraGeometry geometry_from_config(const RunConfig& config) {
  CameraGeometry g;
  g.pixel_pitch = config.get_double("pixel_pitch");
  g.mask_sensor_dist = config.get_double("mask_sensor_dist");
  g.scene_dist = config.get_double("scene_dist");
  g.scene_height = config.get_double("scene_height");
  g.scene_width = config.get_double("scene_width");
  g.recon_rows = config.get_int("recon_rows");
  g.recon_cols = config.get_int("recon_cols");
  g.sensor_rows = config.get_int("sensor_rows");
  g.sensor_cols = config.get_int("sensor_cols");
  g.validate();
  return g;
}

SeparableSystem system_from_config(const RunConfig& config) {
  const CameraGeometry g = geometry_from_config(config);
  const Slopes m = slope_from_geometry(g);
  const std::uint64_t seed = config.get_u64("code_seed");
  const int len_l = g.recon_rows + static_cast<int>(std::ceil(m.left * g.sensor_rows));
  const int len_r = g.recon_cols + static_cast<int>(std::ceil(m.right * g.sensor_cols));
  return simulate_separable_system(random_code(len_l, derive_seed(seed, 0)), random_code(len_r, derive_seed(seed, 1)),
                                   g, config.get_double("blur_sigma"));
}

MaskHeightProfile mask_from_config(const RunConfig& config) {
  return random_height_profile(config.get_int("mask_size"), config.get_double("mask_pitch"),
                               config.get_double("mask_max_height"), config.get_double("mask_correlation"),
                               config.get_u64("mask_seed"));
}

Psf psf_from_config(const RunConfig& config) {
  if (config.has("psf_file")) {
    return Psf{load_tensor(config.get("psf_file")), config.get_double("pixel_pitch")}.normalized();
  }
  return simulate_for(config, mask_from_config(config));
}

Psf uncalibrated_psf_from_config(const RunConfig& config) {
  const MaskHeightProfile mask = mask_from_config(config);
  return simulate_for(config, perturb_heights(mask, config.get_double("mask_perturb"),
                                              derive_seed(config.get_u64("mask_seed"), 7)));
}

std::pair<int, int> full_dims(const RunConfig& config, const Psf& psf) {
  return {config.get_int("recon_rows") + psf.kernel.height() - 1, config.get_int("recon_cols") + psf.kernel.width() - 1};
}

Tensor measure(const RunConfig& config, const Tensor& scene, std::uint64_t noise_seed) {
  if (is_sep(config)) {
    const SeparableSystem sys = system_from_config(config);
    return measure_with(config, &sys, nullptr, scene, noise_seed);
  }
  const Psf psf = psf_from_config(config);
  return measure_with(config, nullptr, &psf, scene, noise_seed);
}

TrainConfig train_config_from(const RunConfig& config) {
  TrainConfig t;
  t.lambda1 = config.get_double("lambda1");
  t.lambda2 = config.get_double("lambda2");
  t.lambda3 = config.get_double("lambda3");
  t.lr = config.get_double("lr");
  t.lr_halve_every = config.get_int("lr_halve_every");
  t.adam_beta1 = config.get_double("adam_beta1");
  t.adam_beta2 = config.get_double("adam_beta2");
  t.adam_eps = config.get_double("adam_eps");
  t.iterations = config.get_int("iterations");
  t.batch_size = config.get_int("batch_size");
  t.seed = config.get_u64("seed");
  t.calibrate_gain = config.get_bool("calibrate_gain");
  t.trainable = {config.get_bool("train_inversion"), config.get_bool("train_mix"), config.get_bool("train_enhancer")};
  t.snapshot_every = config.get_int("snapshot_every");
  try {
    t.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("", std::string("training settings: ") + e.what());
  }
  return t;
}

FlatNetModel init_model_from_config(const RunConfig& config) {
  FlatNetModel m;
  m.recon_rows = config.get_int("recon_rows");
  m.recon_cols = config.get_int("recon_cols");
  m.window_sigma = config.get_double("window_sigma");
  const int channels = config.get_int("channels");
  if (is_sep(config)) {
    m.kind = InversionKind::separable;
    if (is_calibrated(config)) {
      m.sep = init_sep_calibrated(system_from_config(config), channels);
    } else {
      const std::string mode = config.get("toeplitz_mode");
      if (mode != "bilinear" && mode != "nearest") {
        throw ConfigError("toeplitz_mode", "key 'toeplitz_mode' must be bilinear or nearest");
      }
      m.sep = init_sep_uncalibrated(geometry_from_config(config), derive_seed(config.get_u64("seed"), 11),
                                    mode == "bilinear" ? ResizeMode::bilinear : ResizeMode::nearest, channels);
    }
    m.sep.leaky_slope = config.get_double("leaky_slope");
  } else {
    m.kind = InversionKind::general;
    m.cropped = config.get_bool("cropped");
    const Psf psf = is_calibrated(config) ? psf_from_config(config) : uncalibrated_psf_from_config(config);
    const auto [fh, fw] = full_dims(config, psf);
    m.gen = init_gen_calibrated(psf, config.get_double("wiener_k"), fh, fw, channels);
  }
  if (config.get_bool("enhancer")) {
    m.use_enhancer = true;
    m.enhancer = make_enhancer(default_output_channels(channels), config.get_int("shuffle_factor"),
                               config.get_int("enhancer_hidden"), config.get_int("enhancer_layers"),
                               derive_seed(config.get_u64("seed"), 12));
  }
  m.validate();
  return m;
}

void save_model(const std::filesystem::path& dir, const FlatNetModel& model) {
  std::filesystem::create_directories(dir);
  std::ostringstream meta;
  const bool sep = model.kind == InversionKind::separable;
  meta << "kind = " << (sep ? "sep" : "gen") << '\n'
       << "recon_rows = " << model.recon_rows << '\n'
       << "recon_cols = " << model.recon_cols << '\n'
       << "cropped = " << (model.cropped ? 1 : 0) << '\n'
       << "window_sigma = " << fmt(model.window_sigma) << '\n'
       << "leaky_slope = " << fmt(model.sep.leaky_slope) << '\n'
       << "use_enhancer = " << (model.use_enhancer ? 1 : 0) << '\n';
  if (sep) {
    save_matrix(dir / "w1.lnsl", model.sep.w1);
    save_matrix(dir / "w2.lnsl", model.sep.w2);
    save_matrix(dir / "mix.lnsl", model.sep.channel_mix);
  } else {
    save_tensor(dir / "w.lnsl", model.gen.w);
    save_matrix(dir / "mix.lnsl", model.gen.channel_mix);
  }
  if (model.use_enhancer) {
    const EnhancerWeights& e = model.enhancer;
    meta << "shuffle_factor = " << e.shuffle_factor << '\n'
         << "enhancer_slope = " << fmt(e.leaky_slope) << '\n'
         << "enhancer_layers = " << e.layers.size() << '\n';
    for (std::size_t i = 0; i < e.layers.size(); ++i) {
      const KernelBank& k = e.layers[i].kernels;
      save_array(dir / ("enhancer_kernel_" + std::to_string(i) + ".lnsl"),
                 {{static_cast<std::uint32_t>(k.out_channels()), static_cast<std::uint32_t>(k.in_channels()),
                   static_cast<std::uint32_t>(k.kernel_h()), static_cast<std::uint32_t>(k.kernel_w())},
                  k.values()});
      save_array(dir / ("enhancer_bias_" + std::to_string(i) + ".lnsl"),
                 {{static_cast<std::uint32_t>(e.layers[i].bias.size())}, e.layers[i].bias});
    }
  }
  std::ofstream f(dir / "model.txt", std::ios::trunc);
  f << meta.str();
  if (!f) throw Error("cannot write " + (dir / "model.txt").string());
}

FlatNetModel load_model(const std::filesystem::path& dir) {
  const auto meta_path = dir / "model.txt";
  const auto kv = read_key_values(meta_path);
  auto num = [&](const std::string& key) { return std::stod(field(kv, key, meta_path)); };
  FlatNetModel m;
  const std::string kind = field(kv, "kind", meta_path);
  m.recon_rows = static_cast<int>(num("recon_rows"));
  m.recon_cols = static_cast<int>(num("recon_cols"));
  m.cropped = num("cropped") != 0.0;
  m.window_sigma = num("window_sigma");
  m.use_enhancer = num("use_enhancer") != 0.0;
  if (kind == "sep") {
    m.kind = InversionKind::separable;
    m.sep.w1 = load_matrix(dir / "w1.lnsl");
    m.sep.w2 = load_matrix(dir / "w2.lnsl");
    m.sep.channel_mix = load_matrix(dir / "mix.lnsl");
    m.sep.leaky_slope = num("leaky_slope");
  } else if (kind == "gen") {
    m.kind = InversionKind::general;
    m.gen.w = load_tensor(dir / "w.lnsl");
    m.gen.channel_mix = load_matrix(dir / "mix.lnsl");
  } else {
    throw FormatError(meta_path.string() + ": unknown model kind '" + kind + "'");
  }
  if (m.use_enhancer) {
    m.enhancer.shuffle_factor = static_cast<int>(num("shuffle_factor"));
    m.enhancer.leaky_slope = num("enhancer_slope");
    const int layers = static_cast<int>(num("enhancer_layers"));
    for (int i = 0; i < layers; ++i) {
      StoredArray k = load_array(dir / ("enhancer_kernel_" + std::to_string(i) + ".lnsl"));
      StoredArray b = load_array(dir / ("enhancer_bias_" + std::to_string(i) + ".lnsl"));
      if (k.dims.size() != 4 || b.dims.size() != 1) throw FormatError(dir.string() + ": malformed enhancer layer");
      ConvLayer layer{KernelBank(static_cast<int>(k.dims[0]), static_cast<int>(k.dims[1]), static_cast<int>(k.dims[2]),
                                 static_cast<int>(k.dims[3])),
                      std::move(b.data)};
      layer.kernels.values() = std::move(k.data);
      m.enhancer.layers.push_back(std::move(layer));
    }
  }
  m.validate();
  return m;
}

Tensor fit_scene(const RunConfig& config, const Tensor& image) {
  const int h = config.get_int("recon_rows"), w = config.get_int("recon_cols"), c = config.get_int("channels");
  if (c != 1 && c != 3) throw ConfigError("channels", "key 'channels' must be 1 or 3");
  Tensor t = image;
  if (t.channels() == 3 && c == 1) {
    Tensor gray(t.height(), t.width(), 1);
    for (int y = 0; y < t.height(); ++y)
      for (int x = 0; x < t.width(); ++x) gray(y, x) = (t(y, x, 0) + t(y, x, 1) + t(y, x, 2)) / 3.0;
    t = std::move(gray);
  } else if (t.channels() == 1 && c == 3) {
    t = Tensor::stack({t, t, t});
  }
  if (t.height() != h || t.width() != w) t = resize(t, h, w, ResizeMode::bilinear);
  return t;
}

SynthesisReport synthesize_dataset(const std::filesystem::path& scene_dir, const RunConfig& config,
                                   const std::filesystem::path& out_dir) {
  if (!std::filesystem::is_directory(scene_dir)) throw Error("scene directory " + scene_dir.string() + " not found");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(scene_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  SynthesisReport report;
  std::vector<std::pair<std::string, Tensor>> scenes;
  for (const auto& f : files) {
    try {
      scenes.emplace_back(f.stem().string(), fit_scene(config, png_import(f)));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      std::cerr << "warning: skipping " << f.string() << ": " << e.what() << '\n';
      report.skipped.push_back(f.string());
    }
  }
  if (scenes.empty()) throw Error("no usable scene images in " + scene_dir.string());

  std::optional<SeparableSystem> sys;
  std::optional<Psf> psf;
  if (is_sep(config)) {
    sys = system_from_config(config);
  } else {
    psf = psf_from_config(config);
  }
  const std::uint64_t seed = config.get_u64("seed");
  const auto train = split_indices(static_cast<int>(scenes.size()), config.get_double("split"), seed);

  std::filesystem::create_directories(out_dir / "scenes");
  std::filesystem::create_directories(out_dir / "measurements");
  std::ostringstream manifest;
  manifest << "# split name measurement scene\n";
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto& [name, scene] = scenes[i];
    const Tensor y = measure_with(config, sys ? &*sys : nullptr, psf ? &*psf : nullptr, scene, derive_seed(seed, i));
    const std::string mpath = "measurements/" + name + ".lnsl", spath = "scenes/" + name + ".lnsl";
    save_tensor(out_dir / mpath, y);
    save_tensor(out_dir / spath, scene);
    manifest << (train[i] ? "train" : "test") << ' ' << name << ' ' << mpath << ' ' << spath << '\n';
    ++(train[i] ? report.train : report.test);
  }
  std::ofstream f(out_dir / "manifest.txt", std::ios::trunc);
  f << manifest.str();
  if (!f) throw Error("cannot write manifest in " + out_dir.string());
  return report;
}

std::vector<Sample> load_dataset(const std::filesystem::path& data_dir, const std::string& split) {
  std::vector<Sample> out;
  for (const auto& e : load_manifest(data_dir / "manifest.txt")) {
    if (!split.empty() && e.split != split) continue;
    out.push_back({load_tensor(data_dir / e.measurement), load_tensor(data_dir / e.scene)});
  }
  return out;
}

std::vector<std::string> dataset_names(const std::filesystem::path& data_dir, const std::string& split) {
  std::vector<std::string> out;
  for (const auto& e : load_manifest(data_dir / "manifest.txt"))
    if (split.empty() || e.split == split) out.push_back(e.name);
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0) throw InvalidArgument("'" + item + "' is not a number");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> parse_string_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace lensless
