#include "lensless/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "lensless/error.hpp"

namespace lensless {
namespace {

constexpr char kMagic[4] = {'L', 'N', 'S', 'L'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get_le(const std::vector<std::uint8_t>& in, std::size_t offset) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(in[offset + i]) << (8 * i));
  return v;
}

void need(const std::vector<std::uint8_t>& bytes, std::size_t offset, std::size_t count, const char* what) {
  if (bytes.size() < offset + count) {
    throw FormatError("truncated tensor file: " + std::string(what) + " needs bytes " + std::to_string(offset) + ".." +
                      std::to_string(offset + count) + " but the file is " + std::to_string(bytes.size()) +
                      " bytes long");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

}  // namespace

std::vector<std::uint8_t> encode_array(const StoredArray& a, StoredType type) {
  if (a.dims.empty() || a.dims.size() > 0xFFFF) throw InvalidArgument("tensor file needs 1..65535 dims");
  const std::uint64_t count = std::accumulate(a.dims.begin(), a.dims.end(), std::uint64_t{1}, std::multiplies<>());
  if (count == 0) throw InvalidArgument("refusing to save an array with a zero-sized dimension");
  if (count != a.data.size()) throw InvalidArgument("array data length does not match its dims");
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_le<std::uint16_t>(out, kVersion);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(a.dims.size()));
  for (std::uint32_t d : a.dims) put_le<std::uint32_t>(out, d);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(type));
  out.reserve(out.size() + count * (type == StoredType::f64 ? 8 : 4));
  for (double v : a.data) {
    if (type == StoredType::f64) {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    } else {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

StoredArray decode_array(const std::vector<std::uint8_t>& bytes) {
  need(bytes, 0, 4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic at byte offset 0: expected \"LNSL\"");
  need(bytes, 4, 4, "version and ndim");
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kVersion) {
    throw FormatError("unsupported version " + std::to_string(version) + " at byte offset 4");
  }
  const auto ndim = get_le<std::uint16_t>(bytes, 6);
  if (ndim == 0) throw FormatError("zero dimensions at byte offset 6");
  need(bytes, 8, 4u * ndim + 2, "dims and dtype");
  StoredArray a;
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    a.dims.push_back(get_le<std::uint32_t>(bytes, 8 + 4 * i));
    count *= a.dims.back();
  }
  const std::size_t dtype_at = 8 + 4u * ndim;
  const auto dtype = get_le<std::uint16_t>(bytes, dtype_at);
  if (dtype > 1) throw FormatError("unknown dtype code " + std::to_string(dtype) + " at byte offset " + std::to_string(dtype_at));
  const std::size_t payload_at = dtype_at + 2;
  const std::uint64_t width = dtype == 1 ? 8 : 4;
  const std::uint64_t expected = count * width;
  const std::uint64_t actual = bytes.size() - payload_at;
  if (actual != expected) {
    throw FormatError("payload at byte offset " + std::to_string(payload_at) + " should be " +
                      std::to_string(expected) + " bytes but is " + std::to_string(actual));
  }
  a.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = payload_at + i * width;
    a.data[i] = dtype == 1 ? std::bit_cast<double>(get_le<std::uint64_t>(bytes, at))
                           : static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(bytes, at)));
  }
  return a;
}

void save_array(const std::filesystem::path& path, const StoredArray& a, StoredType type) {
  const auto bytes = encode_array(a, type);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("write failed for " + path.string());
}

StoredArray load_array(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return decode_array(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  save_array(path, {{static_cast<std::uint32_t>(t.height()), static_cast<std::uint32_t>(t.width()),
                     static_cast<std::uint32_t>(t.channels())},
                    t.values()});
}

Tensor load_tensor(const std::filesystem::path& path) {
  StoredArray a = load_array(path);
  if (a.dims.size() != 2 && a.dims.size() != 3) {
    throw FormatError(path.string() + ": expected a 2-D or 3-D array, found " + std::to_string(a.dims.size()) + "-D");
  }
  const int c = a.dims.size() == 3 ? static_cast<int>(a.dims[2]) : 1;
  return Tensor(static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]), c, std::move(a.data));
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  save_array(path, {{static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())},
                    std::vector<double>(m.data().begin(), m.data().end())});
}

Matrix load_matrix(const std::filesystem::path& path) {
  StoredArray a = load_array(path);
  if (a.dims.size() != 2) throw FormatError(path.string() + ": expected a 2-D array");
  return Matrix(static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]), std::move(a.data));
}

std::uint8_t quantize_u8(double v) {
  return static_cast<std::uint8_t>(std::nearbyint(std::clamp(v, 0.0, 1.0) * 255.0));
}

Tensor png_import(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error("cannot open " + path.string() + ": " + std::strerror(errno));
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError(path.string() + ": not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("libpng initialization failed");
  }
  Tensor out;
  std::string failure;
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": corrupt PNG data");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int w = static_cast<int>(png_get_image_width(png, info));
  int channels = 0;
  if (depth != 8) {
    failure = "unsupported bit depth " + std::to_string(depth) + " (only 8-bit images are accepted)";
  } else if (color == PNG_COLOR_TYPE_GRAY) {
    channels = 1;
  } else if (color == PNG_COLOR_TYPE_RGB) {
    channels = 3;
  } else {
    failure = "unsupported color type " + std::to_string(color) + " (only grayscale and RGB are accepted)";
  }
  if (failure.empty()) {
    png_set_interlace_handling(png);
    png_read_update_info(png, info);
    pixels.resize(static_cast<std::size_t>(h) * w * channels);
    rows.resize(h);
    for (int y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * w * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!failure.empty()) throw FormatError(path.string() + ": " + failure);
  out = Tensor(h, w, channels);
  for (std::size_t i = 0; i < pixels.size(); ++i) out.data()[i] = pixels[i] / 255.0;
  return out;
}

void png_export(const std::filesystem::path& path, const Tensor& t, double peak) {
  if (t.channels() != 1 && t.channels() != 3) throw InvalidArgument("png_export: tensor must have 1 or 3 channels");
  if (t.empty()) throw InvalidArgument("png_export: empty tensor");
  if (!(peak > 0.0)) throw InvalidArgument("png_export: peak must be > 0");
  std::vector<png_byte> pixels(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) pixels[i] = quantize_u8(t.data()[i] / peak);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(t.width());
  image.height = static_cast<png_uint_32>(t.height());
  image.format = t.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    throw Error("cannot write " + path.string() + ": " + image.message);
  }
}

const std::vector<RunConfig::KeyInfo>& RunConfig::known_keys() {
  static const std::vector<KeyInfo> keys = {
      {"model", "sep", "inversion kind: sep | gen"},
      {"init", "calibrated", "calibrated | uncalibrated"},
      {"channels", "1", "scene channels (1 or 3)"},
      {"pixel_pitch", "", "sensor pixel pitch p, meters"},
      {"mask_sensor_dist", "", "mask to sensor distance d, meters"},
      {"scene_dist", "", "scene distance z, meters (sep)"},
      {"scene_height", "", "scene extent H, meters (sep)"},
      {"scene_width", "", "scene extent W, meters (sep)"},
      {"recon_rows", "", "reconstruction rows P"},
      {"recon_cols", "", "reconstruction columns Q"},
      {"sensor_rows", "", "sensor rows (sep, or gen with cropped = true)"},
      {"sensor_cols", "", "sensor columns (sep, or gen with cropped = true)"},
      {"code_seed", "1", "seed of the separable +-1 mask codes"},
      {"blur_sigma", "0", "blur of the separable system columns, pixels"},
      {"toeplitz_mode", "bilinear", "resize mode of uncalibrated Toeplitz init: bilinear | nearest"},
      {"mask_size", "32", "phase mask samples per side"},
      {"mask_pitch", "", "phase mask feature pitch, meters (gen)"},
      {"mask_max_height", "2e-6", "phase mask height range, meters"},
      {"mask_correlation", "1.5", "phase mask smoothing, samples"},
      {"mask_seed", "1", "phase mask seed"},
      {"mask_perturb", "0.1", "relative height error of the uncalibrated PSF model"},
      {"wavelength", "532e-9", "simulation wavelength, meters"},
      {"psf_file", "", "measured PSF tensor; replaces the simulated PSF"},
      {"cropped", "false", "gen: the sensor is a centered crop of the full convolution"},
      {"window_sigma", "4", "smoothing of the padding window, pixels"},
      {"noise_sigma", "0", "measurement noise std"},
      {"split", "0.8", "training fraction of the synthesized dataset"},
      {"wiener_k", "1e-4", "Wiener regularizer K"},
      {"tikhonov_lambda", "1e-2", "Tikhonov regularizer"},
      {"tv_lambda", "1e-3", "TV weight"},
      {"tv_rho", "1", "ADMM penalty"},
      {"tv_iterations", "200", "ADMM iterations"},
      {"leaky_slope", "0.01", "slope of the separable inversion nonlinearity"},
      {"enhancer", "false", "append the convolutional enhancer"},
      {"enhancer_hidden", "16", "enhancer hidden channels"},
      {"enhancer_layers", "3", "enhancer hidden layers"},
      {"shuffle_factor", "2", "enhancer pixel-shuffle factor"},
      {"lambda1", "1", "MSE weight"},
      {"lambda2", "1.2", "weight of the first extra loss term"},
      {"lambda3", "0.6", "weight of the second extra loss term"},
      {"lr", "1e-4", "Adam learning rate"},
      {"lr_halve_every", "5000", "iterations between learning-rate halvings"},
      {"adam_beta1", "0.9", "Adam beta1"},
      {"adam_beta2", "0.999", "Adam beta2"},
      {"adam_eps", "1e-8", "Adam epsilon"},
      {"iterations", "1000", "training iterations"},
      {"batch_size", "4", "samples per iteration"},
      {"seed", "0", "global seed (split, noise, batches, initialization)"},
      {"calibrate_gain", "true", "rescale the initial inversion by its least-squares gain"},
      {"train_inversion", "true", "update the inversion weights"},
      {"train_mix", "true", "update the channel mix"},
      {"train_enhancer", "true", "update the enhancer"},
      {"snapshot_every", "0", "iterations between diagnostic snapshots (0 = off)"},
      {"crop_fractions", "1,0.75,0.5,0.25", "crop-sweep area fractions"},
      {"crop_methods", "wiener,wiener-padded,tv-admm,flatnet-gen", "crop-sweep methods"},
      {"crop_seeds", "1,2,3", "crop-sweep seeds"},
      {"crop_train_scenes", "16", "crop-sweep training scenes per seed"},
      {"crop_test_scenes", "8", "crop-sweep test scenes per seed"},
      {"crop_iterations", "300", "crop-sweep FlatNet iterations per cell"},
      {"crop_wiener_k_grid", "1e-4,1e-3,1e-2,3e-2,1e-1",
       "crop-sweep Wiener K candidates tuned on training scenes (empty = wiener_k)"},
  };
  return keys;
}

namespace {

const RunConfig::KeyInfo* find_key(const std::string& key) {
  for (const auto& k : RunConfig::known_keys())
    if (k.key == key) return &k;
  return nullptr;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError("", where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!find_key(key)) throw ConfigError(key, where + ": unknown key '" + key + "'");
    if (cfg.values_.count(key)) throw ConfigError(key, where + ": duplicate key '" + key + "'");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("", "cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path.string());
}

bool RunConfig::has(const std::string& key) const {
  if (values_.count(key)) return true;
  const KeyInfo* k = find_key(key);
  return k && !k->default_value.empty();
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!find_key(key)) throw ConfigError(key, "unknown key '" + key + "'");
  values_[key] = value;
}

std::string RunConfig::get(const std::string& key) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  const KeyInfo* k = find_key(key);
  if (!k) throw ConfigError(key, "unknown key '" + key + "'");
  if (k->default_value.empty()) throw ConfigError(key, "missing required key '" + key + "' (" + k->help + ")");
  return k->default_value;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string v = get(key);
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError(key, "key '" + key + "': '" + v + "' is not a number");
  return d;
}

int RunConfig::get_int(const std::string& key) const {
  const double d = get_double(key);
  if (d != std::floor(d) || std::abs(d) > 2e9) throw ConfigError(key, "key '" + key + "' must be an integer");
  return static_cast<int>(d);
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string v = get(key);
  std::size_t used = 0;
  std::uint64_t u = 0;
  try {
    u = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || v[0] == '-') {
    throw ConfigError(key, "key '" + key + "': '" + v + "' is not a non-negative integer");
  }
  return u;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "key '" + key + "': '" + v + "' is not a boolean");
}

std::string RunConfig::echo() const {
  std::ostringstream out;
  for (const auto& k : known_keys()) {
    auto it = values_.find(k.key);
    if (it != values_.end()) {
      out << k.key << " = " << it->second << '\n';
    } else if (!k.default_value.empty()) {
      out << k.key << " = " << k.default_value << "  # default\n";
    }
  }
  return out.str();
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ManifestEntry e;
    if (!(ls >> e.split >> e.name >> e.measurement >> e.scene) || (e.split != "train" && e.split != "test")) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": malformed manifest line");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<bool> split_indices(int n, double train_fraction, std::uint64_t seed) {
  if (n < 0) throw InvalidArgument("split_indices: negative count");
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) throw InvalidArgument("split fraction must be in [0, 1]");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const int n_train = static_cast<int>(std::lround(train_fraction * n));
  std::vector<bool> train(n, false);
  for (int i = 0; i < n_train; ++i) train[order[i]] = true;
  return train;
}

}  // namespace lensless
