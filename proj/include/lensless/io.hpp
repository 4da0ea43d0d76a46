#pragma once

// Binary tensor files, PNG images, run configuration and dataset synthesis.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lensless/tensor.hpp"

namespace lensless {

/// N-dimensional array as stored in a .lnsl file.
struct StoredArray {
  std::vector<std::uint32_t> dims;
  std::vector<double> data;
};

enum class StoredType : std::uint16_t { f32 = 0, f64 = 1 };

/// Layout: "LNSL", u16 version (1), u16 ndim, ndim x u32 dims, u16 dtype,
/// row-major little-endian payload. f64 round trips bit-exactly.
std::vector<std::uint8_t> encode_array(const StoredArray& a, StoredType type = StoredType::f64);
/// Throws FormatError naming the byte offset of the first inconsistency.
StoredArray decode_array(const std::vector<std::uint8_t>& bytes);

void save_array(const std::filesystem::path& path, const StoredArray& a, StoredType type = StoredType::f64);
StoredArray load_array(const std::filesystem::path& path);

/// Tensors are stored as H x W x C; 2-D files load as one channel.
void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

/// 8-bit grayscale or RGB PNG mapped to [0, 1].
Tensor png_import(const std::filesystem::path& path);
/// Writes t / peak clamped to [0, 1], scaled by 255, rounded half to even.
void png_export(const std::filesystem::path& path, const Tensor& t, double peak = 1.0);
/// The 8-bit code png_export writes for a normalized value.
std::uint8_t quantize_u8(double v);

/// key = value text, '#' comments. Only keys from known_keys() are accepted.
class RunConfig {
 public:
  struct KeyInfo {
    std::string key;
    std::string default_value;  ///< empty when the key has no default
    std::string help;
  };
  static const std::vector<KeyInfo>& known_keys();

  static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  /// Explicit value, else the documented default, else ConfigError naming the key.
  std::string get(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  /// Every known key with its resolved value; keys lacking both are omitted.
  std::string echo() const;

 private:
  std::map<std::string, std::string> values_;
};

struct ManifestEntry {
  std::string split;  ///< "train" or "test"
  std::string name;
  std::string measurement;  ///< path relative to the manifest directory
  std::string scene;
};

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

/// Seeded shuffle split: the first round(train_fraction * n) shuffled indices
/// are training items. Returns a flag per index (true = train).
std::vector<bool> split_indices(int n, double train_fraction, std::uint64_t seed);

}  // namespace lensless
