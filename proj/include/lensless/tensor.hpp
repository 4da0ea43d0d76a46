#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace lensless {

using Complex = std::complex<double>;

/// Dense H x W x C array of doubles, row-major with channels last.
///
/// The universal carrier for scenes, measurements, PSFs and spatial weights.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int height, int width, int channels = 1, double fill = 0.0);
  Tensor(int height, int width, int channels, std::vector<double> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(int y, int x, int c = 0) noexcept { return data_[index(y, x, c)]; }
  double operator()(int y, int x, int c = 0) const noexcept { return data_[index(y, x, c)]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  bool same_shape(const Tensor& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }
  bool all_finite() const noexcept;

  /// Copy of channel `c` as a contiguous 1-channel tensor.
  Tensor channel(int c) const;
  void set_channel(int c, const Tensor& plane);
  static Tensor stack(const std::vector<Tensor>& planes);

  double sum() const noexcept;
  double max_abs() const noexcept;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double s) noexcept;
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, double s) { return a *= s; }
  friend Tensor operator*(double s, Tensor a) { return a *= s; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Complex H x W x C grid; holds DFT spectra and optical fields.
class ComplexSpectrum {
 public:
  ComplexSpectrum() = default;
  ComplexSpectrum(int height, int width, int channels = 1, Complex fill = {});

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }

  Complex& operator()(int y, int x, int c = 0) noexcept { return data_[index(y, x, c)]; }
  const Complex& operator()(int y, int x, int c = 0) const noexcept { return data_[index(y, x, c)]; }

  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }

  ComplexSpectrum channel(int c) const;
  void set_channel(int c, const ComplexSpectrum& plane);

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<Complex> data_;
};

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);
  Matrix(int rows, int cols, std::vector<double> data);

  static Matrix identity(int n);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(int r, int c) noexcept {
    return data_[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c)];
  }
  double operator()(int r, int c) const noexcept {
    return data_[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c)];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(int r) noexcept {
    return std::span<double>(data_).subspan(static_cast<std::size_t>(r) * cols_, cols_);
  }
  std::span<const double> row(int r) const noexcept {
    return std::span<const double>(data_).subspan(static_cast<std::size_t>(r) * cols_, cols_);
  }

  Matrix transpose() const;
  double frobenius_sq() const noexcept;
  bool all_finite() const noexcept;

  Matrix& operator*=(double s) noexcept;
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// C = A * B.
Matrix matmul(const Matrix& a, const Matrix& b);
/// C += A^T * B without forming the transpose.
void matmul_at_b_accumulate(const Matrix& a, const Matrix& b, Matrix& c);
/// C += A * B^T without forming the transpose.
void matmul_a_bt_accumulate(const Matrix& a, const Matrix& b, Matrix& c);

/// 1-channel tensor view of a matrix and back (copying).
Tensor to_tensor(const Matrix& m);
Matrix to_matrix(const Tensor& t);

}  // namespace lensless
