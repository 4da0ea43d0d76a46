#include "lensless/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lensless/error.hpp"
#include "lensless/simd/kernels.hpp"

namespace lensless {

namespace {

void require_dims(int h, int w, int c) {
  if (h < 0 || w < 0 || c < 0) {
    throw InvalidArgument("tensor dimensions must be non-negative, got " + std::to_string(h) + "x" +
                          std::to_string(w) + "x" + std::to_string(c));
  }
}

}  // namespace

Tensor::Tensor(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  require_dims(height, width, channels);
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Tensor::Tensor(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  require_dims(height, width, channels);
  if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw InvalidArgument("tensor data length " + std::to_string(data_.size()) + " does not match " +
                          std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels));
  }
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor Tensor::channel(int c) const {
  if (c < 0 || c >= channels_) throw InvalidArgument("channel index out of range");
  Tensor out(height_, width_, 1);
  const std::size_t n = plane_size();
  for (std::size_t i = 0; i < n; ++i) out.data_[i] = data_[i * channels_ + c];
  return out;
}

void Tensor::set_channel(int c, const Tensor& plane) {
  if (c < 0 || c >= channels_) throw InvalidArgument("channel index out of range");
  if (plane.height_ != height_ || plane.width_ != width_ || plane.channels_ != 1) {
    throw InvalidArgument("set_channel: plane shape mismatch");
  }
  const std::size_t n = plane_size();
  for (std::size_t i = 0; i < n; ++i) data_[i * channels_ + c] = plane.data_[i];
}

Tensor Tensor::stack(const std::vector<Tensor>& planes) {
  if (planes.empty()) throw InvalidArgument("stack: no planes");
  const int h = planes.front().height(), w = planes.front().width();
  Tensor out(h, w, static_cast<int>(planes.size()));
  for (std::size_t c = 0; c < planes.size(); ++c) out.set_channel(static_cast<int>(c), planes[c]);
  return out;
}

double Tensor::sum() const noexcept {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double Tensor::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (!same_shape(other)) throw InvalidArgument("tensor add: shape mismatch");
  simd::active_kernels().axpy(1.0, other.data_.data(), data_.data(), data_.size());
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  if (!same_shape(other)) throw InvalidArgument("tensor subtract: shape mismatch");
  simd::active_kernels().axpy(-1.0, other.data_.data(), data_.data(), data_.size());
  return *this;
}

Tensor& Tensor::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

ComplexSpectrum::ComplexSpectrum(int height, int width, int channels, Complex fill)
    : height_(height), width_(width), channels_(channels) {
  require_dims(height, width, channels);
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

ComplexSpectrum ComplexSpectrum::channel(int c) const {
  if (c < 0 || c >= channels_) throw InvalidArgument("channel index out of range");
  ComplexSpectrum out(height_, width_, 1);
  const std::size_t n = static_cast<std::size_t>(height_) * width_;
  for (std::size_t i = 0; i < n; ++i) out.data_[i] = data_[i * channels_ + c];
  return out;
}

void ComplexSpectrum::set_channel(int c, const ComplexSpectrum& plane) {
  if (c < 0 || c >= channels_) throw InvalidArgument("channel index out of range");
  if (plane.height_ != height_ || plane.width_ != width_ || plane.channels_ != 1) {
    throw InvalidArgument("set_channel: plane shape mismatch");
  }
  const std::size_t n = static_cast<std::size_t>(height_) * width_;
  for (std::size_t i = 0; i < n; ++i) data_[i * channels_ + c] = plane.data_[i];
}

Matrix::Matrix(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
  require_dims(rows, cols, 1);
  data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

Matrix::Matrix(int rows, int cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
  require_dims(rows, cols, 1);
  if (data_.size() != static_cast<std::size_t>(rows) * cols) {
    throw InvalidArgument("matrix data length does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Matrix::frobenius_sq() const noexcept {
  return simd::active_kernels().dot(data_.data(), data_.data(), data_.size());
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw InvalidArgument("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                          std::to_string(b.rows()) + ")");
  }
  const auto& k = simd::active_kernels();
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    double* out = c.row(i).data();
    for (int p = 0; p < a.cols(); ++p) {
      const double s = a(i, p);
      if (s != 0.0) k.axpy(s, b.row(p).data(), out, static_cast<std::size_t>(b.cols()));
    }
  }
  return c;
}

void matmul_at_b_accumulate(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols()) {
    throw InvalidArgument("matmul_at_b: shape mismatch");
  }
  const auto& k = simd::active_kernels();
  for (int p = 0; p < a.rows(); ++p) {
    const double* brow = b.row(p).data();
    for (int i = 0; i < a.cols(); ++i) {
      const double s = a(p, i);
      if (s != 0.0) k.axpy(s, brow, c.row(i).data(), static_cast<std::size_t>(b.cols()));
    }
  }
}

void matmul_a_bt_accumulate(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols() != b.cols() || c.rows() != a.rows() || c.cols() != b.rows()) {
    throw InvalidArgument("matmul_a_bt: shape mismatch");
  }
  const auto& k = simd::active_kernels();
  const auto n = static_cast<std::size_t>(a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.rows(); ++j) c(i, j) += k.dot(a.row(i).data(), b.row(j).data(), n);
}

Tensor to_tensor(const Matrix& m) {
  return Tensor(m.rows(), m.cols(), 1, std::vector<double>(m.data().begin(), m.data().end()));
}

Matrix to_matrix(const Tensor& t) {
  if (t.channels() != 1) throw InvalidArgument("to_matrix: tensor must have exactly one channel");
  return Matrix(t.height(), t.width(), t.values());
}

}  // namespace lensless
