#include "lensless/simd/kernels.hpp"

namespace lensless::simd {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void complex_mul(const std::complex<double>* a, const std::complex<double>* b, std::complex<double>* out,
                 std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = {ar * br - ai * bi, ar * bi + ai * br};
  }
}

void complex_mul_conj(const std::complex<double>* a, const std::complex<double>* b, std::complex<double>* out,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = {ar * br + ai * bi, ar * bi - ai * br};
  }
}

void leaky_relu(const double* x, double* out, std::size_t n, double slope) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] >= 0.0 ? x[i] : slope * x[i];
}

double squared_distance(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

constexpr KernelTable kScalar{"scalar", dot, axpy, complex_mul, complex_mul_conj, leaky_relu, squared_distance};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace lensless::simd
