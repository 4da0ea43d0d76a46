#pragma once

// Inner-loop arithmetic kernels. Every entry has a portable scalar reference
// and, on x86-64, an AVX2+FMA variant. The active table is chosen once at
// startup from CPUID; LENSLESS_SIMD=scalar forces the reference path.

#include <complex>
#include <cstddef>

namespace lensless::simd {

struct KernelTable {
  const char* name;

  /// sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// out[i] = a[i] * b[i]   (out may alias a or b)
  void (*complex_mul)(const std::complex<double>* a, const std::complex<double>* b,
                      std::complex<double>* out, std::size_t n);
  /// out[i] = conj(a[i]) * b[i]   (out may alias a or b)
  void (*complex_mul_conj)(const std::complex<double>* a, const std::complex<double>* b,
                           std::complex<double>* out, std::size_t n);
  /// out[i] = x[i] >= 0 ? x[i] : slope * x[i]   (out may alias x)
  void (*leaky_relu)(const double* x, double* out, std::size_t n, double slope);
  /// sum_i (x[i] - y[i])^2
  double (*squared_distance)(const double* x, const double* y, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;

/// AVX2 table, or nullptr when not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels() noexcept;

/// Table used by the library. Fixed for the lifetime of the process.
const KernelTable& active_kernels() noexcept;

}  // namespace lensless::simd
