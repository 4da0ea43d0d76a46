#include "lensless/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "lensless/error.hpp"
#include "lensless/simd/kernels.hpp"

namespace lensless {
namespace {

// FFTW's planner is not thread-safe; executing a finished plan is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int h, int w, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_tuple(h, w, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<fftw_complex> in(static_cast<std::size_t>(h) * w), out(in.size());
    fftw_plan plan = fftw_plan_dft_2d(h, w, in.data(), out.data(), sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw NumericError("fftw failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

void transform_plane(std::vector<Complex>& in, std::vector<Complex>& out, int h, int w, int sign) {
  fftw_plan plan = PlanCache::instance().get(h, w, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
}

ComplexSpectrum transform(const ComplexSpectrum& src, int sign) {
  const int h = src.height(), w = src.width(), c = src.channels();
  if (h < 1 || w < 1 || c < 1) throw InvalidArgument("fft: empty input");
  ComplexSpectrum out(h, w, c);
  const std::size_t n = static_cast<std::size_t>(h) * w;
  std::vector<Complex> in(n), res(n);
  for (int ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < n; ++i) in[i] = src.data()[i * c + ch];
    transform_plane(in, res, h, w, sign);
    for (std::size_t i = 0; i < n; ++i) out.data()[i * c + ch] = res[i];
  }
  return out;
}

ComplexSpectrum inverse_scaled(const ComplexSpectrum& s) {
  ComplexSpectrum out = transform(s, FFTW_BACKWARD);
  const double scale = 1.0 / (static_cast<double>(s.height()) * s.width());
  for (auto& v : out.data()) v *= scale;
  return out;
}

template <bool Conj>
ComplexSpectrum product(const ComplexSpectrum& a, const ComplexSpectrum& b) {
  if (a.height() != b.height() || a.width() != b.width()) throw InvalidArgument("hadamard: spatial dims differ");
  if (b.channels() != a.channels() && b.channels() != 1) {
    throw InvalidArgument("hadamard: channel counts differ and b is not single-channel");
  }
  const auto& k = simd::active_kernels();
  ComplexSpectrum out(a.height(), a.width(), a.channels());
  if (b.channels() == a.channels()) {
    if constexpr (Conj) {
      k.complex_mul_conj(a.data().data(), b.data().data(), out.data().data(), a.size());
    } else {
      k.complex_mul(a.data().data(), b.data().data(), out.data().data(), a.size());
    }
    return out;
  }
  const int c = a.channels();
  const std::size_t n = static_cast<std::size_t>(a.height()) * a.width();
  for (std::size_t i = 0; i < n; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      const Complex av = a.data()[i * c + ch];
      out.data()[i * c + ch] = Conj ? std::conj(av) * b.data()[i] : av * b.data()[i];
    }
  }
  return out;
}

}  // namespace

ComplexSpectrum fft2(const Tensor& t) {
  if (t.height() < 1 || t.width() < 1 || t.channels() < 1) throw InvalidArgument("fft2: empty tensor");
  ComplexSpectrum field(t.height(), t.width(), t.channels());
  std::transform(t.data().begin(), t.data().end(), field.data().begin(), [](double v) { return Complex(v, 0.0); });
  return transform(field, FFTW_FORWARD);
}

Tensor ifft2_real(const ComplexSpectrum& s) {
  const ComplexSpectrum full = inverse_scaled(s);
  Tensor out(s.height(), s.width(), s.channels());
  std::transform(full.data().begin(), full.data().end(), out.data().begin(), [](const Complex& v) { return v.real(); });
  return out;
}

Tensor ifft2(const ComplexSpectrum& s) {
  const ComplexSpectrum full = inverse_scaled(s);
  double max_mag = 0.0, max_imag = 0.0;
  for (const auto& v : full.data()) {
    max_mag = std::max(max_mag, std::abs(v));
    max_imag = std::max(max_imag, std::abs(v.imag()));
  }
  if (max_imag > 1e-6 * max_mag) {
    throw NumericError("ifft2: imaginary residue " + std::to_string(max_imag) + " exceeds tolerance (magnitude " +
                       std::to_string(max_mag) + "); spectrum is not Hermitian");
  }
  Tensor out(s.height(), s.width(), s.channels());
  std::transform(full.data().begin(), full.data().end(), out.data().begin(), [](const Complex& v) { return v.real(); });
  return out;
}

ComplexSpectrum fft2_complex(const ComplexSpectrum& field) { return transform(field, FFTW_FORWARD); }

ComplexSpectrum ifft2_complex(const ComplexSpectrum& spectrum) { return inverse_scaled(spectrum); }

ComplexSpectrum hadamard(const ComplexSpectrum& a, const ComplexSpectrum& b) { return product<false>(a, b); }

ComplexSpectrum hadamard_conj(const ComplexSpectrum& a, const ComplexSpectrum& b) { return product<true>(a, b); }

}  // namespace lensless
