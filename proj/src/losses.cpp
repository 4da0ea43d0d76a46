#include "lensless/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lensless/error.hpp"
#include "lensless/simd/kernels.hpp"

namespace lensless {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(op) + ": shape mismatch " + std::to_string(a.height()) + "x" +
                          std::to_string(a.width()) + "x" + std::to_string(a.channels()) + " vs " +
                          std::to_string(b.height()) + "x" + std::to_string(b.width()) + "x" +
                          std::to_string(b.channels()));
  }
}

}  // namespace

LossValue mse(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse");
  if (a.empty()) throw InvalidArgument("mse: empty tensors");
  const double n = static_cast<double>(a.size());
  LossValue out{simd::active_kernels().squared_distance(a.data().data(), b.data().data(), a.size()) / n, a - b};
  out.grad *= 2.0 / n;
  return out;
}

LossValue weighted_total(const std::vector<LossValue>& terms, const std::vector<double>& weights) {
  if (terms.size() != weights.size()) {
    throw InvalidArgument("weighted_total: " + std::to_string(terms.size()) + " terms but " +
                          std::to_string(weights.size()) + " weights");
  }
  LossValue total;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i == 0) {
      total.grad = Tensor(terms[0].grad.height(), terms[0].grad.width(), terms[0].grad.channels());
    } else {
      require_same_shape(total.grad, terms[i].grad, "weighted_total");
    }
    total.value += weights[i] * terms[i].value;
    simd::active_kernels().axpy(weights[i], terms[i].grad.data().data(), total.grad.data().data(), total.grad.size());
  }
  return total;
}

double contextual_loss(const FeatureSet& p, const FeatureSet& q) {
  if (p.empty() || q.empty()) throw InvalidArgument("contextual_loss: feature sets must be nonempty");
  const std::size_t dim = p.front().size();
  for (const FeatureSet* set : {&p, &q})
    for (const auto& v : *set)
      if (v.size() != dim) throw InvalidArgument("contextual_loss: feature dimensionality mismatch");
  const auto& k = simd::active_kernels();
  std::vector<double> q_norm(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) q_norm[j] = std::sqrt(k.dot(q[j].data(), q[j].data(), dim));

  double total = 0.0;
  for (const auto& pi : p) {
    const double pn = std::sqrt(k.dot(pi.data(), pi.data(), dim));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double d = (pn == 0.0 || q_norm[j] == 0.0)
                           ? 1.0
                           : std::clamp(1.0 - k.dot(pi.data(), q[j].data(), dim) / (pn * q_norm[j]), 0.0, 2.0);
      best = std::min(best, d);
    }
    total += best;
  }
  return total / static_cast<double>(p.size());
}

FeatureSet patch_features(const Tensor& t, int k, int stride) {
  if (k < 1 || stride < 1) throw InvalidArgument("patch_features: patch size and stride must be >= 1");
  if (k > t.height() || k > t.width()) throw InvalidArgument("patch_features: patch larger than image");
  FeatureSet out;
  for (int y = 0; y + k <= t.height(); y += stride)
    for (int x = 0; x + k <= t.width(); x += stride) {
      std::vector<double> f;
      f.reserve(static_cast<std::size_t>(k) * k * t.channels());
      for (int dy = 0; dy < k; ++dy)
        for (int dx = 0; dx < k; ++dx)
          for (int c = 0; c < t.channels(); ++c) f.push_back(t(y + dy, x + dx, c));
      out.push_back(std::move(f));
    }
  return out;
}

double psnr(const Tensor& a, const Tensor& b, double peak) {
  if (!(peak > 0.0)) throw InvalidArgument("psnr: peak must be > 0");
  const double err = mse(a, b).value;
  if (err == 0.0) return kPsnrInfinite;
  return 10.0 * std::log10(peak * peak / err);
}

double ssim(const Tensor& a, const Tensor& b, double peak) {
  require_same_shape(a, b, "ssim");
  if (!(peak > 0.0)) throw InvalidArgument("ssim: peak must be > 0");
  constexpr int kWin = 11;
  if (a.height() < kWin || a.width() < kWin) throw InvalidArgument("ssim: images must be at least 11x11");
  std::vector<double> g(kWin);
  double gs = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - kWin / 2;
    g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    gs += g[i];
  }
  for (double& v : g) v /= gs;

  const double c1 = (0.01 * peak) * (0.01 * peak), c2 = (0.03 * peak) * (0.03 * peak);
  const int oh = a.height() - kWin + 1, ow = a.width() - kWin + 1;
  double total = 0.0;
  for (int c = 0; c < a.channels(); ++c)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int i = 0; i < kWin; ++i)
          for (int j = 0; j < kWin; ++j) {
            const double w = g[i] * g[j];
            const double va = a(y + i, x + j, c), vb = b(y + i, x + j, c);
            ma += w * va;
            mb += w * vb;
            saa += w * va * va;
            sbb += w * vb * vb;
            sab += w * va * vb;
          }
        const double var_a = saa - ma * ma, var_b = sbb - mb * mb, cov = sab - ma * mb;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
      }
  return total / (static_cast<double>(oh) * ow * a.channels());
}

}  // namespace lensless
