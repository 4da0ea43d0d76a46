#include "lensless/classic.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lensless/error.hpp"
#include "lensless/fft.hpp"
#include "lensless/forward.hpp"
#include "lensless/ops.hpp"

namespace lensless {
namespace {

using EigenMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

EigenMat to_eigen(const Matrix& m) {
  return Eigen::Map<const EigenMat>(m.data().data(), m.rows(), m.cols());
}

struct Svd {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd v;
};

Svd thin_svd(const Matrix& m) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(to_eigen(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

bool full_column_rank(const Svd& svd, int cols) {
  if (svd.s.size() < cols) return false;
  const double tol = svd.s(0) * 1e-12 * std::max<double>(svd.u.rows(), svd.v.rows());
  return svd.s.size() > 0 && svd.s(svd.s.size() - 1) > tol;
}

Tensor plane_spectrum_apply(const Tensor& plane, const ComplexSpectrum& filter) {
  return ifft2_real(hadamard(fft2(plane), filter));
}

double soft(double v, double t) { return v > t ? v - t : (v < -t ? v + t : 0.0); }

// Circular forward differences.
Tensor diff_x(const Tensor& t) {
  Tensor d(t.height(), t.width(), 1);
  for (int y = 0; y < t.height(); ++y)
    for (int x = 0; x < t.width(); ++x) d(y, x) = t(y, (x + 1) % t.width()) - t(y, x);
  return d;
}

Tensor diff_y(const Tensor& t) {
  Tensor d(t.height(), t.width(), 1);
  for (int y = 0; y < t.height(); ++y)
    for (int x = 0; x < t.width(); ++x) d(y, x) = t((y + 1) % t.height(), x) - t(y, x);
  return d;
}

ComplexSpectrum diff_transfer(int h, int w, bool along_x) {
  ComplexSpectrum tf(h, w, 1);
  for (int ky = 0; ky < h; ++ky)
    for (int kx = 0; kx < w; ++kx) {
      const double theta = along_x ? 2.0 * std::numbers::pi * kx / w : 2.0 * std::numbers::pi * ky / h;
      tf(ky, kx) = Complex(std::cos(theta) - 1.0, std::sin(theta));
    }
  return tf;
}

double sq_norm(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return s;
}

Tensor sensor_mask(int grid_h, int grid_w, int sensor_h, int sensor_w) {
  return embed(Tensor(sensor_h, sensor_w, 1, 1.0), grid_h, grid_w, center_offset(grid_h, sensor_h),
               center_offset(grid_w, sensor_w));
}

}  // namespace

Tensor tikhonov_separable(const Tensor& y, const SeparableSystem& sys, double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda)) throw InvalidArgument("tikhonov: lambda must be finite and >= 0");
  if (y.height() != sys.phi_l.rows() || y.width() != sys.phi_r.rows()) {
    throw InvalidArgument("tikhonov: measurement " + std::to_string(y.height()) + "x" + std::to_string(y.width()) +
                          " does not match system sensor dims " + std::to_string(sys.phi_l.rows()) + "x" +
                          std::to_string(sys.phi_r.rows()));
  }
  const Svd a = thin_svd(sys.phi_l);
  const Svd b = thin_svd(sys.phi_r);
  if (lambda == 0.0 && (!full_column_rank(a, sys.phi_l.cols()) || !full_column_rank(b, sys.phi_r.cols()))) {
    throw IllPosedError("tikhonov: lambda = 0 requires both system matrices to have full column rank");
  }
  const int p = sys.phi_l.cols(), q = sys.phi_r.cols();
  std::vector<Tensor> planes;
  for (int ch = 0; ch < y.channels(); ++ch) {
    const Matrix yc = to_matrix(y.channel(ch));
    Eigen::MatrixXd core = a.u.transpose() * to_eigen(yc) * b.u;
    for (Eigen::Index i = 0; i < core.rows(); ++i)
      for (Eigen::Index j = 0; j < core.cols(); ++j) {
        const double sa = a.s(i), sb = b.s(j);
        core(i, j) *= sa * sb / (sa * sa * sb * sb + lambda);
      }
    const Eigen::MatrixXd x = a.v * core * b.v.transpose();
    Tensor plane(p, q, 1);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < q; ++j) plane(i, j) = x(i, j);
    planes.push_back(std::move(plane));
  }
  Tensor out = Tensor::stack(planes);
  if (!out.all_finite()) throw NumericError("tikhonov: non-finite reconstruction");
  return out;
}

ComplexSpectrum wiener_filter(const Psf& psf, double k, int h, int w) {
  if (!(k > 0.0)) throw InvalidArgument("wiener: regularizer K must be > 0");
  ComplexSpectrum hf = psf_transfer(psf.kernel, h, w);
  for (auto& v : hf.data()) v = std::conj(v) / (k + std::norm(v));
  return hf;
}

Tensor wiener_deconv(const Tensor& y, const Psf& psf, double k, int recon_h, int recon_w) {
  if (!(k > 0.0)) throw InvalidArgument("wiener: regularizer K must be > 0");
  if (y.height() < psf.kernel.height() || y.width() < psf.kernel.width()) {
    throw InvalidArgument("wiener: measurement smaller than the psf");
  }
  if (psf.kernel.channels() != 1 && psf.kernel.channels() != y.channels()) {
    throw InvalidArgument("wiener: psf channel count does not match the measurement");
  }
  const ComplexSpectrum filter = wiener_filter(psf, k, y.height(), y.width());
  Tensor x = ifft2_real(hadamard(fft2(y), filter));
  x = crop_center(x, recon_h, recon_w);
  if (!x.all_finite()) throw NumericError("wiener: non-finite reconstruction");
  return x;
}

double tv_admm_objective(const Tensor& grid, const Tensor& y, const Psf& psf, double lambda_tv) {
  const int gh = grid.height(), gw = grid.width();
  double total = 0.0;
  for (int ch = 0; ch < grid.channels(); ++ch) {
    const Tensor xc = grid.channel(ch);
    const Tensor pc = psf.kernel.channels() == 1 ? psf.kernel : psf.kernel.channel(ch);
    const Tensor hx = crop_center(plane_spectrum_apply(xc, psf_transfer(pc, gh, gw)), y.height(), y.width());
    total += sq_norm(hx - y.channel(ch));
    double tv = 0.0;
    for (double v : diff_x(xc).data()) tv += std::abs(v);
    for (double v : diff_y(xc).data()) tv += std::abs(v);
    total += lambda_tv * tv;
  }
  return total;
}

TvAdmmResult tv_admm(const Tensor& y, const Psf& psf, const TvAdmmOptions& opt) {
  if (opt.iterations < 1) throw InvalidArgument("tv_admm: iterations must be >= 1");
  if (!(opt.lambda_tv > 0.0) || !(opt.rho > 0.0)) throw InvalidArgument("tv_admm: lambda_tv and rho must be > 0");
  if (opt.recon_h < 1 || opt.recon_w < 1) throw InvalidArgument("tv_admm: reconstruction dims must be >= 1");
  if (psf.kernel.channels() != 1 && psf.kernel.channels() != y.channels()) {
    throw InvalidArgument("tv_admm: psf channel count does not match the measurement");
  }
  const int gh = opt.recon_h + psf.kernel.height() - 1, gw = opt.recon_w + psf.kernel.width() - 1;
  if (y.height() > gh || y.width() > gw) throw InvalidArgument("tv_admm: measurement larger than the convolution grid");

  const double rho = opt.rho;
  const double thresh = opt.lambda_tv / rho;
  const Tensor mask = sensor_mask(gh, gw, y.height(), y.width());
  const ComplexSpectrum dxf = diff_transfer(gh, gw, true), dyf = diff_transfer(gh, gw, false);
  const int channels = y.channels();

  struct State {
    ComplexSpectrum hf;
    std::vector<double> denom;
    Tensor target, x, v, ux, uy, a, bx, by;
  };
  std::vector<State> states(channels);
  for (int ch = 0; ch < channels; ++ch) {
    State& s = states[ch];
    const Tensor pc = psf.kernel.channels() == 1 ? psf.kernel : psf.kernel.channel(ch);
    s.hf = psf_transfer(pc, gh, gw);
    s.denom.resize(s.hf.size());
    for (std::size_t i = 0; i < s.hf.size(); ++i) {
      s.denom[i] = std::norm(s.hf.data()[i]) + std::norm(dxf.data()[i]) + std::norm(dyf.data()[i]);
      if (!(s.denom[i] > 0.0)) throw NumericError("tv_admm: singular normal operator (psf has zero DC gain)");
    }
    s.target = embed(y.channel(ch), gh, gw, center_offset(gh, y.height()), center_offset(gw, y.width()));
    s.x = s.v = s.ux = s.uy = s.a = s.bx = s.by = Tensor(gh, gw, 1);
  }

  TvAdmmResult result;
  double first_primal = 0.0;
  for (int it = 0; it < opt.iterations; ++it) {
    double primal_sq = 0.0, dual_sq = 0.0;
    for (State& s : states) {
      const ComplexSpectrum fv = fft2(s.v - s.a);
      const ComplexSpectrum fux = fft2(s.ux - s.bx);
      const ComplexSpectrum fuy = fft2(s.uy - s.by);
      ComplexSpectrum xf(gh, gw, 1);
      for (std::size_t i = 0; i < xf.size(); ++i) {
        xf.data()[i] = (std::conj(s.hf.data()[i]) * fv.data()[i] + std::conj(dxf.data()[i]) * fux.data()[i] +
                        std::conj(dyf.data()[i]) * fuy.data()[i]) /
                       s.denom[i];
      }
      s.x = ifft2_real(xf);
      const Tensor hx = ifft2_real(hadamard(xf, s.hf));
      const Tensor dx = diff_x(s.x), dy = diff_y(s.x);

      const Tensor v_prev = s.v, ux_prev = s.ux, uy_prev = s.uy;
      for (std::size_t i = 0; i < s.v.size(); ++i) {
        const double m = mask.data()[i];
        s.v.data()[i] = (2.0 * m * s.target.data()[i] + rho * (hx.data()[i] + s.a.data()[i])) / (2.0 * m + rho);
        s.ux.data()[i] = soft(dx.data()[i] + s.bx.data()[i], thresh);
        s.uy.data()[i] = soft(dy.data()[i] + s.by.data()[i], thresh);
      }
      const Tensor rv = hx - s.v, rx = dx - s.ux, ry = dy - s.uy;
      s.a += rv;
      s.bx += rx;
      s.by += ry;
      primal_sq += sq_norm(rv) + sq_norm(rx) + sq_norm(ry);
      dual_sq += sq_norm(s.v - v_prev) + sq_norm(s.ux - ux_prev) + sq_norm(s.uy - uy_prev);
    }
    const double primal = std::sqrt(primal_sq), dual = rho * std::sqrt(dual_sq);
    if (!std::isfinite(primal) || !std::isfinite(dual)) throw NumericError("tv_admm: non-finite residual");
    if (it == 0) first_primal = std::max(primal, 1e-300);
    if (primal > 1e6 * first_primal) {
      throw NumericError("tv_admm: diverged at iteration " + std::to_string(it + 1) + " (primal residual " +
                         std::to_string(primal) + ")");
    }
    result.primal.push_back(primal);
    result.dual.push_back(dual);
  }

  std::vector<Tensor> planes;
  for (const State& s : states) planes.push_back(s.x);
  result.grid = Tensor::stack(planes);
  result.scene = crop_center(result.grid, opt.recon_h, opt.recon_w);
  result.objective = tv_admm_objective(result.grid, y, psf, opt.lambda_tv);
  return result;
}

}  // namespace lensless
