#pragma once

// Classical reconstruction baselines.

#include <vector>

#include "lensless/optics.hpp"
#include "lensless/tensor.hpp"

namespace lensless {

/// Closed-form minimizer of ||Y - phi_l X phi_r^T||_F^2 + lambda ||X||_F^2 per
/// channel via the SVDs of both factors. lambda = 0 requires both factors to
/// have full column rank (IllPosedError otherwise).
Tensor tikhonov_separable(const Tensor& y, const SeparableSystem& sys, double lambda);

/// Wiener restoration F^-1(conj(H) / (K + |H|^2) (.) F(Y)) with H the transfer
/// function of the PSF on the grid of y (see psf_transfer), center-cropped to
/// recon_h x recon_w. Pass the dims of y to keep the full grid.
Tensor wiener_deconv(const Tensor& y, const Psf& psf, double k, int recon_h, int recon_w);

/// Spectral Wiener filter conj(H) / (K + |H|^2) on an h x w grid.
ComplexSpectrum wiener_filter(const Psf& psf, double k, int h, int w);

struct TvAdmmOptions {
  int recon_h = 0;
  int recon_w = 0;
  double lambda_tv = 1e-3;
  double rho = 1.0;
  int iterations = 100;
};

struct TvAdmmResult {
  Tensor scene;                 ///< recon_h x recon_w estimate
  Tensor grid;                  ///< full padded-grid iterate
  std::vector<double> primal;   ///< per-iteration primal residual
  std::vector<double> dual;     ///< per-iteration dual residual
  double objective = 0.0;       ///< objective of the final iterate
};

/// Anisotropic-TV ADMM for Y = C(P * X):
///   min_X ||C(P * X) - Y||^2 + lambda_tv (||Dx X||_1 + ||Dy X||_1)
/// on the full linear-convolution grid (recon + psf - 1) with circular
/// boundaries. The sensor crop C is a centered diagonal mask. Throws
/// NumericError if the primal residual grows beyond 1e6 times its first value.
TvAdmmResult tv_admm(const Tensor& y, const Psf& psf, const TvAdmmOptions& options);

/// The objective minimized by tv_admm, evaluated for a full-grid iterate.
double tv_admm_objective(const Tensor& grid, const Tensor& y, const Psf& psf, double lambda_tv);

}  // namespace lensless
