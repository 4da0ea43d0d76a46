#pragma once

// Learned reconstruction: trainable camera inversion (separable or Fourier
// domain), optional residual enhancer, analytic backpropagation and Adam.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lensless/losses.hpp"
#include "lensless/optics.hpp"
#include "lensless/weights.hpp"

namespace lensless {

/// Per-channel W1 Y W2, leaky ReLU, then channel_mix.
Tensor invert_sep(const SepInversionWeights& w, const Tensor& y, double slope);

/// Centered replicate pad of y to target dims times the smoothed box window
/// whose interior is the original footprint.
Tensor pad_and_window(const Tensor& y, int target_h, int target_w, double sigma);

/// Per-channel circular convolution with w (optionally after pad_and_window to
/// w's dims), centered crop to recon_h x recon_w, then channel_mix.
Tensor invert_gen(const GenInversionWeights& w, const Tensor& y, int recon_h, int recon_w, bool cropped,
                  double sigma);

/// Conv stack over a pixel-shuffled copy of x with an additive skip around it.
Tensor enhance(const EnhancerWeights& w, const Tensor& x);

/// He-initialized hidden layers, zero last layer: the identity map at init.
EnhancerWeights make_enhancer(int channels, int shuffle_factor, int hidden, int hidden_layers, std::uint64_t seed);

enum class InversionKind { separable, general };

struct FlatNetModel {
  InversionKind kind = InversionKind::separable;
  SepInversionWeights sep;
  GenInversionWeights gen;
  bool use_enhancer = false;
  EnhancerWeights enhancer;
  int recon_rows = 0;
  int recon_cols = 0;
  bool cropped = false;        ///< general model: pad_and_window the measurement
  double window_sigma = 4.0;

  void validate() const;
};

/// Activations recorded by a forward pass for backpropagation.
struct ForwardTape {
  bool recorded = false;
  Tensor input;                 ///< measurement (padded for the cropped general model)
  std::vector<Matrix> sep_yw2;  ///< per channel Y W2
  Tensor pre;                   ///< inversion output before the nonlinearity
  Tensor inverted;              ///< inversion output before channel_mix
  Tensor mixed;                 ///< channel_mix output
  std::vector<Tensor> enh_inputs;  ///< input of every conv layer
  std::vector<Tensor> enh_pre;     ///< pre-activation of every hidden conv layer
};

Tensor flatnet_forward(const FlatNetModel& model, const Tensor& y, ForwardTape* tape = nullptr);

/// Model-shaped container of zeros.
FlatNetModel zeros_like(const FlatNetModel& model);

/// Adds dL/dparams to `grads` given dL/d(output). Throws StateError when the
/// tape was not recorded.
void flatnet_backward(const FlatNetModel& model, const ForwardTape& tape, const Tensor& grad_out, FlatNetModel& grads);

struct ParameterGroups {
  bool inversion = true;
  bool channel_mix = true;
  bool enhancer = true;
};

/// Views of the trainable arrays of `model`, in a fixed order.
std::vector<std::span<double>> parameter_spans(FlatNetModel& model, const ParameterGroups& groups = {});

struct TrainConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.2;
  double lambda3 = 0.6;
  double lr = 1e-4;
  int lr_halve_every = 5000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int iterations = 1000;
  int batch_size = 4;
  std::uint64_t seed = 0;
  ParameterGroups trainable;
  /// Rescale the inversion by the least-squares gain between its initial
  /// outputs and the targets before the first step.
  bool calibrate_gain = true;
  int snapshot_every = 0;

  void validate() const;
};

/// lr * 0.5^floor((t - 1) / lr_halve_every).
double learning_rate_at(const TrainConfig& config, int t);

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

/// One bias-corrected Adam update at iteration t >= 1. State is sized on first use.
void adam_step(const std::vector<std::span<double>>& params, const std::vector<std::span<double>>& grads,
               AdamState& state, const TrainConfig& config, int t);

struct Sample {
  Tensor measurement;
  Tensor scene;
};

/// Differentiable term added to the objective: value and gradient for a
/// (prediction, target) pair.
using LossTerm = std::function<LossValue(const Tensor& prediction, const Tensor& target)>;

struct TrainResult {
  FlatNetModel model;
  std::vector<double> loss_log;  ///< batch loss before each update
  double gain = 1.0;             ///< applied by calibrate_gain
};

using SnapshotFn = std::function<void(int iteration, const FlatNetModel& model)>;

/// Mini-batch Adam on lambda1 MSE + lambda2 extra[0] + lambda3 extra[1].
/// Batches are drawn uniformly with replacement from `data` using the seed.
/// Throws NumericError naming the iteration if the loss becomes non-finite.
TrainResult train(FlatNetModel model, const std::vector<Sample>& data, const TrainConfig& config,
                  const std::vector<LossTerm>& extra_terms = {}, const SnapshotFn& on_snapshot = {});

/// ||A - (tr(A)/n) I||_F^2 / ||A||_F^2 for square A; 1 when A = 0.
double off_identity_energy(const Matrix& a);

struct SepDiagnostic {
  Matrix left;              ///< W1 phi_l
  Matrix right;             ///< W2^T phi_r
  double left_energy = 0.0;
  double right_energy = 0.0;
};

SepDiagnostic diagnose_sep(const SepInversionWeights& w, const SeparableSystem& sys);

struct GenDiagnostic {
  Tensor response;            ///< F^-1(F(W) (.) H)
  double peak_ratio = 0.0;    ///< max r^2 / sum r^2, 0 for a zero response
  int peak_row = 0;
  int peak_col = 0;
  std::vector<double> slice;  ///< row through the peak
};

GenDiagnostic diagnose_gen(const GenInversionWeights& w, const Psf& psf);

}  // namespace lensless
