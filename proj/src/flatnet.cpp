#include "lensless/flatnet.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "lensless/error.hpp"
#include "lensless/fft.hpp"
#include "lensless/forward.hpp"
#include "lensless/ops.hpp"
#include "lensless/simd/kernels.hpp"

namespace lensless {
namespace {

std::string dims(int h, int w) { return std::to_string(h) + "x" + std::to_string(w); }

Tensor apply_mix(const Matrix& mix, const Tensor& t) {
  if (mix.cols() != t.channels()) {
    throw InvalidArgument("channel_mix expects " + std::to_string(mix.cols()) + " channels, got " +
                          std::to_string(t.channels()));
  }
  Tensor out(t.height(), t.width(), mix.rows());
  const std::size_t n = t.plane_size();
  const int ci = t.channels(), co = mix.rows();
  const double* src = t.data().data();
  double* dst = out.data().data();
  for (std::size_t p = 0; p < n; ++p)
    for (int o = 0; o < co; ++o) {
      double s = 0.0;
      for (int i = 0; i < ci; ++i) s += mix(o, i) * src[p * ci + i];
      dst[p * co + o] = s;
    }
  return out;
}

// dL/dmix += G_out (x) input over pixels; returns dL/dinput.
Tensor mix_backward(const Matrix& mix, const Tensor& input, const Tensor& grad_out, Matrix& grad_mix) {
  Tensor grad_in(input.height(), input.width(), input.channels());
  const std::size_t n = input.plane_size();
  const int ci = input.channels(), co = mix.rows();
  const double* x = input.data().data();
  const double* g = grad_out.data().data();
  double* gi = grad_in.data().data();
  for (std::size_t p = 0; p < n; ++p)
    for (int o = 0; o < co; ++o) {
      const double go = g[p * co + o];
      for (int i = 0; i < ci; ++i) {
        grad_mix(o, i) += go * x[p * ci + i];
        gi[p * ci + i] += mix(o, i) * go;
      }
    }
  return grad_in;
}

void check_sep_dims(const SepInversionWeights& w, const Tensor& y) {
  if (w.w1.cols() != y.height() || w.w2.rows() != y.width()) {
    throw InvalidArgument("invert_sep: measurement " + dims(y.height(), y.width()) + " does not match W1 " +
                          dims(w.w1.rows(), w.w1.cols()) + " / W2 " + dims(w.w2.rows(), w.w2.cols()));
  }
}

Tensor prepare_gen_input(const GenInversionWeights& w, const Tensor& y, bool cropped, double sigma) {
  if (w.w.channels() != 1) throw InvalidArgument("invert_gen: W must have one channel");
  Tensor in = cropped ? pad_and_window(y, w.w.height(), w.w.width(), sigma) : y;
  if (in.height() != w.w.height() || in.width() != w.w.width()) {
    throw InvalidArgument("invert_gen: measurement " + dims(in.height(), in.width()) + " does not match W " +
                          dims(w.w.height(), w.w.width()));
  }
  return in;
}

Tensor gen_deconv(const Tensor& w, const Tensor& in, int recon_h, int recon_w) {
  return crop_center(ifft2_real(hadamard(fft2(in), fft2(w))), recon_h, recon_w);
}

int layer_pad(const ConvLayer& l) { return l.kernels.kernel_h() / 2; }

Tensor leaky_grad(const Tensor& grad, const Tensor& pre, double slope) {
  Tensor out = grad;
  auto g = out.data();
  const auto p = pre.data();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (p[i] < 0.0) g[i] *= slope;
  return out;
}

Tensor enhance_impl(const EnhancerWeights& w, const Tensor& x, ForwardTape* tape) {
  w.validate();
  const int r = w.shuffle_factor;
  if (x.height() % r != 0 || x.width() % r != 0) {
    throw InvalidArgument("enhance: input " + dims(x.height(), x.width()) + " not divisible by shuffle factor " +
                          std::to_string(r));
  }
  const Tensor s = pixel_shuffle_down(x, r);
  if (s.channels() != w.layers.front().kernels.in_channels()) {
    throw InvalidArgument("enhance: " + std::to_string(x.channels()) + "-channel input does not match the first layer");
  }
  Tensor a = s;
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    const ConvLayer& l = w.layers[i];
    if (tape) tape->enh_inputs.push_back(a);
    Tensor z = conv2d(a, l.kernels, 1, layer_pad(l), l.bias);
    if (i + 1 < w.layers.size()) {
      if (tape) tape->enh_pre.push_back(z);
      a = leaky_relu(z, w.leaky_slope);
    } else {
      a = std::move(z);
    }
  }
  a += s;
  return pixel_shuffle_up(a, r);
}

}  // namespace

Tensor invert_sep(const SepInversionWeights& w, const Tensor& y, double slope) {
  check_sep_dims(w, y);
  Tensor pre(w.w1.rows(), w.w2.cols(), y.channels());
  for (int c = 0; c < y.channels(); ++c) pre.set_channel(c, to_tensor(matmul(w.w1, matmul(to_matrix(y.channel(c)), w.w2))));
  return apply_mix(w.channel_mix, leaky_relu(pre, slope));
}

Tensor pad_and_window(const Tensor& y, int target_h, int target_w, double sigma) {
  if (target_h < y.height() || target_w < y.width()) {
    throw InvalidArgument("pad_and_window: target " + dims(target_h, target_w) + " smaller than input " +
                          dims(y.height(), y.width()));
  }
  if (target_h == y.height() && target_w == y.width()) return y;
  const int top = center_offset(target_h, y.height()), left = center_offset(target_w, y.width());
  const Tensor padded =
      pad_replicate(y, top, target_h - y.height() - top, left, target_w - y.width() - left);
  return multiply(padded, smoothed_box_window(target_h, target_w, y.height(), y.width(), sigma));
}

Tensor invert_gen(const GenInversionWeights& w, const Tensor& y, int recon_h, int recon_w, bool cropped,
                  double sigma) {
  return apply_mix(w.channel_mix, gen_deconv(w.w, prepare_gen_input(w, y, cropped, sigma), recon_h, recon_w));
}

Tensor enhance(const EnhancerWeights& w, const Tensor& x) { return enhance_impl(w, x, nullptr); }

EnhancerWeights make_enhancer(int channels, int shuffle_factor, int hidden, int hidden_layers, std::uint64_t seed) {
  if (channels < 1 || hidden < 1 || hidden_layers < 0 || shuffle_factor < 1) {
    throw InvalidArgument("make_enhancer: channel counts and shuffle factor must be positive");
  }
  EnhancerWeights w;
  w.shuffle_factor = shuffle_factor;
  const int io = channels * shuffle_factor * shuffle_factor;
  std::mt19937_64 rng(seed);
  int in = io;
  for (int l = 0; l <= hidden_layers; ++l) {
    const bool last = l == hidden_layers;
    const int out = last ? io : hidden;
    ConvLayer layer{KernelBank(out, in, 3, 3), std::vector<double>(out, 0.0)};
    if (!last) {
      std::normal_distribution<double> he(0.0, std::sqrt(2.0 / (in * 9.0)));
      for (double& v : layer.kernels.values()) v = he(rng);
    }
    w.layers.push_back(std::move(layer));
    in = out;
  }
  return w;
}

void FlatNetModel::validate() const {
  if (recon_rows < 1 || recon_cols < 1) throw InvalidArgument("model reconstruction dims must be >= 1");
  const Matrix* mix = nullptr;
  if (kind == InversionKind::separable) {
    if (sep.w1.rows() != recon_rows || sep.w2.cols() != recon_cols) {
      throw InvalidArgument("separable weights produce " + dims(sep.w1.rows(), sep.w2.cols()) +
                            " but the model reconstructs " + dims(recon_rows, recon_cols));
    }
    if (!sep.w1.all_finite() || !sep.w2.all_finite()) throw InvalidArgument("separable weights are not finite");
    mix = &sep.channel_mix;
  } else {
    if (gen.w.channels() != 1 || gen.w.height() < recon_rows || gen.w.width() < recon_cols) {
      throw InvalidArgument("general weights must be one channel and at least the reconstruction dims");
    }
    if (!gen.w.all_finite()) throw InvalidArgument("general weights are not finite");
    mix = &gen.channel_mix;
  }
  if (mix->size() == 0) throw InvalidArgument("channel_mix is empty");
  if (use_enhancer) {
    enhancer.validate();
    const int r = enhancer.shuffle_factor;
    if (enhancer.layers.front().kernels.in_channels() != mix->rows() * r * r) {
      throw InvalidArgument("enhancer channels do not match the channel_mix output");
    }
    if (recon_rows % r != 0 || recon_cols % r != 0) {
      throw InvalidArgument("reconstruction dims not divisible by the enhancer shuffle factor");
    }
  }
}

Tensor flatnet_forward(const FlatNetModel& model, const Tensor& y, ForwardTape* tape) {
  if (tape) *tape = ForwardTape{};
  Tensor inverted;
  if (model.kind == InversionKind::separable) {
    const SepInversionWeights& w = model.sep;
    check_sep_dims(w, y);
    Tensor pre(w.w1.rows(), w.w2.cols(), y.channels());
    for (int c = 0; c < y.channels(); ++c) {
      Matrix yw2 = matmul(to_matrix(y.channel(c)), w.w2);
      pre.set_channel(c, to_tensor(matmul(w.w1, yw2)));
      if (tape) tape->sep_yw2.push_back(std::move(yw2));
    }
    inverted = leaky_relu(pre, w.leaky_slope);
    if (tape) {
      tape->input = y;
      tape->pre = std::move(pre);
    }
  } else {
    Tensor in = prepare_gen_input(model.gen, y, model.cropped, model.window_sigma);
    inverted = gen_deconv(model.gen.w, in, model.recon_rows, model.recon_cols);
    if (tape) tape->input = std::move(in);
  }
  const Matrix& mix = model.kind == InversionKind::separable ? model.sep.channel_mix : model.gen.channel_mix;
  Tensor mixed = apply_mix(mix, inverted);
  Tensor out = model.use_enhancer ? enhance_impl(model.enhancer, mixed, tape) : mixed;
  if (tape) {
    tape->inverted = std::move(inverted);
    tape->mixed = std::move(mixed);
    tape->recorded = true;
  }
  return out;
}

FlatNetModel zeros_like(const FlatNetModel& model) {
  FlatNetModel z = model;
  for (auto s : parameter_spans(z)) std::fill(s.begin(), s.end(), 0.0);
  return z;
}

void flatnet_backward(const FlatNetModel& model, const ForwardTape& tape, const Tensor& grad_out, FlatNetModel& grads) {
  if (!tape.recorded) throw StateError("backward called without a recorded forward pass");
  Tensor g_mixed;
  if (model.use_enhancer) {
    const EnhancerWeights& w = model.enhancer;
    const int r = w.shuffle_factor;
    const std::size_t n = w.layers.size();
    if (tape.enh_inputs.size() != n || tape.enh_pre.size() + 1 != n) {
      throw StateError("tape does not hold the enhancer activations");
    }
    const Tensor g_s_out = pixel_shuffle_down(grad_out, r);
    Tensor g_s = g_s_out;
    Tensor g_z = g_s_out;
    for (std::size_t k = n; k-- > 0;) {
      const ConvLayer& l = w.layers[k];
      ConvLayer& gl = grads.enhancer.layers[k];
      const Tensor& a = tape.enh_inputs[k];
      conv2d_backward_params(a, g_z, layer_pad(l), gl.kernels, gl.bias);
      Tensor g_a = conv2d_backward_input(g_z, l.kernels, layer_pad(l), a.height(), a.width());
      if (k > 0) {
        g_z = leaky_grad(g_a, tape.enh_pre[k - 1], w.leaky_slope);
      } else {
        g_s += g_a;
      }
    }
    g_mixed = pixel_shuffle_up(g_s, r);
  } else {
    g_mixed = grad_out;
  }
  if (!g_mixed.same_shape(tape.mixed)) throw InvalidArgument("backward: upstream gradient has the wrong shape");

  if (model.kind == InversionKind::separable) {
    const SepInversionWeights& w = model.sep;
    SepInversionWeights& gw = grads.sep;
    const Tensor g_inv = mix_backward(w.channel_mix, tape.inverted, g_mixed, gw.channel_mix);
    const Tensor g_pre = leaky_grad(g_inv, tape.pre, w.leaky_slope);
    for (int c = 0; c < tape.input.channels(); ++c) {
      const Matrix g = to_matrix(g_pre.channel(c));
      matmul_a_bt_accumulate(g, tape.sep_yw2[c], gw.w1);
      const Matrix w1y = matmul(w.w1, to_matrix(tape.input.channel(c)));
      matmul_at_b_accumulate(w1y, g, gw.w2);
    }
  } else {
    const GenInversionWeights& w = model.gen;
    const Tensor g_inv = mix_backward(w.channel_mix, tape.inverted, g_mixed, grads.gen.channel_mix);
    const int h = w.w.height(), wd = w.w.width();
    const Tensor g_full = embed(g_inv, h, wd, center_offset(h, model.recon_rows), center_offset(wd, model.recon_cols));
    const ComplexSpectrum corr = hadamard_conj(fft2(tape.input), fft2(g_full));
    Tensor& gw = grads.gen.w;
    for (int c = 0; c < corr.channels(); ++c) gw += ifft2_real(corr.channel(c));
  }
}

std::vector<std::span<double>> parameter_spans(FlatNetModel& model, const ParameterGroups& groups) {
  std::vector<std::span<double>> out;
  if (groups.inversion) {
    if (model.kind == InversionKind::separable) {
      out.push_back(model.sep.w1.data());
      out.push_back(model.sep.w2.data());
    } else {
      out.push_back(model.gen.w.data());
    }
  }
  if (groups.channel_mix) {
    out.push_back(model.kind == InversionKind::separable ? model.sep.channel_mix.data() : model.gen.channel_mix.data());
  }
  if (groups.enhancer && model.use_enhancer) {
    for (ConvLayer& l : model.enhancer.layers) {
      out.push_back(l.kernels.values());
      out.push_back(l.bias);
    }
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw InvalidArgument("lr must be > 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw InvalidArgument("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw InvalidArgument("adam_eps must be > 0");
  if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (lr_halve_every < 1) throw InvalidArgument("lr_halve_every must be >= 1");
}

double learning_rate_at(const TrainConfig& config, int t) {
  if (t < 1) throw InvalidArgument("iteration index must be >= 1");
  return config.lr * std::pow(0.5, (t - 1) / config.lr_halve_every);
}

void adam_step(const std::vector<std::span<double>>& params, const std::vector<std::span<double>>& grads,
               AdamState& state, const TrainConfig& config, int t) {
  if (params.size() != grads.size()) throw InvalidArgument("adam_step: parameter/gradient count mismatch");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.size(), 0.0);
      state.v.emplace_back(p.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw StateError("adam_step: optimizer state belongs to another model");
  const double lr = learning_rate_at(config, t);
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, t), c2 = 1.0 - std::pow(b2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k];
    const auto g = grads[k];
    if (g.size() != p.size() || state.m[k].size() != p.size()) {
      throw InvalidArgument("adam_step: gradient shape differs from its parameter");
    }
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.adam_eps);
    }
  }
}

TrainResult train(FlatNetModel model, const std::vector<Sample>& data, const TrainConfig& config,
                  const std::vector<LossTerm>& extra_terms, const SnapshotFn& on_snapshot) {
  config.validate();
  model.validate();
  if (data.empty()) throw InvalidArgument("train: dataset is empty");
  if (extra_terms.size() > 2) throw InvalidArgument("train: at most two extra loss terms");

  TrainResult result;
  if (config.calibrate_gain) {
    double num = 0.0, den = 0.0;
    const std::size_t n = std::min<std::size_t>(data.size(), 32);
    for (std::size_t i = 0; i < n; ++i) {
      const Tensor out = flatnet_forward(model, data[i].measurement);
      if (!out.same_shape(data[i].scene)) throw InvalidArgument("train: model output does not match the scene dims");
      num += simd::active_kernels().dot(out.data().data(), data[i].scene.data().data(), out.size());
      den += simd::active_kernels().dot(out.data().data(), out.data().data(), out.size());
    }
    const double gain = den > 0.0 ? num / den : 0.0;
    if (gain > 0.0 && std::isfinite(gain)) {
      if (model.kind == InversionKind::separable) {
        model.sep.w1 *= std::sqrt(gain);
        model.sep.w2 *= std::sqrt(gain);
      } else {
        model.gen.w *= gain;
      }
      result.gain = gain;
    }
  }

  const std::vector<double> weights{config.lambda1, config.lambda2, config.lambda3};
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  FlatNetModel grads = zeros_like(model);
  auto params = parameter_spans(model, config.trainable);
  auto grad_spans = parameter_spans(grads, config.trainable);
  auto all_grads = parameter_spans(grads);
  AdamState adam;
  ForwardTape tape;
  result.loss_log.reserve(config.iterations);

  for (int t = 1; t <= config.iterations; ++t) {
    for (auto s : all_grads) std::fill(s.begin(), s.end(), 0.0);
    double loss = 0.0;
    for (int b = 0; b < config.batch_size; ++b) {
      const Sample& s = data[pick(rng)];
      const Tensor out = flatnet_forward(model, s.measurement, &tape);
      std::vector<LossValue> terms{mse(out, s.scene)};
      for (const LossTerm& term : extra_terms) terms.push_back(term(out, s.scene));
      LossValue total = weighted_total(terms, std::vector<double>(weights.begin(), weights.begin() + terms.size()));
      loss += total.value;
      total.grad *= 1.0 / config.batch_size;
      flatnet_backward(model, tape, total.grad, grads);
    }
    loss /= config.batch_size;
    if (!std::isfinite(loss)) {
      throw NumericError("training loss became non-finite at iteration " + std::to_string(t) +
                         "; lower the learning rate or check the data scale");
    }
    result.loss_log.push_back(loss);
    adam_step(params, grad_spans, adam, config, t);
    if (on_snapshot && config.snapshot_every > 0 && t % config.snapshot_every == 0) on_snapshot(t, model);
  }
  result.model = std::move(model);
  return result;
}

double off_identity_energy(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("off_identity_energy needs a square matrix");
  const double total = a.frobenius_sq();
  if (total == 0.0) return 1.0;
  const int n = a.rows();
  double trace = 0.0;
  for (int i = 0; i < n; ++i) trace += a(i, i);
  const double c = trace / n;
  double off = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d = a(i, j) - (i == j ? c : 0.0);
      off += d * d;
    }
  return off / total;
}

SepDiagnostic diagnose_sep(const SepInversionWeights& w, const SeparableSystem& sys) {
  if (w.w1.cols() != sys.phi_l.rows() || w.w2.rows() != sys.phi_r.rows()) {
    throw InvalidArgument("diagnose_sep: weights do not match the system sensor dims");
  }
  SepDiagnostic d;
  d.left = matmul(w.w1, sys.phi_l);
  d.right = Matrix(w.w2.cols(), sys.phi_r.cols());
  matmul_at_b_accumulate(w.w2, sys.phi_r, d.right);
  d.left_energy = off_identity_energy(d.left);
  d.right_energy = off_identity_energy(d.right);
  return d;
}

GenDiagnostic diagnose_gen(const GenInversionWeights& w, const Psf& psf) {
  if (w.w.channels() != 1) throw InvalidArgument("diagnose_gen: W must have one channel");
  psf.validate();
  Tensor mono = psf.kernel.channel(0);
  for (int c = 1; c < psf.kernel.channels(); ++c) mono += psf.kernel.channel(c);
  mono *= 1.0 / psf.kernel.channels();
  GenDiagnostic d;
  d.response = ifft2_real(hadamard(fft2(w.w), psf_transfer(mono, w.w.height(), w.w.width())));
  double total = 0.0, peak = -1.0;
  for (int y = 0; y < d.response.height(); ++y)
    for (int x = 0; x < d.response.width(); ++x) {
      const double e = d.response(y, x) * d.response(y, x);
      total += e;
      if (e > peak) {
        peak = e;
        d.peak_row = y;
        d.peak_col = x;
      }
    }
  d.peak_ratio = total > 0.0 ? peak / total : 0.0;
  d.slice.resize(d.response.width());
  for (int x = 0; x < d.response.width(); ++x) d.slice[x] = d.response(d.peak_row, x);
  return d;
}

}  // namespace lensless
