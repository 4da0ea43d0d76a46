// Command-line front end: simulation, dataset synthesis, reconstruction,
// training, evaluation and diagnostics.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <iostream>
#include <string>

#include "lensless/classic.hpp"
#include "lensless/crop_study.hpp"
#include "lensless/error.hpp"
#include "lensless/flatnet.hpp"
#include "lensless/io.hpp"
#include "lensless/losses.hpp"
#include "lensless/ops.hpp"
#include "lensless/pipeline.hpp"
#include "lensless/synthetic.hpp"

namespace fs = std::filesystem;
using namespace lensless;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw Error("cannot write " + path.string());
}

RunConfig open_run(const std::string& config_path, const fs::path& out) {
  RunConfig cfg = RunConfig::load(config_path);
  fs::create_directories(out);
  write_text(out / "config.txt", cfg.echo());
  return cfg;
}

// Display copy scaled so the largest magnitude maps to white.
Tensor for_display(const Tensor& t) {
  const double m = t.max_abs();
  Tensor out = t;
  if (m > 0.0) out *= 1.0 / m;
  return out;
}

Tensor load_image(const fs::path& path) {
  return path.extension() == ".png" ? png_import(path) : load_tensor(path);
}

std::string metrics_line(const Tensor& recon, const Tensor& scene) {
  return "psnr=" + num(psnr(recon, scene, 1.0)) + " ssim=" + num(ssim(recon, scene, 1.0));
}

struct Options {
  std::string config;
  std::string out;
  std::string scenes;
  std::string data;
  std::string weights;
  std::string init;
  std::string input;
  std::string scene;
  std::string method = "wiener";
  std::string split = "test";
  int count = 10;
  int size = 32;
  int channels = 1;
  std::uint64_t seed = 0;
};

void cmd_simulate_psf(const Options& o) {
  const RunConfig cfg = open_run(o.config, o.out);
  const Psf psf = cfg.get("init") == "uncalibrated" ? uncalibrated_psf_from_config(cfg) : psf_from_config(cfg);
  save_tensor(fs::path(o.out) / "psf.lnsl", psf.kernel);
  png_export(fs::path(o.out) / "psf.png", for_display(psf.kernel));
  std::cout << "psf " << psf.kernel.height() << "x" << psf.kernel.width() << " written to " << o.out << '\n';
}

void cmd_calibrate_sim(const Options& o) {
  const RunConfig cfg = open_run(o.config, o.out);
  const fs::path out(o.out);
  if (cfg.get("model") == "sep") {
    const SeparableSystem sys = system_from_config(cfg);
    save_matrix(out / "phi_l.lnsl", sys.phi_l);
    save_matrix(out / "phi_r.lnsl", sys.phi_r);
    png_export(out / "phi_l.png", for_display(to_tensor(sys.phi_l)));
    png_export(out / "phi_r.png", for_display(to_tensor(sys.phi_r)));
    std::cout << "phi_l " << sys.phi_l.rows() << "x" << sys.phi_l.cols() << ", phi_r " << sys.phi_r.rows() << "x"
              << sys.phi_r.cols() << " written to " << o.out << '\n';
  } else {
    const Psf psf = psf_from_config(cfg);
    save_tensor(out / "psf.lnsl", psf.kernel);
    png_export(out / "psf.png", for_display(psf.kernel));
    std::cout << "calibration psf written to " << o.out << '\n';
  }
}

void cmd_synthesize(const Options& o) {
  const RunConfig cfg = open_run(o.config, o.out);
  const SynthesisReport r = synthesize_dataset(o.scenes, cfg, o.out);
  std::cout << "train=" << r.train << " test=" << r.test << " skipped=" << r.skipped.size() << '\n';
}

void cmd_init_weights(const Options& o) {
  const RunConfig cfg = open_run(o.config, o.out);
  save_model(o.out, init_model_from_config(cfg));
  std::cout << "initial weights written to " << o.out << '\n';
}

void cmd_reconstruct(const Options& o) {
  const RunConfig cfg = open_run(o.config, o.out);
  const fs::path out(o.out);
  Tensor scene;
  if (!o.scene.empty()) scene = fit_scene(cfg, load_image(o.scene));
  Tensor y;
  if (!o.input.empty()) {
    y = load_tensor(o.input);
  } else if (!scene.empty()) {
    y = measure(cfg, scene, cfg.get_u64("seed"));
    save_tensor(out / "measurement.lnsl", y);
  } else {
    throw CLI::ValidationError("reconstruct", "needs --input or --scene");
  }

  const int rows = cfg.get_int("recon_rows"), cols = cfg.get_int("recon_cols");
  Tensor x;
  if (o.method == "tikhonov") {
    if (cfg.get("model") != "sep") throw ConfigError("model", "tikhonov needs model = sep");
    x = tikhonov_separable(y, system_from_config(cfg), cfg.get_double("tikhonov_lambda"));
  } else if (o.method == "wiener") {
    if (cfg.get("model") != "gen") throw ConfigError("model", "wiener needs model = gen");
    const Psf psf = psf_from_config(cfg);
    const auto [fh, fw] = full_dims(cfg, psf);
    x = wiener_deconv(pad_and_window(y, fh, fw, cfg.get_double("window_sigma")), psf, cfg.get_double("wiener_k"), rows,
                      cols);
  } else if (o.method == "tv-admm") {
    if (cfg.get("model") != "gen") throw ConfigError("model", "tv-admm needs model = gen");
    x = tv_admm(y, psf_from_config(cfg),
                {rows, cols, cfg.get_double("tv_lambda"), cfg.get_double("tv_rho"), cfg.get_int("tv_iterations")})
            .scene;
  } else if (o.method == "flatnet") {
    if (o.weights.empty()) throw CLI::ValidationError("reconstruct", "--method flatnet needs --weights");
    x = flatnet_forward(load_model(o.weights), y);
  } else {
    throw CLI::ValidationError("--method", "unknown method '" + o.method + "'");
  }
  save_tensor(out / "reconstruction.lnsl", x);
  png_export(out / "reconstruction.png", x);
  std::string record = "method=" + o.method + " rows=" + std::to_string(x.height()) + " cols=" +
                       std::to_string(x.width());
  if (!scene.empty()) record += " " + metrics_line(x, scene);
  write_text(out / "metrics.txt", record + "\n");
  std::cout << record << '\n';
}

void cmd_train(const Options& o) {
  const RunConfig cfg = open_run(o.config, o.out);
  const fs::path out(o.out);
  const FlatNetModel model = o.init.empty() ? init_model_from_config(cfg) : load_model(o.init);
  const std::vector<Sample> data = load_dataset(o.data, "train");
  const TrainConfig tc = train_config_from(cfg);

  std::optional<SeparableSystem> sys;
  if (model.kind == InversionKind::separable) sys = system_from_config(cfg);
  std::string diag = "iteration,value\n";
  const SnapshotFn snapshot = [&](int t, const FlatNetModel& m) {
    const double v = sys ? diagnose_sep(m.sep, *sys).left_energy : diagnose_gen(m.gen, psf_from_config(cfg)).peak_ratio;
    diag += std::to_string(t) + "," + num(v) + "\n";
  };
  const TrainResult r = train(model, data, tc, {}, snapshot);
  save_model(out, r.model);
  std::string log = "iteration,loss\n";
  for (std::size_t i = 0; i < r.loss_log.size(); ++i) log += std::to_string(i + 1) + "," + num(r.loss_log[i]) + "\n";
  write_text(out / "loss.csv", log);
  if (tc.snapshot_every > 0) write_text(out / "snapshots.csv", diag);
  std::cout << "trained " << tc.iterations << " iterations, final loss " << r.loss_log.back() << ", gain " << r.gain
            << '\n';
}

void cmd_eval(const Options& o) {
  const RunConfig cfg = open_run(o.config, o.out);
  const FlatNetModel model = load_model(o.weights);
  const auto names = dataset_names(o.data, o.split);
  const auto samples = load_dataset(o.data, o.split);
  if (samples.empty()) throw Error("split '" + o.split + "' of " + o.data + " is empty");
  std::string record;
  double ps = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Tensor x = flatnet_forward(model, samples[i].measurement);
    const double p = psnr(x, samples[i].scene, 1.0), s = ssim(x, samples[i].scene, 1.0);
    ps += p;
    ss += s;
    record += "scene=" + names[i] + " psnr=" + num(p) + " ssim=" + num(s) + "\n";
  }
  const double n = static_cast<double>(samples.size());
  record += "mean psnr=" + num(ps / n) + " ssim=" + num(ss / n) + " n=" + std::to_string(samples.size()) + "\n";
  write_text(fs::path(o.out) / "metrics.txt", record);
  std::cout << "mean psnr " << ps / n << " dB, mean ssim " << ss / n << " over " << samples.size() << " scenes\n";
}

void cmd_diagnose(const Options& o) {
  const RunConfig cfg = open_run(o.config, o.out);
  const fs::path out(o.out);
  const FlatNetModel model = load_model(o.weights);
  if (model.kind == InversionKind::separable) {
    const SepDiagnostic d = diagnose_sep(model.sep, system_from_config(cfg));
    save_matrix(out / "w1_phi_l.lnsl", d.left);
    save_matrix(out / "w2t_phi_r.lnsl", d.right);
    png_export(out / "w1_phi_l.png", for_display(to_tensor(d.left)));
    png_export(out / "w2t_phi_r.png", for_display(to_tensor(d.right)));
    const std::string text =
        "off_identity_left=" + num(d.left_energy) + "\noff_identity_right=" + num(d.right_energy) + "\n";
    write_text(out / "diagnostics.txt", text);
    std::cout << text;
  } else {
    const GenDiagnostic d = diagnose_gen(model.gen, psf_from_config(cfg));
    save_tensor(out / "response.lnsl", d.response);
    png_export(out / "response.png", for_display(d.response));
    std::string slice = "x,value\n";
    for (std::size_t i = 0; i < d.slice.size(); ++i) slice += std::to_string(i) + "," + num(d.slice[i]) + "\n";
    write_text(out / "slice.csv", slice);
    const std::string text = "peak_ratio=" + num(d.peak_ratio) + "\npeak_row=" + std::to_string(d.peak_row) +
                             "\npeak_col=" + std::to_string(d.peak_col) + "\n";
    write_text(out / "diagnostics.txt", text);
    std::cout << text;
  }
}

void cmd_crop_sweep(const Options& o) {
  const RunConfig cfg = open_run(o.config, o.out);
  CropSweepConfig c;
  c.psf = psf_from_config(cfg);
  c.recon_rows = cfg.get_int("recon_rows");
  c.recon_cols = cfg.get_int("recon_cols");
  c.channels = cfg.get_int("channels");
  c.noise_sigma = cfg.get_double("noise_sigma");
  c.window_sigma = cfg.get_double("window_sigma");
  c.wiener_k = cfg.get_double("wiener_k");
  c.wiener_k_grid = parse_double_list(cfg.get("crop_wiener_k_grid"));
  c.tv_lambda = cfg.get_double("tv_lambda");
  c.tv_rho = cfg.get_double("tv_rho");
  c.tv_iterations = cfg.get_int("tv_iterations");
  c.train_scenes = cfg.get_int("crop_train_scenes");
  c.test_scenes = cfg.get_int("crop_test_scenes");
  c.train = train_config_from(cfg);
  c.train.iterations = cfg.get_int("crop_iterations");
  std::vector<std::uint64_t> seeds;
  for (double s : parse_double_list(cfg.get("crop_seeds"))) seeds.push_back(static_cast<std::uint64_t>(s));
  const CropSweepTable t =
      run_crop_sweep(c, parse_double_list(cfg.get("crop_fractions")), parse_string_list(cfg.get("crop_methods")), seeds);
  export_results(t, fs::path(o.out) / "crop_sweep.csv");
  std::cout << format_results(t);
  for (const CropCell& cell : t.cells)
    for (const std::string& e : cell.errors) std::cerr << "warning: " << cell.method << " @ " << cell.fraction << ": " << e << '\n';
}

void cmd_make_scenes(const Options& o) {
  fs::create_directories(o.out);
  for (int i = 0; i < o.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%03d.png", i);
    png_export(fs::path(o.out) / name, synthetic_scene(o.size, o.size, o.channels, derive_seed(o.seed, i)));
  }
  std::cout << o.count << " scenes written to " << o.out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lensless camera simulation and reconstruction toolkit"};
  app.require_subcommand(1);
  Options o;

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "run configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", o.out, "run directory")->required();
  };

  auto* simulate = app.add_subcommand("simulate-psf", "Fresnel-simulate the mask PSF");
  with_config(simulate);
  auto* calibrate = app.add_subcommand("calibrate-sim", "simulate calibration: separable matrices or PSF");
  with_config(calibrate);
  auto* synth = app.add_subcommand("synthesize", "synthesize a measurement dataset from scene images");
  with_config(synth);
  synth->add_option("--scenes", o.scenes, "directory of scene PNGs")->required();
  auto* initw = app.add_subcommand("init-weights", "write the initial network checkpoint");
  with_config(initw);
  auto* recon = app.add_subcommand("reconstruct", "reconstruct one measurement");
  with_config(recon);
  recon->add_option("-m,--method", o.method, "tikhonov | wiener | tv-admm | flatnet")
      ->check(CLI::IsMember({"tikhonov", "wiener", "tv-admm", "flatnet"}));
  recon->add_option("--input", o.input, "measurement tensor (.lnsl)");
  recon->add_option("--scene", o.scene, "ground-truth scene (.png or .lnsl); simulated when --input is absent");
  recon->add_option("--weights", o.weights, "checkpoint directory for --method flatnet");
  auto* trainc = app.add_subcommand("train", "train the network on a synthesized dataset");
  with_config(trainc);
  trainc->add_option("--data", o.data, "dataset directory")->required();
  trainc->add_option("--init", o.init, "start from this checkpoint instead of the configured init");
  auto* evalc = app.add_subcommand("eval", "score a checkpoint on a dataset split");
  with_config(evalc);
  evalc->add_option("--data", o.data, "dataset directory")->required();
  evalc->add_option("--weights", o.weights, "checkpoint directory")->required();
  evalc->add_option("--split", o.split, "train | test")->check(CLI::IsMember({"train", "test"}));
  auto* diag = app.add_subcommand("diagnose", "inversion diagnostics of a checkpoint");
  with_config(diag);
  diag->add_option("--weights", o.weights, "checkpoint directory")->required();
  auto* sweep = app.add_subcommand("crop-sweep", "reconstruction quality versus retained sensor area");
  with_config(sweep);
  auto* scenes = app.add_subcommand("make-scenes", "write synthetic scene PNGs");
  scenes->add_option("-o,--out", o.out, "output directory")->required();
  scenes->add_option("--count", o.count, "number of scenes")->check(CLI::PositiveNumber);
  scenes->add_option("--size", o.size, "side length in pixels")->check(CLI::PositiveNumber);
  scenes->add_option("--channels", o.channels, "1 or 3")->check(CLI::IsMember({1, 3}));
  scenes->add_option("--seed", o.seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) cmd_simulate_psf(o);
    if (*calibrate) cmd_calibrate_sim(o);
    if (*synth) cmd_synthesize(o);
    if (*initw) cmd_init_weights(o);
    if (*recon) cmd_reconstruct(o);
    if (*trainc) cmd_train(o);
    if (*evalc) cmd_eval(o);
    if (*diag) cmd_diagnose(o);
    if (*sweep) cmd_crop_sweep(o);
    if (*scenes) cmd_make_scenes(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
