// Command-line front end: simulate, train, reconstruct, evaluate, analyze-kmax.

#include "pfr/core/model.hpp"
#include "pfr/error.hpp"
#include "pfr/eval/evaluate.hpp"
#include "pfr/eval/figures.hpp"
#include "pfr/eval/kspace.hpp"
#include "pfr/net/checkpoint.hpp"
#include "pfr/synth.hpp"
#include "pfr/train/trainer.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

namespace {

using namespace pfr;

struct SimulateArgs
{
  PhantomSpec spec;
  std::string phase_mode = "smooth_plus_patches";
  std::size_t slices = 10;
  std::string pff = "1";
  std::string out;
};

struct TrainArgs
{
  std::string config;
  std::string data;
  std::string validation;
  std::string out;
  std::string log;
};

struct ReconstructArgs
{
  std::string data;
  std::string method = "pocs";
  std::string checkpoint;
  std::string pff = "5/8";
  int pocs_iterations = 5;
  std::string out;
};

struct EvaluateArgs
{
  std::string data;
  std::vector<std::string> methods{"zero_fill", "pocs", "homodyne"};
  std::vector<std::string> checkpoints;
  std::string pff = "5/8";
  int pocs_iterations = 5;
  std::string out;
};

struct KmaxArgs
{
  std::string data;
  std::string pff = "5/8";
};

int run_simulate(SimulateArgs &a)
{
  a.spec.phase_mode = parse_phase_mode(a.phase_mode);
  Dataset ds = generate_dataset(a.spec, a.slices);
  PfFactor const pff = PfFactor::parse(a.pff);
  if (!pff.full()) {
    auto const mask = make_pf_mask(ds.width, pff);
    for (auto &slice : ds.slices) {
      for (auto &g : slice) {
        g = forward(ComplexImage(g), mask).samples();
      }
    }
    ds.pff = pff;
  }
  write_dataset(ds, a.out);
  fmt::print("wrote {} slices of {}x{}x{} ({}) to {}\n", ds.slices.size(), ds.repetitions, ds.height, ds.width,
             pff.full() ? "images" : "k-space pff " + pff.str(), a.out);
  return 0;
}

int run_train(TrainArgs const &a)
{
  TrainConfig const cfg = TrainConfig::load(a.config);
  Dataset const data = read_dataset(a.data);
  Dataset val;
  if (!a.validation.empty()) { val = read_dataset(a.validation); }
  std::optional<net::UnrolledNetwork<float>> init;
  if (!cfg.init_checkpoint.empty()) { init = net::load_checkpoint<float>(cfg.init_checkpoint); }

  std::ofstream log;
  if (!a.log.empty()) {
    log.open(a.log, std::ios::app);
    if (!log) { throw IoError(fmt::format("cannot open log '{}'", a.log)); }
  }
  auto sink = [&](LogRecord const &r) {
    auto const line = to_json_line(r);
    std::cout << line << '\n' << std::flush;
    if (log) { log << line << '\n' << std::flush; }
  };
  auto res = train(data, cfg, a.validation.empty() ? nullptr : &val, init ? &*init : nullptr, sink);
  net::save_checkpoint(a.out, res.network, cfg.pff);
  fmt::print("saved {} ({} parameters, best epoch {})\n", a.out, res.network.parameter_count(), res.best_epoch);
  return 0;
}

int run_reconstruct(ReconstructArgs const &a)
{
  Dataset const data = read_dataset(a.data);
  EvalOptions opt;
  opt.pff = data.presampled() ? data.pff : PfFactor::parse(a.pff);
  opt.pocs_iterations = a.pocs_iterations;
  std::shared_ptr<net::UnrolledNetwork<float>> network;
  if (is_learned_method(a.method)) {
    if (a.checkpoint.empty()) { throw InvalidInput(fmt::format("method '{}' needs --checkpoint", a.method)); }
    opt.checkpoints[a.method] = a.checkpoint;
    network = load_networks({a.method}, opt).at(a.method);
  }
  std::vector<ImageSet> out;
  for (std::size_t s = 0; s < data.slices.size(); ++s) {
    KSpaceSet const y = data.presampled() ? data.kspace(s) : prepare_slice(data.images(s), opt.pff).measured;
    out.push_back(reconstruct_with(a.method, y, opt, network.get()));
  }
  write_dataset(make_dataset(out), a.out);
  fmt::print("wrote {} reconstructed slices to {}\n", out.size(), a.out);
  return 0;
}

int run_evaluate(EvaluateArgs const &a)
{
  Dataset const data = read_dataset(a.data);
  EvalOptions opt;
  opt.pff = PfFactor::parse(a.pff);
  opt.pocs_iterations = a.pocs_iterations;
  for (auto const &c : a.checkpoints) {
    auto const eq = c.find('=');
    if (eq == std::string::npos) { throw InvalidInput(fmt::format("checkpoint '{}' is not method=path", c)); }
    opt.checkpoints[c.substr(0, eq)] = c.substr(eq + 1);
  }
  std::vector<std::vector<ImageSet>> recs;
  std::vector<ImageSet> truths;
  auto const report = evaluate(data, a.methods, opt, a.out.empty() ? nullptr : &recs, &truths);
  if (a.out.empty()) {
    std::cout << metrics_csv(report.records);
  } else {
    emit_figures(report, recs, truths, a.out);
    std::ofstream(std::filesystem::path(a.out) / "summary.txt") << summary_text(report);
  }
  std::cerr << summary_text(report);
  return 0;
}

int run_kmax(KmaxArgs const &a)
{
  Dataset const data = read_dataset(a.data);
  PfFactor const pff = PfFactor::parse(a.pff);
  auto const h = max_freq_histogram(data, pff);
  nlohmann::json j{{"pff", pff.str()},
                   {"pe_lines", data.width},
                   {"center", data.width / 2},
                   {"total", h.total},
                   {"outside", h.outside},
                   {"outside_fraction", h.outside_fraction()},
                   {"counts", h.counts}};
  std::cout << j.dump() << '\n';
  return 0;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Partial Fourier MRI reconstruction toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto *simulate = app.add_subcommand("simulate", "Generate a synthetic phantom dataset");
  simulate->add_option("--out", sim.out, "Output dataset file")->required();
  simulate->add_option("--slices", sim.slices, "Number of slices")->capture_default_str();
  simulate->add_option("--height", sim.spec.height, "Readout size")->capture_default_str();
  simulate->add_option("--width", sim.spec.width, "Phase-encode size")->capture_default_str();
  simulate->add_option("--repetitions", sim.spec.n_repetitions, "Repetitions per slice")->capture_default_str();
  simulate->add_option("--ellipses", sim.spec.n_ellipses, "Inner ellipses")->capture_default_str();
  simulate->add_option("--phase-mode", sim.phase_mode, "constant, smooth_poly or smooth_plus_patches")
      ->capture_default_str();
  simulate->add_option("--constant-phase", sim.spec.constant_phase, "Phase in constant mode (rad)")
      ->capture_default_str();
  simulate->add_option("--smooth-amplitude", sim.spec.smooth_amplitude, "Polynomial phase scale (rad)")
      ->capture_default_str();
  simulate->add_option("--patch-count", sim.spec.patch_count, "Phase patches per repetition")->capture_default_str();
  simulate->add_option("--patch-min-freq", sim.spec.patch_min_freq, "Cycles per FOV")->capture_default_str();
  simulate->add_option("--patch-max-freq", sim.spec.patch_max_freq, "Cycles per FOV")->capture_default_str();
  simulate->add_option("--patch-amplitude", sim.spec.patch_amplitude, "Patch amplitude (rad)")->capture_default_str();
  simulate->add_option("--patch-width", sim.spec.patch_width, "Patch sigma / PE size")->capture_default_str();
  simulate->add_option("--noise-sigma", sim.spec.noise_sigma, "Complex noise std")->capture_default_str();
  simulate->add_option("--seed", sim.spec.seed, "Base seed")->capture_default_str();
  simulate->add_option("--pff", sim.pff, "Store PF-sampled k-space at this factor (1 = images)")
      ->capture_default_str();

  TrainArgs tr;
  auto *train_cmd = app.add_subcommand("train", "Train an unrolled network");
  train_cmd->add_option("--config", tr.config, "JSON training config")->required();
  train_cmd->add_option("--data", tr.data, "Training dataset (images)")->required();
  train_cmd->add_option("--validation", tr.validation, "Validation dataset (images)");
  train_cmd->add_option("--out", tr.out, "Output checkpoint")->required();
  train_cmd->add_option("--log", tr.log, "Append JSON-lines log here");

  ReconstructArgs rc;
  auto *recon = app.add_subcommand("reconstruct", "Reconstruct a dataset with one method");
  recon->add_option("--data", rc.data, "Dataset (images are normalized and PF-sampled first)")->required();
  recon->add_option("--method", rc.method, "Method name")->capture_default_str();
  recon->add_option("--checkpoint", rc.checkpoint, "Checkpoint for learned methods");
  recon->add_option("--pff", rc.pff, "PF factor for image-domain input")->capture_default_str();
  recon->add_option("--pocs-iterations", rc.pocs_iterations, "POCS iterations")->capture_default_str();
  recon->add_option("--out", rc.out, "Output dataset file")->required();

  EvaluateArgs ev;
  auto *evaluate_cmd = app.add_subcommand("evaluate", "Compare methods on a ground-truth dataset");
  evaluate_cmd->add_option("--data", ev.data, "Ground-truth dataset (images)")->required();
  evaluate_cmd->add_option("--methods", ev.methods, "Methods")->delimiter(',')->capture_default_str();
  evaluate_cmd->add_option("--checkpoint", ev.checkpoints, "method=path, repeatable");
  evaluate_cmd->add_option("--pff", ev.pff, "PF factor")->capture_default_str();
  evaluate_cmd->add_option("--pocs-iterations", ev.pocs_iterations, "POCS iterations")->capture_default_str();
  evaluate_cmd->add_option("--out", ev.out, "Figure and table directory (stdout table if omitted)");

  KmaxArgs km;
  auto *kmax = app.add_subcommand("analyze-kmax", "Histogram of maximum-frequency PE locations");
  kmax->add_option("--data", km.data, "Fully sampled dataset (images)")->required();
  kmax->add_option("--pff", km.pff, "PF factor defining the acquisition region")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (CLI::CallForHelp const &e) {
    return app.exit(e);
  } catch (CLI::CallForAllHelp const &e) {
    return app.exit(e);
  } catch (CLI::ParseError const &e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*simulate) { return run_simulate(sim); }
    if (*train_cmd) { return run_train(tr); }
    if (*recon) { return run_reconstruct(rc); }
    if (*evaluate_cmd) { return run_evaluate(ev); }
    if (*kmax) { return run_kmax(km); }
  } catch (pfr::Error const &e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
    return 1;
  } catch (std::exception const &e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
