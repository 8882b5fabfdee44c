// Command-line front end: `sample` runs the particle samplers, `flow` the
// 1D population-limit simulator, `weights` the Stein importance-weight
// solver on a particle file, and `check-lemma` the log-determinant battery.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "svgd/config.hpp"
#include "svgd/io.hpp"
#include "svgd/kernel.hpp"
#include "svgd/stein.hpp"
#include "svgd/target.hpp"

namespace {

struct CommonArgs {
  std::optional<std::string> config_file;
  std::map<std::string, std::string> overrides;
};

// Registers a pass-through option: the value string is handed to the config
// layer untouched, so types are checked in one place.
void add_override(CLI::App* cmd, CommonArgs& args, const std::string& flag,
                  const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&args, key](const std::string& value) { args.overrides[key] = value; }, help);
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_file, "JSON config file (flat keys; flags override)");
  add_override(cmd, args, "--seed", "seed", "run seed");
  add_override(cmd, args, "--out", "out", "output directory");
  add_override(cmd, args, "--record-every", "record_every", "diagnostics cadence in iterations");
}

void add_sampler_flags(CLI::App* cmd, CommonArgs& args) {
  add_override(cmd, args, "--preset", "preset", "experiment preset");
  add_override(cmd, args, "--beta", "beta", "weight exponent, must exceed -1");
  add_override(cmd, args, "--gamma", "gamma", "step size (applied to the averaged direction)");
  add_override(cmd, args, "--tau", "tau", "lower clamp gap for N*w_i");
  add_override(cmd, args, "--refresh-period", "refresh_period", "iterations between weight refreshes");
  add_override(cmd, args, "--mirror-iters", "mirror_iters", "mirror-descent iterations per refresh");
  add_override(cmd, args, "--mirror-step", "mirror_step", "mirror-descent step size");
  add_override(cmd, args, "--iters", "iters", "sampler iterations");
  add_override(cmd, args, "--particles", "particles", "particle count");
  add_override(cmd, args, "--dim", "dim", "problem dimension");
  add_override(cmd, args, "--bandwidth", "bandwidth", "kernel bandwidth: dimension | median | value");
  add_override(cmd, args, "--stein-bandwidth", "stein_bandwidth",
               "bandwidth of the kernel inside the weight solver (defaults to --bandwidth)");
  add_override(cmd, args, "--target", "target", "target family: mixture | gaussian | logreg");
  add_override(cmd, args, "--init-sigma", "init_sigma", "stddev of the particle initialization");
  add_override(cmd, args, "--data-csv", "data_csv", "CSV dataset for the logistic target");
  add_override(cmd, args, "--label-col", "label_col", "label column index (default: last)");
  add_override(cmd, args, "--standardize", "standardize", "standardize features (true/false)");
  add_override(cmd, args, "--data-size", "data_size", "synthetic dataset size");
  add_override(cmd, args, "--data-dim", "data_dim", "synthetic dataset feature count");
  add_override(cmd, args, "--batch", "batch", "minibatch size (null/0 = full batch)");
  add_override(cmd, args, "--prior-precision", "prior_precision", "Gaussian prior precision");
}

int run_configured(const CommonArgs& args, const std::optional<std::string>& forced_preset) {
  auto overrides = args.overrides;
  if (forced_preset && !overrides.count("preset")) overrides["preset"] = *forced_preset;
  svgd::RunConfig cfg = svgd::parse_config(overrides, args.config_file);
  return svgd::run_preset(cfg);
}

struct WeightsArgs {
  std::string particles_csv;
  std::string out_dir = "out";
  int iterations = 200;
  double step = 0.5;
  std::string bandwidth = "dimension";
};

int run_weights(const WeightsArgs& args) {
  Eigen::MatrixXd particles = svgd::load_matrix_csv(args.particles_csv);
  const int dim = static_cast<int>(particles.cols());
  // Standard-normal target: the solver only consumes the score.
  svgd::TargetModel target = svgd::make_mixture_target(
      svgd::single_gaussian(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)));
  svgd::KernelSpec spec = args.bandwidth == "dimension" ? svgd::KernelSpec::rbf_dimension()
                          : args.bandwidth == "median"
                              ? svgd::KernelSpec::rbf_median()
                              : svgd::KernelSpec::rbf(std::stod(args.bandwidth));
  spec = svgd::resolve_bandwidth(spec, particles);
  auto result = svgd::solve_stein_weights(
      particles, target, spec, svgd::SimplexWeights::uniform(static_cast<int>(particles.rows())),
      args.iterations, args.step);
  std::filesystem::create_directories(args.out_dir);
  svgd::write_weights_file(args.out_dir + "/weights.txt", result.weights.values,
                           result.objective * result.scale);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle sampling toolkit: SVGD, importance-weighted SVGD, and the grid flow"};
  app.require_subcommand(1);

  CommonArgs sample_args;
  CLI::App* sample = app.add_subcommand("sample", "run SVGD / weighted-SVGD presets");
  add_common(sample, sample_args);
  add_sampler_flags(sample, sample_args);

  CommonArgs flow_args;
  CLI::App* flow = app.add_subcommand("flow", "simulate the 1D population-limit flow");
  add_common(flow, flow_args);
  add_override(flow, flow_args, "--beta", "beta", "weight exponent, must exceed -1");
  add_override(flow, flow_args, "--grid-cells", "grid_cells", "grid resolution");
  add_override(flow, flow_args, "--horizon", "horizon", "simulated time horizon T");
  add_override(flow, flow_args, "--dt0", "dt0", "recording interval / max substep");
  add_override(flow, flow_args, "--rho0-mean", "rho0_mean", "initial density mean");
  add_override(flow, flow_args, "--rho0-sigma", "rho0_sigma", "initial density stddev");
  add_override(flow, flow_args, "--domain-lo", "domain_lo", "grid lower bound (default: auto)");
  add_override(flow, flow_args, "--domain-hi", "domain_hi", "grid upper bound (default: auto)");
  add_override(flow, flow_args, "--bandwidth", "bandwidth", "kernel bandwidth");

  WeightsArgs weights_args;
  CLI::App* weights = app.add_subcommand("weights", "solve Stein importance weights for a particle file");
  weights->add_option("--particles-csv", weights_args.particles_csv, "input particle matrix CSV")
      ->required();
  weights->add_option("--out", weights_args.out_dir, "output directory");
  weights->add_option("--mirror-iters", weights_args.iterations, "mirror-descent iterations");
  weights->add_option("--mirror-step", weights_args.step, "mirror-descent step size");
  weights->add_option("--bandwidth", weights_args.bandwidth, "kernel bandwidth");

  CommonArgs lemma_args;
  CLI::App* lemma = app.add_subcommand("check-lemma", "log-determinant bound battery");
  add_common(lemma, lemma_args);
  add_override(lemma, lemma_args, "--trials", "lemma_trials", "number of random matrices");
  add_override(lemma, lemma_args, "--max-order", "lemma_max_order", "largest matrix order");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sample->parsed()) return run_configured(sample_args, std::nullopt);
    if (flow->parsed()) return run_configured(flow_args, "flow-thm31");
    if (weights->parsed()) return run_weights(weights_args);
    if (lemma->parsed()) return run_configured(lemma_args, "check-lemma");
  } catch (const svgd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
