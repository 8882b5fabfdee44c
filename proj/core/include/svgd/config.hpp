#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace svgd {

enum class Preset {
  custom,
  fig3_1d_mixture,
  fig9_2d_mixture,
  fig5_gaussian_ksd,
  fig6_weight_dev,
  logreg_synthetic,
  flow_thm31,
  check_lemma,
};

std::string preset_name(Preset preset);
Preset preset_from_name(const std::string& name);

struct ConfigError : std::runtime_error {
  std::string key;
  ConfigError(std::string k, const std::string& message)
      : std::runtime_error(message), key(std::move(k)) {}
};

// Fully resolved run description. Flat keys; every field has a JSON key of
// the same name (see config.cpp) and a CLI flag in the tool.
struct RunConfig {
  Preset preset = Preset::custom;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int record_every = 1;

  // sampler
  double beta = -0.5;
  double gamma = 0.1;
  double tau = 0.01;
  int refresh_period = 20;
  int mirror_iters = 40;
  double mirror_step = 0.5;
  int iters = 100;
  int particles = 200;
  int dim = 1;
  std::string bandwidth = "dimension";  // "dimension" | "median" | decimal value
  std::optional<std::string> stein_bandwidth;
  std::optional<std::string> ksd_bandwidth;  // evaluation kernel for the recorded discrepancy

  // target
  std::string target = "mixture";  // "mixture" | "gaussian" | "logreg"
  std::vector<double> mixture_weights;
  std::vector<std::vector<double>> mixture_means;
  std::vector<std::vector<double>> mixture_variances;
  std::vector<double> gaussian_mean;
  std::vector<double> gaussian_variance;
  std::vector<double> init_mean;
  double init_sigma = 1.0;

  // logistic regression
  int data_size = 2000;
  int data_dim = 10;
  std::optional<int> batch = 256;
  double prior_precision = 0.01;
  double holdout_fraction = 0.2;
  std::string data_csv;
  std::optional<int> label_col;
  bool standardize = false;

  // grid flow
  int grid_cells = 2048;
  double horizon = 50.0;
  double dt0 = 0.125;
  double rho0_mean = -2.0;
  double rho0_sigma = 1.0;
  std::optional<double> domain_lo;
  std::optional<double> domain_hi;

  // lemma battery
  int lemma_trials = 1000;
  int lemma_max_order = 6;
};

// Builds a config from defaults, the preset bundle, a JSON config file and
// CLI overrides, in that precedence order (later wins). Override values are
// JSON fragments (plain strings accepted for string-typed keys). Unknown keys
// are rejected.
RunConfig parse_config(const std::map<std::string, std::string>& cli_overrides,
                       const std::optional<std::string>& config_file);

void write_resolved_config(const RunConfig& cfg, const std::string& path);

// Executes the configured preset, writing artifacts under cfg.out_dir.
// Returns the process exit status (0 on success, 2 on divergence).
int run_preset(const RunConfig& cfg);

}  // namespace svgd
