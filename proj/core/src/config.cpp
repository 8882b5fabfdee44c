#include "svgd/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include <json.hpp>

#include "svgd/io.hpp"
#include "svgd/numerics.hpp"
#include "svgd/rng.hpp"
#include "svgd/sampler.hpp"

namespace svgd {

namespace fs = std::filesystem;
using nlohmann::json;

std::string preset_name(Preset preset) {
  switch (preset) {
    case Preset::custom: return "custom";
    case Preset::fig3_1d_mixture: return "fig3-1d-mixture";
    case Preset::fig9_2d_mixture: return "fig9-2d-mixture";
    case Preset::fig5_gaussian_ksd: return "fig5-gaussian-ksd";
    case Preset::fig6_weight_dev: return "fig6-weight-dev";
    case Preset::logreg_synthetic: return "logreg-synthetic";
    case Preset::flow_thm31: return "flow-thm31";
    case Preset::check_lemma: return "check-lemma";
  }
  throw std::logic_error("unknown preset");
}

Preset preset_from_name(const std::string& name) {
  for (Preset p : {Preset::custom, Preset::fig3_1d_mixture, Preset::fig9_2d_mixture,
                   Preset::fig5_gaussian_ksd, Preset::fig6_weight_dev, Preset::logreg_synthetic,
                   Preset::flow_thm31, Preset::check_lemma})
    if (preset_name(p) == name) return p;
  throw ConfigError("preset", "unknown preset: " + name);
}

namespace {

double as_double(const std::string& key, const json& v) {
  if (!v.is_number()) throw ConfigError(key, key + ": expected a number");
  return v.get<double>();
}

int as_int(const std::string& key, const json& v) {
  if (!v.is_number_integer()) throw ConfigError(key, key + ": expected an integer");
  return v.get<int>();
}

bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) throw ConfigError(key, key + ": expected true/false");
  return v.get<bool>();
}

std::string as_string(const std::string& key, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw ConfigError(key, key + ": expected a string");
}

std::vector<double> as_vector(const std::string& key, const json& v) {
  if (!v.is_array()) throw ConfigError(key, key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_double(key, e));
  return out;
}

std::vector<std::vector<double>> as_nested(const std::string& key, const json& v) {
  if (!v.is_array()) throw ConfigError(key, key + ": expected an array");
  std::vector<std::vector<double>> out;
  for (const auto& e : v) {
    if (e.is_number())
      out.push_back({e.get<double>()});
    else
      out.push_back(as_vector(key, e));
  }
  return out;
}

void apply_key(RunConfig& cfg, const std::string& key, const json& v) {
  if (key == "preset") cfg.preset = preset_from_name(as_string(key, v));
  else if (key == "out") cfg.out_dir = as_string(key, v);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(v.is_number() ? v.get<double>() : as_double(key, v));
  else if (key == "record_every") cfg.record_every = as_int(key, v);
  else if (key == "beta") cfg.beta = as_double(key, v);
  else if (key == "gamma") cfg.gamma = as_double(key, v);
  else if (key == "tau") cfg.tau = as_double(key, v);
  else if (key == "refresh_period") cfg.refresh_period = as_int(key, v);
  else if (key == "mirror_iters") cfg.mirror_iters = as_int(key, v);
  else if (key == "mirror_step") cfg.mirror_step = as_double(key, v);
  else if (key == "iters") cfg.iters = as_int(key, v);
  else if (key == "particles") cfg.particles = as_int(key, v);
  else if (key == "dim") cfg.dim = as_int(key, v);
  else if (key == "bandwidth") cfg.bandwidth = as_string(key, v);
  else if (key == "stein_bandwidth") cfg.stein_bandwidth = as_string(key, v);
  else if (key == "ksd_bandwidth") cfg.ksd_bandwidth = as_string(key, v);
  else if (key == "target") cfg.target = as_string(key, v);
  else if (key == "mixture_weights") cfg.mixture_weights = as_vector(key, v);
  else if (key == "mixture_means") cfg.mixture_means = as_nested(key, v);
  else if (key == "mixture_variances") cfg.mixture_variances = as_nested(key, v);
  else if (key == "gaussian_mean") cfg.gaussian_mean = as_vector(key, v);
  else if (key == "gaussian_variance") cfg.gaussian_variance = as_vector(key, v);
  else if (key == "init_mean") cfg.init_mean = as_vector(key, v);
  else if (key == "init_sigma") cfg.init_sigma = as_double(key, v);
  else if (key == "data_size") cfg.data_size = as_int(key, v);
  else if (key == "data_dim") cfg.data_dim = as_int(key, v);
  else if (key == "batch") cfg.batch = v.is_null() ? std::nullopt : std::make_optional(as_int(key, v));
  else if (key == "prior_precision") cfg.prior_precision = as_double(key, v);
  else if (key == "holdout_fraction") cfg.holdout_fraction = as_double(key, v);
  else if (key == "data_csv") cfg.data_csv = as_string(key, v);
  else if (key == "label_col") cfg.label_col = v.is_null() ? std::nullopt : std::make_optional(as_int(key, v));
  else if (key == "standardize") cfg.standardize = as_bool(key, v);
  else if (key == "grid_cells") cfg.grid_cells = as_int(key, v);
  else if (key == "horizon") cfg.horizon = as_double(key, v);
  else if (key == "dt0") cfg.dt0 = as_double(key, v);
  else if (key == "rho0_mean") cfg.rho0_mean = as_double(key, v);
  else if (key == "rho0_sigma") cfg.rho0_sigma = as_double(key, v);
  else if (key == "domain_lo") cfg.domain_lo = v.is_null() ? std::nullopt : std::make_optional(as_double(key, v));
  else if (key == "domain_hi") cfg.domain_hi = v.is_null() ? std::nullopt : std::make_optional(as_double(key, v));
  else if (key == "lemma_trials") cfg.lemma_trials = as_int(key, v);
  else if (key == "lemma_max_order") cfg.lemma_max_order = as_int(key, v);
  else throw ConfigError(key, "unknown config key: " + key);
}

void apply_preset(RunConfig& cfg) {
  switch (cfg.preset) {
    case Preset::custom:
    case Preset::check_lemma:
      break;
    case Preset::fig3_1d_mixture:
      cfg.target = "mixture";
      cfg.dim = 1;
      cfg.mixture_weights = {0.4, 0.6};
      cfg.mixture_means = {{2.0}, {6.0}};
      cfg.mixture_variances = {{1.0}, {1.0}};
      cfg.init_mean = {0.0};
      // Wide start covering both basins; a unit-width start leaves every
      // particle in the near basin and the comparison degenerates.
      cfg.init_sigma = 3.0;
      cfg.particles = 200;
      cfg.beta = -0.5;
      cfg.gamma = 0.2;
      cfg.tau = 0.01;
      cfg.refresh_period = 20;
      cfg.mirror_iters = 40;
      cfg.mirror_step = 0.3;
      cfg.iters = 100;
      break;
    case Preset::fig9_2d_mixture:
      cfg.target = "mixture";
      cfg.dim = 2;
      cfg.mixture_weights = {0.4, 0.2, 0.4};
      cfg.mixture_means = {{2.0, 0.0}, {4.0, 0.0}, {3.0, -3.0}};
      cfg.mixture_variances = {{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}};
      cfg.init_mean = {-2.0, 0.0};
      cfg.init_sigma = 1.0;
      cfg.particles = 200;
      cfg.beta = -0.5;
      cfg.gamma = 0.2;
      cfg.tau = 0.01;
      cfg.refresh_period = 20;
      cfg.mirror_iters = 40;
      cfg.mirror_step = 0.3;
      cfg.iters = 500;
      break;
    case Preset::fig5_gaussian_ksd:
    case Preset::fig6_weight_dev:
      cfg.target = "gaussian";
      cfg.dim = 10;
      cfg.gaussian_mean.clear();  // filled to (2,...,2) at build for this preset
      cfg.gaussian_variance.clear();
      cfg.init_mean.clear();
      cfg.init_sigma = 1.0;
      cfg.particles = 300;
      cfg.beta = -0.5;
      cfg.gamma = 0.1;
      cfg.tau = 0.01;
      cfg.refresh_period = 1;
      cfg.mirror_iters = 40;
      cfg.mirror_step = 0.3;
      cfg.iters = 100;
      cfg.ksd_bandwidth = "median";  // evaluation kernel; the dynamics keep h = d
      break;
    case Preset::logreg_synthetic:
      cfg.target = "logreg";
      cfg.data_dim = 10;
      cfg.data_size = 2000;
      cfg.batch = 256;
      cfg.prior_precision = 0.01;
      cfg.holdout_fraction = 0.2;
      cfg.particles = 100;
      cfg.beta = -0.5;
      cfg.gamma = 0.05;
      cfg.tau = 0.05;
      cfg.refresh_period = 20;
      cfg.mirror_iters = 100;
      cfg.mirror_step = 0.5;
      cfg.iters = 500;
      cfg.record_every = 10;
      break;
    case Preset::flow_thm31:
      cfg.target = "gaussian";
      cfg.dim = 1;
      cfg.gaussian_mean = {2.0};
      cfg.gaussian_variance = {1.0};
      cfg.rho0_mean = -2.0;
      cfg.rho0_sigma = 1.0;
      cfg.beta = -0.5;
      cfg.grid_cells = 2048;
      cfg.horizon = 50.0;
      cfg.dt0 = 0.125;
      break;
  }
}

double parse_bandwidth_value(const std::string& key, const std::string& text) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  double h = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, h);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(key, key + ": expected 'dimension', 'median' or a decimal value, got '" +
                               text + "'");
  if (!(h > 0.0)) throw ConfigError(key, key + ": bandwidth must be positive");
  return h;
}

KernelSpec spec_from_string(const std::string& key, const std::string& text) {
  if (text == "dimension") return KernelSpec::rbf_dimension();
  if (text == "median") return KernelSpec::rbf_median();
  return KernelSpec::rbf(parse_bandwidth_value(key, text));
}

void validate(const RunConfig& cfg) {
  if (!(cfg.beta > -1.0)) throw ConfigError("beta", "beta must exceed -1");
  if (!(cfg.tau > 0.0) || cfg.tau > 1.0) throw ConfigError("tau", "tau must lie in (0, 1]");
  if (cfg.gamma < 0.0) throw ConfigError("gamma", "gamma must be nonnegative");
  if (cfg.refresh_period < 1) throw ConfigError("refresh_period", "refresh_period must be >= 1");
  if (cfg.mirror_iters < 0) throw ConfigError("mirror_iters", "mirror_iters must be >= 0");
  if (!(cfg.mirror_step > 0.0)) throw ConfigError("mirror_step", "mirror_step must be positive");
  if (cfg.iters < 0) throw ConfigError("iters", "iters must be >= 0");
  if (cfg.record_every < 1) throw ConfigError("record_every", "record_every must be >= 1");
  if (cfg.particles < 1) throw ConfigError("particles", "particles must be >= 1");
  if (cfg.dim < 1) throw ConfigError("dim", "dim must be >= 1");
  if (cfg.target != "mixture" && cfg.target != "gaussian" && cfg.target != "logreg")
    throw ConfigError("target", "target must be one of mixture, gaussian, logreg");
  if (!(cfg.init_sigma > 0.0)) throw ConfigError("init_sigma", "init_sigma must be positive");
  if (cfg.data_size < 1) throw ConfigError("data_size", "data_size must be >= 1");
  if (cfg.data_dim < 1) throw ConfigError("data_dim", "data_dim must be >= 1");
  if (!(cfg.prior_precision > 0.0))
    throw ConfigError("prior_precision", "prior_precision must be positive");
  if (cfg.holdout_fraction < 0.0 || cfg.holdout_fraction >= 1.0)
    throw ConfigError("holdout_fraction", "holdout_fraction must lie in [0, 1)");
  if (cfg.grid_cells < 8) throw ConfigError("grid_cells", "grid_cells must be >= 8");
  if (!(cfg.horizon > 0.0)) throw ConfigError("horizon", "horizon must be positive");
  if (!(cfg.dt0 > 0.0)) throw ConfigError("dt0", "dt0 must be positive");
  if (!(cfg.rho0_sigma > 0.0)) throw ConfigError("rho0_sigma", "rho0_sigma must be positive");
  if (cfg.lemma_trials < 1) throw ConfigError("lemma_trials", "lemma_trials must be >= 1");
  if (cfg.lemma_max_order < 1 || cfg.lemma_max_order > 64)
    throw ConfigError("lemma_max_order", "lemma_max_order must lie in [1, 64]");
  spec_from_string("bandwidth", cfg.bandwidth);
  if (cfg.stein_bandwidth) spec_from_string("stein_bandwidth", *cfg.stein_bandwidth);
  if (cfg.ksd_bandwidth) spec_from_string("ksd_bandwidth", *cfg.ksd_bandwidth);
}

json to_json(const RunConfig& cfg) {
  json j;
  j["preset"] = preset_name(cfg.preset);
  j["out"] = cfg.out_dir;
  j["seed"] = cfg.seed;
  j["record_every"] = cfg.record_every;
  j["beta"] = cfg.beta;
  j["gamma"] = cfg.gamma;
  j["tau"] = cfg.tau;
  j["refresh_period"] = cfg.refresh_period;
  j["mirror_iters"] = cfg.mirror_iters;
  j["mirror_step"] = cfg.mirror_step;
  j["iters"] = cfg.iters;
  j["particles"] = cfg.particles;
  j["dim"] = cfg.dim;
  j["bandwidth"] = cfg.bandwidth;
  if (cfg.stein_bandwidth) j["stein_bandwidth"] = *cfg.stein_bandwidth;
  if (cfg.ksd_bandwidth) j["ksd_bandwidth"] = *cfg.ksd_bandwidth;
  j["target"] = cfg.target;
  if (!cfg.mixture_weights.empty()) {
    j["mixture_weights"] = cfg.mixture_weights;
    j["mixture_means"] = cfg.mixture_means;
    j["mixture_variances"] = cfg.mixture_variances;
  }
  if (!cfg.gaussian_mean.empty()) j["gaussian_mean"] = cfg.gaussian_mean;
  if (!cfg.gaussian_variance.empty()) j["gaussian_variance"] = cfg.gaussian_variance;
  if (!cfg.init_mean.empty()) j["init_mean"] = cfg.init_mean;
  j["init_sigma"] = cfg.init_sigma;
  if (cfg.target == "logreg") {
    j["data_size"] = cfg.data_size;
    j["data_dim"] = cfg.data_dim;
    j["batch"] = cfg.batch ? json(*cfg.batch) : json(nullptr);
    j["prior_precision"] = cfg.prior_precision;
    j["holdout_fraction"] = cfg.holdout_fraction;
    if (!cfg.data_csv.empty()) j["data_csv"] = cfg.data_csv;
    if (cfg.label_col) j["label_col"] = *cfg.label_col;
    j["standardize"] = cfg.standardize;
  }
  if (cfg.preset == Preset::flow_thm31) {
    j["grid_cells"] = cfg.grid_cells;
    j["horizon"] = cfg.horizon;
    j["dt0"] = cfg.dt0;
    j["rho0_mean"] = cfg.rho0_mean;
    j["rho0_sigma"] = cfg.rho0_sigma;
    if (cfg.domain_lo) j["domain_lo"] = *cfg.domain_lo;
    if (cfg.domain_hi) j["domain_hi"] = *cfg.domain_hi;
  }
  if (cfg.preset == Preset::check_lemma) {
    j["lemma_trials"] = cfg.lemma_trials;
    j["lemma_max_order"] = cfg.lemma_max_order;
  }
  return j;
}

json parse_override_value(const std::string& key, const std::string& text) {
  json parsed = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) return json(text);  // plain string value
  if (parsed.is_string() || parsed.is_number() || parsed.is_boolean() || parsed.is_null() ||
      parsed.is_array())
    return parsed;
  throw ConfigError(key, key + ": unsupported value type");
}

}  // namespace

RunConfig parse_config(const std::map<std::string, std::string>& cli_overrides,
                       const std::optional<std::string>& config_file) {
  json file_values = json::object();
  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) throw ConfigError("config", "cannot open config file: " + *config_file);
    try {
      in >> file_values;
    } catch (const json::parse_error& e) {
      throw ConfigError("config", std::string("config file is not valid JSON: ") + e.what());
    }
    if (!file_values.is_object()) throw ConfigError("config", "config file must hold a JSON object");
  }

  RunConfig cfg;
  // The preset decides the defaults bundle; file and CLI values then override.
  if (auto it = cli_overrides.find("preset"); it != cli_overrides.end())
    cfg.preset = preset_from_name(it->second);
  else if (file_values.contains("preset"))
    cfg.preset = preset_from_name(as_string("preset", file_values["preset"]));
  apply_preset(cfg);

  for (const auto& [key, value] : file_values.items())
    if (key != "preset") apply_key(cfg, key, value);
  for (const auto& [key, value] : cli_overrides)
    if (key != "preset") apply_key(cfg, key, parse_override_value(key, value));

  validate(cfg);
  return cfg;
}

void write_resolved_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(cfg).dump(2) << "\n";
}

namespace {

// Seed derivations, fixed so that every artifact of a run is reproducible
// from the single configured seed.
constexpr std::uint64_t kSplitSeedOffset = 1;
constexpr std::uint64_t kInitSeedOffset = 2;
constexpr std::uint64_t kBatchSeedOffset = 3;

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

GaussianMixture mixture_from_config(const RunConfig& cfg) {
  if (cfg.target == "gaussian") {
    Eigen::VectorXd mean;
    if (!cfg.gaussian_mean.empty())
      mean = to_eigen(cfg.gaussian_mean);
    else if (cfg.preset == Preset::fig5_gaussian_ksd || cfg.preset == Preset::fig6_weight_dev)
      mean = Eigen::VectorXd::Constant(cfg.dim, 2.0);
    else
      mean = Eigen::VectorXd::Zero(cfg.dim);
    Eigen::VectorXd var = cfg.gaussian_variance.empty() ? Eigen::VectorXd::Ones(cfg.dim)
                                                        : to_eigen(cfg.gaussian_variance);
    if (mean.size() != cfg.dim || var.size() != cfg.dim)
      throw ConfigError("gaussian_mean", "gaussian mean/variance must have length dim");
    return single_gaussian(mean, var);
  }
  if (cfg.mixture_weights.empty())
    throw ConfigError("mixture_weights", "mixture target requires mixture_weights");
  if (cfg.mixture_means.size() != cfg.mixture_weights.size() ||
      cfg.mixture_variances.size() != cfg.mixture_weights.size())
    throw ConfigError("mixture_means", "mixture arrays must have equal length");
  GaussianMixture mix;
  for (std::size_t c = 0; c < cfg.mixture_weights.size(); ++c) {
    Eigen::VectorXd mean = to_eigen(cfg.mixture_means[c]);
    Eigen::VectorXd var = to_eigen(cfg.mixture_variances[c]);
    if (mean.size() != cfg.dim || var.size() != cfg.dim)
      throw ConfigError("mixture_means", "mixture component size must equal dim");
    mix.components.push_back({cfg.mixture_weights[c], mean, var});
  }
  mix.validate();
  return mix;
}

Eigen::MatrixXd init_particles(const RunConfig& cfg) {
  Rng rng(cfg.seed + kInitSeedOffset);
  Eigen::MatrixXd positions = cfg.init_sigma * rng.normal_matrix(cfg.particles, cfg.dim);
  Eigen::VectorXd mean = cfg.init_mean.empty() ? Eigen::VectorXd::Zero(cfg.dim)
                                               : to_eigen(cfg.init_mean);
  if (mean.size() != cfg.dim) throw ConfigError("init_mean", "init_mean must have length dim");
  positions.rowwise() += mean.transpose();
  return positions;
}

BetaConfig beta_config_from(const RunConfig& cfg) {
  BetaConfig bc;
  bc.beta = cfg.beta;
  bc.gamma = cfg.gamma;
  bc.tau = cfg.tau;
  bc.refresh_period = cfg.refresh_period;
  bc.mirror_iters = cfg.mirror_iters;
  bc.mirror_step = cfg.mirror_step;
  bc.total_iters = cfg.iters;
  bc.seed = cfg.seed;
  if (cfg.stein_bandwidth)
    bc.stein_kernel = spec_from_string("stein_bandwidth", *cfg.stein_bandwidth);
  if (cfg.ksd_bandwidth)
    bc.diagnostic_kernel = spec_from_string("ksd_bandwidth", *cfg.ksd_bandwidth);
  return bc;
}

struct LogregSetup {
  TargetModel posterior;
  Eigen::MatrixXd holdout_rows;
  Eigen::VectorXd holdout_labels;
};

LogregSetup build_logreg(const RunConfig& cfg) {
  Dataset data;
  if (!cfg.data_csv.empty()) {
    LoadOptions opts;
    opts.label_col = cfg.label_col;
    opts.standardize = cfg.standardize;
    data = load_dataset(cfg.data_csv, opts);
  } else {
    data = synthesize_logistic_data(cfg.data_dim, cfg.data_size, cfg.seed).first;
  }
  const int n = data.size();
  int holdout = static_cast<int>(std::floor(cfg.holdout_fraction * n));
  Rng rng(cfg.seed + kSplitSeedOffset);
  std::vector<int> selected = rng.sample_without_replacement(n, holdout);
  std::vector<bool> is_holdout(n, false);
  for (int i : selected) is_holdout[i] = true;

  LogregSetup setup;
  LogisticPosterior post;
  post.design.resize(n - holdout, data.feature_count());
  post.labels.resize(n - holdout);
  setup.holdout_rows.resize(holdout, data.feature_count());
  setup.holdout_labels.resize(holdout);
  int train_at = 0, test_at = 0;
  for (int i = 0; i < n; ++i) {
    if (is_holdout[i]) {
      setup.holdout_rows.row(test_at) = data.rows.row(i);
      setup.holdout_labels(test_at++) = data.labels(i);
    } else {
      post.design.row(train_at) = data.rows.row(i);
      post.labels(train_at++) = data.labels(i);
    }
  }
  post.prior_precision = cfg.prior_precision;
  if (cfg.batch && *cfg.batch > 0 && *cfg.batch < post.design.rows()) post.minibatch = *cfg.batch;
  setup.posterior = make_logistic_target(std::move(post), cfg.seed + kBatchSeedOffset);
  return setup;
}

double holdout_accuracy(const Eigen::MatrixXd& particles, const Eigen::MatrixXd& rows,
                        const Eigen::VectorXd& labels) {
  if (rows.rows() == 0) return std::numeric_limits<double>::quiet_NaN();
  int correct = 0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double prob = 0.0;
    for (Eigen::Index p = 0; p < particles.rows(); ++p) {
      double margin = rows.row(i).dot(particles.row(p));
      prob += 1.0 / (1.0 + std::exp(-margin));
    }
    prob /= static_cast<double>(particles.rows());
    double predicted = prob >= 0.5 ? 1.0 : -1.0;
    if (predicted == labels(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(rows.rows());
}

int run_sample_job(RunConfig cfg) {
  TargetModel target;
  LogregSetup logreg;
  const bool is_logreg = cfg.target == "logreg";
  if (is_logreg) {
    logreg = build_logreg(cfg);
    target = logreg.posterior;
    cfg.dim = target.dim;
  } else {
    target = make_mixture_target(mixture_from_config(cfg));
  }

  write_resolved_config(cfg, cfg.out_dir + "/config.resolved.json");

  ParticleSet init{init_particles(cfg), 0};
  BetaConfig bc = beta_config_from(cfg);
  KernelSpec spec = spec_from_string("bandwidth", cfg.bandwidth);

  std::vector<double> accuracy;
  IterationObserver observer;
  if (is_logreg) {
    accuracy.push_back(holdout_accuracy(init.positions, logreg.holdout_rows, logreg.holdout_labels));
    observer = [&](int iter, const Eigen::MatrixXd& positions) {
      if (iter % cfg.record_every == 0 && iter < cfg.iters)
        accuracy.push_back(holdout_accuracy(positions, logreg.holdout_rows, logreg.holdout_labels));
    };
  }

  RunResult result;
  try {
    result = run_beta_svgd(init, bc, target, spec, cfg.record_every, observer);
  } catch (const DivergenceError& e) {
    std::cerr << "run aborted: " << e.what() << "\n";
    return 2;
  }
  if (is_logreg)
    accuracy.push_back(
        holdout_accuracy(result.finals.positions, logreg.holdout_rows, logreg.holdout_labels));

  write_trajectory_csv(cfg.out_dir + "/trajectory.csv", result.rows, cfg.dim,
                       is_logreg ? &accuracy : nullptr);
  write_particles_csv(cfg.out_dir + "/particles.csv", result.finals.positions);
  return 0;
}

int run_flow_job(const RunConfig& cfg) {
  if (cfg.dim != 1) throw ConfigError("dim", "the grid flow is one-dimensional");
  if (cfg.target == "logreg") throw ConfigError("target", "the grid flow needs a closed-form 1D target");
  GaussianMixture mix = mixture_from_config(cfg);
  TargetModel target = make_mixture_target(mix);

  double mean_lo = cfg.rho0_mean, mean_hi = cfg.rho0_mean;
  double sigma_max = cfg.rho0_sigma;
  for (const auto& comp : mix.components) {
    mean_lo = std::min(mean_lo, comp.mean(0));
    mean_hi = std::max(mean_hi, comp.mean(0));
    sigma_max = std::max(sigma_max, std::sqrt(comp.variance(0)));
  }
  double lo = cfg.domain_lo.value_or(mean_lo - 8.0 * sigma_max);
  double hi = cfg.domain_hi.value_or(mean_hi + 8.0 * sigma_max);

  write_resolved_config(cfg, cfg.out_dir + "/config.resolved.json");

  GridDensity rho0 = grid_gaussian(lo, hi, cfg.grid_cells, cfg.rho0_mean, cfg.rho0_sigma);
  KernelSpec spec = spec_from_string("bandwidth", cfg.bandwidth);
  if (!spec.resolved()) spec = KernelSpec::rbf(1.0);  // dimension rule, d = 1

  FlowReport report;
  try {
    report = run_flow(rho0, target, spec, cfg.beta, cfg.horizon, cfg.dt0);
  } catch (const std::runtime_error& e) {
    std::cerr << "flow aborted: " << e.what() << "\n";
    return 2;
  }
  write_flow_csv(cfg.out_dir + "/flow.csv", report);
  if (report.max_mass_error > 1e-8 || report.min_density < 0.0) {
    std::cerr << "flow invariants violated: mass error " << report.max_mass_error
              << ", min density " << report.min_density << "\n";
    return 3;
  }
  return 0;
}

int run_lemma_job(const RunConfig& cfg) {
  write_resolved_config(cfg, cfg.out_dir + "/config.resolved.json");
  LemmaBatteryReport report = run_logdet_battery(cfg.lemma_trials, cfg.lemma_max_order, cfg.seed);
  std::string csv;
  csv += "metric,value\n";
  csv += "trials," + std::to_string(report.trials) + "\n";
  csv += "lower_failures," + std::to_string(report.lower_failures) + "\n";
  csv += "upper_violations," + std::to_string(report.upper_violations) + "\n";
  csv += "worst_lower_slack," + format_double(report.worst_lower_slack) + "\n";
  csv += "worst_upper_violation," + format_double(report.worst_upper_violation) + "\n";
  std::cout << csv;
  std::ofstream out(cfg.out_dir + "/lemma.csv");
  if (!out) throw std::runtime_error("cannot write lemma.csv");
  out << csv;
  return report.lower_failures == 0 ? 0 : 1;
}

}  // namespace

int run_preset(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  switch (cfg.preset) {
    case Preset::check_lemma:
      return run_lemma_job(cfg);
    case Preset::flow_thm31:
      return run_flow_job(cfg);
    default:
      return run_sample_job(cfg);
  }
}

}  // namespace svgd
