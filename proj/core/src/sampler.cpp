#include "svgd/sampler.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace svgd {

void BetaConfig::validate() const {
  if (!(beta > -1.0)) throw std::invalid_argument("beta must exceed -1");
  if (!(tau > 0.0) || tau > 1.0) throw std::invalid_argument("tau must lie in (0, 1]");
  if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
  if (refresh_period < 1) throw std::invalid_argument("refresh_period must be positive");
  if (mirror_iters < 0) throw std::invalid_argument("mirror_iters must be nonnegative");
  if (!(mirror_step > 0.0)) throw std::invalid_argument("mirror_step must be positive");
  if (total_iters < 0) throw std::invalid_argument("total_iters must be nonnegative");
}

Eigen::MatrixXd svgd_direction_from_scores(const Eigen::MatrixXd& particles,
                                           const Eigen::MatrixXd& scores, const KernelSpec& spec) {
  if (particles.rows() != scores.rows() || particles.cols() != scores.cols())
    throw std::invalid_argument("svgd_direction: scores shape mismatch");
  const double n = static_cast<double>(particles.rows());
  const double c = 2.0 / spec.bandwidth;
  Eigen::MatrixXd K = kernel_matrix(particles, particles, spec);
  // Row i of the repulsion term: c * sum_j k_ij (x_i - x_j).
  Eigen::MatrixXd repulsion = c * (K.rowwise().sum().asDiagonal() * particles - K * particles);
  return (K * scores + repulsion) / n;
}

Eigen::MatrixXd svgd_direction(const Eigen::MatrixXd& particles, const TargetModel& target,
                               const KernelSpec& spec) {
  KernelSpec resolved = resolve_bandwidth(spec, particles);
  return svgd_direction_from_scores(particles, score_matrix(target, particles), resolved);
}

namespace {

Eigen::MatrixXd apply_step(const Eigen::MatrixXd& positions, const Eigen::MatrixXd& direction,
                           const SimplexWeights& w, const BetaConfig& cfg) {
  if (cfg.beta == 0.0) return positions + cfg.gamma * direction;
  const double n = static_cast<double>(positions.rows());
  Eigen::VectorXd prefactor(positions.rows());
  for (Eigen::Index i = 0; i < positions.rows(); ++i)
    prefactor(i) = std::pow(std::max(n * w.values(i), cfg.tau), cfg.beta);
  return positions + cfg.gamma * (prefactor.asDiagonal() * direction);
}

}  // namespace

ParticleSet beta_svgd_step(const ParticleSet& particles, const SimplexWeights& w,
                           const BetaConfig& cfg, const TargetModel& target,
                           const KernelSpec& spec) {
  cfg.validate();
  if (cfg.beta != 0.0 && w.size() != particles.positions.rows())
    throw std::invalid_argument("beta_svgd_step: weight vector size mismatch");
  KernelSpec resolved = resolve_bandwidth(spec, particles.positions);
  Eigen::MatrixXd direction = svgd_direction(particles.positions, target, resolved);
  return {apply_step(particles.positions, direction, w, cfg), particles.generation + 1};
}

namespace {

struct Recorder {
  std::vector<TrajectoryRow>& rows;
  std::chrono::steady_clock::time_point start;

  void emit(int iter, double ksd, double weight_dev, const Eigen::MatrixXd& positions) {
    TrajectoryRow row;
    row.iter = iter;
    row.ksd = ksd;
    row.weight_dev = weight_dev;
    row.mean = positions.colwise().mean();
    row.second_moment = positions.array().square().colwise().mean();
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    rows.push_back(std::move(row));
  }
};

double weight_deviation(const SimplexWeights& w) {
  double uniform = 1.0 / static_cast<double>(w.size());
  return (w.values.array() - uniform).abs().sum();
}

SteinMatrix conditioned(const SteinMatrix& raw) {
  double peak = raw.entries.array().abs().maxCoeff();
  if (peak <= 1.0) return raw;
  return {raw.entries / peak, peak};
}

}  // namespace

RunResult run_beta_svgd(const ParticleSet& init, const BetaConfig& cfg, const TargetModel& target,
                        const KernelSpec& spec, int record_every,
                        const IterationObserver& observer) {
  cfg.validate();
  if (record_every < 1) throw std::invalid_argument("record_every must be positive");
  const Eigen::Index n_particles = init.positions.rows();
  if (n_particles < 1) throw std::invalid_argument("run_beta_svgd: empty particle set");

  KernelSpec svgd_spec = resolve_bandwidth(spec, init.positions);
  KernelSpec stein_spec = resolve_bandwidth(cfg.stein_kernel.value_or(spec), init.positions);
  KernelSpec diag_spec =
      resolve_bandwidth(cfg.diagnostic_kernel.value_or(stein_spec), init.positions);
  const bool diag_shares_matrix = diag_spec.bandwidth == stein_spec.bandwidth;

  RunResult result;
  result.finals = init;
  SimplexWeights w = SimplexWeights::uniform(static_cast<int>(n_particles));
  SimplexWeights uniform = w;
  Recorder recorder{result.rows, std::chrono::steady_clock::now()};

  Eigen::MatrixXd& positions = result.finals.positions;
  for (int iter = 0; iter < cfg.total_iters; ++iter) {
    Eigen::MatrixXd scores = score_matrix(target, positions);
    bool refresh_due = iter % cfg.refresh_period == 0;
    bool record_due = iter % record_every == 0;
    if (refresh_due || record_due) {
      SteinMatrix raw;
      if (refresh_due || diag_shares_matrix)
        raw = build_stein_matrix_from_scores(positions, scores, stein_spec, /*auto_scale=*/false);
      if (refresh_due)
        w = solve_stein_weights_on(conditioned(raw), w, cfg.mirror_iters, cfg.mirror_step).weights;
      if (record_due) {
        if (!diag_shares_matrix)
          raw = build_stein_matrix_from_scores(positions, scores, diag_spec, /*auto_scale=*/false);
        recorder.emit(iter, ksd_from_matrix(raw, uniform), weight_deviation(w), positions);
      }
    }
    Eigen::MatrixXd direction = svgd_direction_from_scores(positions, scores, svgd_spec);
    positions = apply_step(positions, direction, w, cfg);
    if (!positions.allFinite()) throw DivergenceError(iter + 1);
    if (observer) observer(iter + 1, positions);
  }

  Eigen::MatrixXd scores = score_matrix(target, positions);
  SteinMatrix raw =
      build_stein_matrix_from_scores(positions, scores, diag_spec, /*auto_scale=*/false);
  recorder.emit(cfg.total_iters, ksd_from_matrix(raw, uniform), weight_deviation(w), positions);
  result.finals.generation = init.generation + cfg.total_iters;
  result.final_weights = w;
  return result;
}

RunResult run_svgd(const ParticleSet& init, double gamma, int total_iters,
                   const TargetModel& target, const KernelSpec& spec, int record_every,
                   const IterationObserver& observer,
                   const std::optional<KernelSpec>& diagnostic_kernel) {
  if (record_every < 1) throw std::invalid_argument("record_every must be positive");
  if (total_iters < 0) throw std::invalid_argument("total_iters must be nonnegative");
  const Eigen::Index n_particles = init.positions.rows();
  if (n_particles < 1) throw std::invalid_argument("run_svgd: empty particle set");

  KernelSpec svgd_spec = resolve_bandwidth(spec, init.positions);
  KernelSpec diag_spec =
      resolve_bandwidth(diagnostic_kernel.value_or(svgd_spec), init.positions);
  RunResult result;
  result.finals = init;
  SimplexWeights uniform = SimplexWeights::uniform(static_cast<int>(n_particles));
  Recorder recorder{result.rows, std::chrono::steady_clock::now()};

  Eigen::MatrixXd& positions = result.finals.positions;
  for (int iter = 0; iter < total_iters; ++iter) {
    Eigen::MatrixXd scores = score_matrix(target, positions);
    if (iter % record_every == 0) {
      SteinMatrix raw =
          build_stein_matrix_from_scores(positions, scores, diag_spec, /*auto_scale=*/false);
      recorder.emit(iter, ksd_from_matrix(raw, uniform), 0.0, positions);
    }
    positions += gamma * svgd_direction_from_scores(positions, scores, svgd_spec);
    if (!positions.allFinite()) throw DivergenceError(iter + 1);
    if (observer) observer(iter + 1, positions);
  }

  Eigen::MatrixXd scores = score_matrix(target, positions);
  SteinMatrix raw =
      build_stein_matrix_from_scores(positions, scores, diag_spec, /*auto_scale=*/false);
  recorder.emit(total_iters, ksd_from_matrix(raw, uniform), 0.0, positions);
  result.finals.generation = init.generation + total_iters;
  result.final_weights = uniform;
  return result;
}

}  // namespace svgd
