#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "svgd/kernel.hpp"
#include "svgd/stein.hpp"
#include "svgd/target.hpp"

namespace svgd {

struct ParticleSet {
  Eigen::MatrixXd positions;  // N x d
  int generation = 0;
};

// Run configuration for the weighted sampler. beta = 0 reduces to plain SVGD
// exactly: the weight prefactor is skipped, not multiplied by 1.
struct BetaConfig {
  double beta = -0.5;
  double gamma = 0.1;          // step size applied to the 1/N-averaged direction
  double tau = 0.01;           // lower clamp gap in max(N w_i, tau)
  int refresh_period = 20;     // g: weights re-solved when iter % g == 0
  int mirror_iters = 40;       // m
  double mirror_step = 0.5;    // r (on the auto-conditioned matrix)
  int total_iters = 100;       // n
  std::uint64_t seed = 0;
  std::optional<KernelSpec> stein_kernel;       // defaults to the SVGD kernel
  std::optional<KernelSpec> diagnostic_kernel;  // for the recorded discrepancy; defaults to stein_kernel

  void validate() const;
};

struct TrajectoryRow {
  int iter;
  double ksd;               // uniform-weight Stein discrepancy estimate w^T K_pi w
  double weight_dev;        // f(w) = sum_i |w_i - 1/N|
  Eigen::VectorXd mean;     // empirical first moment per coordinate
  Eigen::VectorXd second_moment;
  double wall_ms;
};

struct RunResult {
  std::vector<TrajectoryRow> rows;
  ParticleSet finals;
  SimplexWeights final_weights;
};

// Thrown when a particle coordinate leaves the finite range; carries the
// iteration at which it happened (step size too large).
struct DivergenceError : std::runtime_error {
  int iteration;
  explicit DivergenceError(int iter)
      : std::runtime_error("particles diverged at iteration " + std::to_string(iter)),
        iteration(iter) {}
};

// Row i = (1/N) sum_j [score(x_j) k(x_i,x_j) + grad_{x_j} k(x_i,x_j)].
Eigen::MatrixXd svgd_direction(const Eigen::MatrixXd& particles, const TargetModel& target,
                               const KernelSpec& spec);
Eigen::MatrixXd svgd_direction_from_scores(const Eigen::MatrixXd& particles,
                                           const Eigen::MatrixXd& scores, const KernelSpec& spec);

// x_i += gamma * max(N w_i, tau)^beta * direction_i.
ParticleSet beta_svgd_step(const ParticleSet& particles, const SimplexWeights& w,
                           const BetaConfig& cfg, const TargetModel& target,
                           const KernelSpec& spec);

using IterationObserver = std::function<void(int iter, const Eigen::MatrixXd& positions)>;

// Full weighted-SVGD loop: weights refreshed by warm-started mirror descent
// every refresh_period iterations, one step per iteration, diagnostics every
// record_every iterations (plus iteration 0 and the final one).
RunResult run_beta_svgd(const ParticleSet& init, const BetaConfig& cfg, const TargetModel& target,
                        const KernelSpec& spec, int record_every,
                        const IterationObserver& observer = {});

// Weight-free SVGD reference loop; the update path never touches the Stein
// matrix (diagnostics still report the uniform-weight discrepancy estimate).
RunResult run_svgd(const ParticleSet& init, double gamma, int total_iters,
                   const TargetModel& target, const KernelSpec& spec, int record_every,
                   const IterationObserver& observer = {},
                   const std::optional<KernelSpec>& diagnostic_kernel = {});

}  // namespace svgd
