#pragma once

#include <Eigen/Dense>

#include "svgd/kernel.hpp"
#include "svgd/target.hpp"

namespace svgd {

// N x N matrix of Stein-kernel evaluations k_pi(x_i, x_j), optionally divided
// by `scale` for conditioning. raw entry = entries * scale.
struct SteinMatrix {
  Eigen::MatrixXd entries;
  double scale = 1.0;
  int size() const { return static_cast<int>(entries.rows()); }
};

// Nonnegative weights summing to 1.
struct SimplexWeights {
  Eigen::VectorXd values;
  static SimplexWeights uniform(int n) {
    return {Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n))};
  }
  int size() const { return static_cast<int>(values.size()); }
};

// k_pi(x,y) = k <gradV(x), gradV(y)> - <gradV(x), grad_y k> - <gradV(y), grad_x k>
//           + tr(grad_x grad_y k); symmetric in (x,y), depends on the target
//           only through its score.
double stein_kernel_entry(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const TargetModel& target, const KernelSpec& spec);

// Scores are evaluated once per particle and reused across all pairs.
SteinMatrix build_stein_matrix(const Eigen::MatrixXd& particles, const TargetModel& target,
                               const KernelSpec& spec, bool auto_scale);

// Same, from a precomputed score matrix (row i = score(x_i)).
SteinMatrix build_stein_matrix_from_scores(const Eigen::MatrixXd& particles,
                                           const Eigen::MatrixXd& scores, const KernelSpec& spec,
                                           bool auto_scale);

// One multiplicative-weights update with step r, exponent shifted by its
// maximum before exponentiation. Preserves the simplex and strict positivity.
SimplexWeights mirror_descent_step(const SimplexWeights& w, const SteinMatrix& K, double r);

double simplex_objective(const SimplexWeights& w, const SteinMatrix& K);  // (1/2) w^T K w

struct SteinWeightsResult {
  SimplexWeights weights;
  double objective;  // (1/2) w^T K w on the matrix the solver iterated on
  double scale;      // that matrix's conditioning divisor
};

// `iterations` mirror-descent updates on the auto-scaled Stein matrix,
// warm-started from `init`.
SteinWeightsResult solve_stein_weights(const Eigen::MatrixXd& particles, const TargetModel& target,
                                       const KernelSpec& spec, SimplexWeights init, int iterations,
                                       double step);

SteinWeightsResult solve_stein_weights_on(const SteinMatrix& K, SimplexWeights init, int iterations,
                                          double step);

// w^T K_pi w on unscaled entries; small negative values (within round-off of
// the top eigenvalue) clamp to 0, strongly negative values throw.
double ksd_estimate(const Eigen::MatrixXd& particles, const SimplexWeights& w,
                    const TargetModel& target, const KernelSpec& spec);

double ksd_from_matrix(const SteinMatrix& K, const SimplexWeights& w);

}  // namespace svgd
