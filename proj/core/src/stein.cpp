#include "svgd/stein.hpp"

#include <cmath>
#include <stdexcept>

#include "svgd/numerics.hpp"

namespace svgd {

namespace {

// Four-term Stein kernel from potential gradients gx = gradV(x), gy = gradV(y).
double entry_from_gradients(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& gx, const Eigen::VectorXd& gy, double h) {
  Eigen::VectorXd diff = x - y;
  double sq = diff.squaredNorm();
  double k = std::exp(-sq / h);
  double c = 2.0 / h;
  double d = static_cast<double>(x.size());
  // grad_x k = -c diff k, grad_y k = +c diff k. The middle terms are grouped
  // into one dot product so the entry is exactly symmetric under (x,y) swap.
  return k * (gx.dot(gy) + c * (gy - gx).dot(diff) + (c * d - c * c * sq));
}

}  // namespace

double stein_kernel_entry(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const TargetModel& target, const KernelSpec& spec) {
  if (x.size() != y.size())
    throw std::invalid_argument("stein_kernel_entry: dimension mismatch");
  KernelSpec resolved = spec;
  if (spec.rule == BandwidthRule::dimension)
    resolved = KernelSpec::rbf(static_cast<double>(x.size()));
  if (!resolved.resolved() || !(resolved.bandwidth > 0.0))
    throw std::invalid_argument("stein_kernel_entry: kernel spec not resolved");
  Eigen::VectorXd gx = -target.score(x);
  Eigen::VectorXd gy = -target.score(y);
  return entry_from_gradients(x, y, gx, gy, resolved.bandwidth);
}

SteinMatrix build_stein_matrix_from_scores(const Eigen::MatrixXd& particles,
                                           const Eigen::MatrixXd& scores, const KernelSpec& spec,
                                           bool auto_scale) {
  if (particles.rows() != scores.rows() || particles.cols() != scores.cols())
    throw std::invalid_argument("build_stein_matrix: scores shape mismatch");
  const Eigen::Index n = particles.rows();
  const double h = resolve_bandwidth(spec, particles).bandwidth;
  const double c = 2.0 / h;
  const double d = static_cast<double>(particles.cols());

  // All pair terms come from a handful of Gram blocks; the scores enter only
  // through these products, so one score evaluation per particle suffices.
  Eigen::MatrixXd score_gram = scores * scores.transpose();
  Eigen::MatrixXd cross = scores * particles.transpose();  // cross(i,j) = <s_i, x_j>
  Eigen::VectorXd q = cross.diagonal();
  Eigen::MatrixXd gram = particles * particles.transpose();
  Eigen::VectorXd xsq = gram.diagonal();

  SteinMatrix K;
  K.entries.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      double sq = std::max(0.0, xsq(i) + xsq(j) - 2.0 * gram(i, j));
      double kernel = std::exp(-sq / h);
      double v = kernel * (score_gram(i, j) + c * (q(i) + q(j) - cross(i, j) - cross(j, i)) +
                           (c * d - c * c * sq));
      K.entries(i, j) = v;
      K.entries(j, i) = v;
    }
  }
  K.scale = 1.0;
  if (auto_scale) {
    double peak = K.entries.array().abs().maxCoeff();
    if (peak > 1.0) {
      K.scale = peak;
      K.entries /= peak;
    }
  }
  return K;
}

SteinMatrix build_stein_matrix(const Eigen::MatrixXd& particles, const TargetModel& target,
                               const KernelSpec& spec, bool auto_scale) {
  return build_stein_matrix_from_scores(particles, score_matrix(target, particles), spec,
                                        auto_scale);
}

SimplexWeights mirror_descent_step(const SimplexWeights& w, const SteinMatrix& K, double r) {
  if (w.size() != K.size())
    throw std::invalid_argument("mirror_descent_step: weight/matrix size mismatch");
  if (!(r > 0.0)) throw std::invalid_argument("mirror_descent_step: step must be positive");
  if (!K.entries.allFinite())
    throw std::invalid_argument("mirror_descent_step: non-finite Stein matrix entries");
  Eigen::ArrayXd exponent = (-r * (K.entries * w.values)).array();
  exponent -= exponent.maxCoeff();
  Eigen::ArrayXd next = w.values.array() * exponent.exp();
  double total = next.sum();
  if (!(total > 0.0))
    throw std::runtime_error("mirror_descent_step: weights collapsed to zero mass");
  return {(next / total).matrix()};
}

double simplex_objective(const SimplexWeights& w, const SteinMatrix& K) {
  return 0.5 * w.values.dot(K.entries * w.values);
}

SteinWeightsResult solve_stein_weights_on(const SteinMatrix& K, SimplexWeights init, int iterations,
                                          double step) {
  if (init.size() != K.size())
    throw std::invalid_argument("solve_stein_weights: init size mismatch");
  SimplexWeights w = std::move(init);
  for (int s = 0; s < iterations; ++s) w = mirror_descent_step(w, K, step);
  return {w, simplex_objective(w, K), K.scale};
}

SteinWeightsResult solve_stein_weights(const Eigen::MatrixXd& particles, const TargetModel& target,
                                       const KernelSpec& spec, SimplexWeights init, int iterations,
                                       double step) {
  SteinMatrix K = build_stein_matrix(particles, target, spec, /*auto_scale=*/true);
  return solve_stein_weights_on(K, std::move(init), iterations, step);
}

double ksd_from_matrix(const SteinMatrix& K, const SimplexWeights& w) {
  if (w.size() != K.size()) throw std::invalid_argument("ksd: weight/matrix size mismatch");
  double q = w.values.dot(K.entries * w.values) * K.scale;
  if (q >= 0.0) return q;
  double lambda_max = power_iteration_max_eigen(K.entries) * K.scale;
  if (q >= -1e-8 * lambda_max) return 0.0;
  throw std::runtime_error("ksd_estimate: strongly negative quadratic form; Stein matrix invalid");
}

double ksd_estimate(const Eigen::MatrixXd& particles, const SimplexWeights& w,
                    const TargetModel& target, const KernelSpec& spec) {
  return ksd_from_matrix(build_stein_matrix(particles, target, spec, /*auto_scale=*/false), w);
}

}  // namespace svgd
