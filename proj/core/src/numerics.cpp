#include "svgd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "svgd/rng.hpp"

namespace svgd {

double frobenius_norm(const Eigen::MatrixXd& B) {
  return std::sqrt(B.array().square().sum());
}

LogAbsDet log_abs_det_lu(Eigen::MatrixXd B) {
  const Eigen::Index n = B.rows();
  if (B.cols() != n) throw std::invalid_argument("log_abs_det_lu: matrix must be square");
  if (n > 64) throw std::invalid_argument("log_abs_det_lu: order > 64 not supported");
  int sign = 1;
  double log_abs = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index pivot = k;
    double best = std::abs(B(k, k));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      if (std::abs(B(i, k)) > best) {
        best = std::abs(B(i, k));
        pivot = i;
      }
    }
    if (best == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
    if (pivot != k) {
      B.row(pivot).swap(B.row(k));
      sign = -sign;
    }
    double d = B(k, k);
    if (d < 0.0) sign = -sign;
    log_abs += std::log(std::abs(d));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      double f = B(i, k) / d;
      B.row(i).tail(n - k - 1) -= f * B.row(k).tail(n - k - 1);
    }
  }
  return {log_abs, sign};
}

LemmaCheck logdet_bound_check(const Eigen::MatrixXd& B, double eps) {
  double fro = frobenius_norm(B);
  if (!(fro > 0.0)) throw std::invalid_argument("logdet_bound_check: ||B||_F must be positive");
  if (!(eps > 0.0) || eps > 1.0 / (6.0 * fro))
    throw std::invalid_argument("logdet_bound_check: eps outside (0, 1/(6||B||_F)]");

  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(B.rows(), B.cols()) + eps * B;
  LemmaCheck out{};
  out.log_abs_det = log_abs_det_lu(M).value;
  double tr = eps * B.trace();
  double fro2 = eps * eps * fro * fro;
  out.lower_bound = tr - 5.0 * fro2;
  out.upper_bound = tr - 2.0 * fro2;
  out.lower_slack = out.log_abs_det - out.lower_bound;
  out.upper_slack = out.upper_bound - out.log_abs_det;
  out.lower_ok = out.lower_slack >= 0.0;
  out.upper_ok = out.upper_slack >= 0.0;
  return out;
}

LemmaBatteryReport run_logdet_battery(int trials, int max_order, std::uint64_t seed) {
  Rng rng(seed);
  LemmaBatteryReport report;
  report.trials = trials;
  report.worst_lower_slack = std::numeric_limits<double>::infinity();
  report.worst_upper_violation = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    int order = 1 + rng.uniform_int(max_order);
    Eigen::MatrixXd B = rng.normal_matrix(order, order);
    double fro = frobenius_norm(B);
    if (!(fro > 0.0)) continue;
    double eps = rng.uniform() / (6.0 * fro);
    if (eps <= 0.0) eps = 1.0 / (12.0 * fro);
    LemmaCheck check = logdet_bound_check(B, eps);
    if (!check.lower_ok) ++report.lower_failures;
    if (!check.upper_ok) ++report.upper_violations;
    report.worst_lower_slack = std::min(report.worst_lower_slack, check.lower_slack);
    report.worst_upper_violation = std::min(report.worst_upper_violation, check.upper_slack);
  }
  return report;
}

double power_iteration_max_eigen(const Eigen::MatrixXd& S, int iterations) {
  const Eigen::Index n = S.rows();
  if (n == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  double lambda = 0.0;
  for (int k = 0; k < iterations; ++k) {
    Eigen::VectorXd w = S * v;
    double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    lambda = v.dot(S * v);
  }
  return std::abs(lambda);
}

}  // namespace svgd
