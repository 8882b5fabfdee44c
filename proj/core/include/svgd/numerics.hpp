#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace svgd {

double frobenius_norm(const Eigen::MatrixXd& B);

struct LogAbsDet {
  double value;  // log|det|
  int sign;      // sign of det: -1, 0, +1 (value is -inf when 0)
};

// LU factorization with partial pivoting and sign tracking; orders <= 64.
LogAbsDet log_abs_det_lu(Eigen::MatrixXd B);

// Checks eps*tr(B) - 5 eps^2 ||B||_F^2 <= log|det(I + eps B)| <= eps*tr(B) - 2 eps^2 ||B||_F^2.
// Requires 0 < eps <= 1/(6||B||_F). The lower direction is the load-bearing
// one; the upper direction is evaluated but known to fail on simple probes,
// so callers report it instead of asserting it.
struct LemmaCheck {
  double log_abs_det;
  double lower_bound;
  double upper_bound;
  double lower_slack;  // log|det| - lower_bound, >= 0 when the lower bound holds
  double upper_slack;  // upper_bound - log|det|, >= 0 when the upper bound holds
  bool lower_ok;
  bool upper_ok;
};

LemmaCheck logdet_bound_check(const Eigen::MatrixXd& B, double eps);

struct LemmaBatteryReport {
  int trials = 0;
  int lower_failures = 0;
  int upper_violations = 0;
  double worst_lower_slack = 0.0;      // most negative = worst; >= 0 means all held
  double worst_upper_violation = 0.0;  // most negative upper_slack observed
};

// Random-matrix battery: i.i.d. standard normal entries, order in [1, max_order],
// eps uniform in (0, 1/(6||B||_F)].
LemmaBatteryReport run_logdet_battery(int trials, int max_order, std::uint64_t seed);

// Largest-magnitude eigenvalue estimate of a symmetric matrix.
double power_iteration_max_eigen(const Eigen::MatrixXd& S, int iterations = 100);

}  // namespace svgd
