// Log-determinant bound checks. The two fixed probes exercise the printed
// two-sided bound as stated; the upper direction fails on both, which is why
// the battery asserts only the lower direction and reports the upper one.

#include <doctest.h>

#include <Eigen/LU>
#include <cmath>

#include "svgd/numerics.hpp"
#include "svgd/rng.hpp"

TEST_CASE("frobenius norm closed forms") {
  CHECK(svgd::frobenius_norm(Eigen::MatrixXd::Zero(3, 3)) == 0.0);
  CHECK(svgd::frobenius_norm(Eigen::MatrixXd::Identity(4, 4)) == 2.0);
  Eigen::MatrixXd b(2, 2);
  b << 1, 2, 3, 4;
  CHECK(svgd::frobenius_norm(b) == doctest::Approx(std::sqrt(30.0)).epsilon(1e-15));
}

TEST_CASE("log|det| via LU matches Eigen on random matrices") {
  svgd::Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + rng.uniform_int(6);
    Eigen::MatrixXd b = rng.normal_matrix(n, n);
    double det = b.partialPivLu().determinant();
    if (std::abs(det) < 1e-10) continue;
    svgd::LogAbsDet result = svgd::log_abs_det_lu(b);
    CHECK(result.value == doctest::Approx(std::log(std::abs(det))).epsilon(1e-9));
    CHECK(result.sign == (det > 0 ? 1 : -1));
  }
  CHECK_THROWS_AS(svgd::log_abs_det_lu(Eigen::MatrixXd::Zero(65, 65)), std::invalid_argument);
}

TEST_CASE("adversarial probe: antisymmetric B") {
  Eigen::MatrixXd b(2, 2);
  b << 0, 1, -1, 0;
  svgd::LemmaCheck check = svgd::logdet_bound_check(b, 0.05);
  // det(I + eps B) = 1 + eps^2.
  CHECK(check.log_abs_det == doctest::Approx(std::log(1.0025)).epsilon(1e-12));
  CHECK(check.lower_bound == doctest::Approx(-0.025).epsilon(1e-12));
  CHECK(check.upper_bound == doctest::Approx(-0.01).epsilon(1e-12));
  CHECK(check.lower_ok);
  CHECK_FALSE(check.upper_ok);  // the printed upper direction fails here
}

TEST_CASE("adversarial probe: identity B") {
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(2, 2);
  svgd::LemmaCheck check = svgd::logdet_bound_check(b, 0.05);
  CHECK(check.log_abs_det == doctest::Approx(2.0 * std::log(1.05)).epsilon(1e-12));
  CHECK(check.lower_bound == doctest::Approx(0.075).epsilon(1e-12));
  CHECK(check.upper_bound == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(check.lower_ok);
  CHECK_FALSE(check.upper_ok);
}

TEST_CASE("residual shrinks like eps^2") {
  svgd::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + rng.uniform_int(4);
    Eigen::MatrixXd b = rng.normal_matrix(n, n);
    double fro = svgd::frobenius_norm(b);
    double eps = 1.0 / (20.0 * fro);
    double r1 = std::abs(svgd::logdet_bound_check(b, eps).log_abs_det - eps * b.trace());
    double r2 = std::abs(svgd::logdet_bound_check(b, eps / 2).log_abs_det - eps / 2 * b.trace());
    double ratio = r1 / r2;
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
  }
}

TEST_CASE("battery: lower bound holds on 1000 random trials, upper reported") {
  svgd::LemmaBatteryReport report = svgd::run_logdet_battery(1000, 6, 2024);
  CHECK(report.trials == 1000);
  CHECK(report.lower_failures == 0);
  CHECK(report.worst_lower_slack >= 0.0);
  MESSAGE("upper-bound violations (informational): ", report.upper_violations,
          ", worst upper slack: ", report.worst_upper_violation);
}

TEST_CASE("hypothesis range is enforced") {
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(3, 3);
  double fro = svgd::frobenius_norm(b);
  CHECK_THROWS_AS(svgd::logdet_bound_check(b, 1.0 / (5.0 * fro)), std::invalid_argument);
  CHECK_THROWS_AS(svgd::logdet_bound_check(b, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(svgd::logdet_bound_check(b, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(svgd::logdet_bound_check(Eigen::MatrixXd::Zero(2, 2), 0.01),
                  std::invalid_argument);
}

TEST_CASE("power iteration estimates the top eigenvalue") {
  Eigen::MatrixXd s(3, 3);
  s << 4, 0, 0, 0, -7, 0, 0, 0, 1;
  CHECK(svgd::power_iteration_max_eigen(s) == doctest::Approx(7.0).epsilon(1e-6));
}
