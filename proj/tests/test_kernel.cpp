// Kernel primitives against closed forms and finite-difference oracles.

#include <doctest.h>

#include <cmath>

#include "svgd/kernel.hpp"
#include "svgd/rng.hpp"

using svgd::KernelSpec;
using svgd::Vec;

namespace {

// Central finite difference of kernel_eval in the first argument.
Vec fd_grad_x(const Vec& x, const Vec& y, const KernelSpec& spec, double step = 1e-5) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp(i) += step;
    xm(i) -= step;
    g(i) = (svgd::kernel_eval(xp, y, spec) - svgd::kernel_eval(xm, y, spec)) / (2.0 * step);
  }
  return g;
}

// Nested central differences for sum_i d^2 k / dx_i dy_i.
double fd_cross_trace(const Vec& x, const Vec& y, const KernelSpec& spec, double step = 1e-4) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x, yp = y, ym = y;
    xp(i) += step;
    xm(i) -= step;
    yp(i) += step;
    ym(i) -= step;
    acc += (svgd::kernel_eval(xp, yp, spec) - svgd::kernel_eval(xp, ym, spec) -
            svgd::kernel_eval(xm, yp, spec) + svgd::kernel_eval(xm, ym, spec)) /
           (4.0 * step * step);
  }
  return acc;
}

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

}  // namespace

TEST_CASE("rbf evaluates the closed form") {
  CHECK(svgd::kernel_eval(vec1(3.7), vec1(3.7), KernelSpec::rbf(2.5)) == 1.0);
  Vec x4 = Vec::Constant(4, 1.25), y4 = Vec::Constant(4, 1.25);
  CHECK(svgd::kernel_eval(x4, y4, KernelSpec::rbf(7.0)) == 1.0);

  CHECK(svgd::kernel_eval(vec1(0.0), vec1(2.0), KernelSpec::rbf(1.0)) ==
        doctest::Approx(std::exp(-4.0)).epsilon(1e-14));

  Vec x(2), y(2);
  x << 0.0, 0.0;
  y << 1.0, 1.0;
  CHECK(svgd::kernel_eval(x, y, KernelSpec::rbf(2.0)) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("rbf gradient: closed form, coincident points, antisymmetry") {
  CHECK(svgd::kernel_grad_x(vec1(0.5), vec1(0.5), KernelSpec::rbf(1.0)).isZero(0.0));

  double g = svgd::kernel_grad_x(vec1(1.0), vec1(0.0), KernelSpec::rbf(1.0))(0);
  CHECK(g == doctest::Approx(-2.0 * std::exp(-1.0)).epsilon(1e-14));
  double fd = fd_grad_x(vec1(1.0), vec1(0.0), KernelSpec::rbf(1.0))(0);
  CHECK(std::abs(g - fd) < 1e-8);

  svgd::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Vec x = rng.normal_vector(3), y = rng.normal_vector(3);
    KernelSpec spec = KernelSpec::rbf(1.7);
    Vec sum = svgd::kernel_grad_x(x, y, spec) + svgd::kernel_grad_x(y, x, spec);
    CHECK(sum.isZero(0.0));
  }
}

TEST_CASE("rbf cross trace: closed form and root") {
  Vec z3 = Vec::Zero(3);
  CHECK(svgd::kernel_cross_trace(z3, z3, KernelSpec::rbf(3.0)) == doctest::Approx(2.0));

  double v = svgd::kernel_cross_trace(vec1(0.0), vec1(1.0), KernelSpec::rbf(1.0));
  CHECK(v == doctest::Approx(-2.0 * std::exp(-1.0)).epsilon(1e-13));

  // ||x-y||^2 = d h / 2 with h = d kills the trace.
  Vec x(2), y(2);
  x << 0.0, 0.0;
  y << std::sqrt(2.0), 0.0;
  CHECK(svgd::kernel_cross_trace(x, y, KernelSpec::rbf(2.0)) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("gradient and cross trace match finite differences on random inputs") {
  svgd::Rng rng(20240507);
  for (int trial = 0; trial < 100; ++trial) {
    int d = 1 + rng.uniform_int(10);
    double h = 0.5 + 4.5 * rng.uniform();
    KernelSpec spec = KernelSpec::rbf(h);
    Vec x = rng.normal_vector(d), y = rng.normal_vector(d);

    Vec g = svgd::kernel_grad_x(x, y, spec);
    Vec fd = fd_grad_x(x, y, spec);
    double rel = (g - fd).norm() / std::max(fd.norm(), 1e-12);
    CHECK(rel <= 1e-6);

    double ct = svgd::kernel_cross_trace(x, y, spec);
    double ct_fd = fd_cross_trace(x, y, spec);
    bool close = std::abs(ct - ct_fd) / std::max(std::abs(ct_fd), 1e-12) <= 1e-4 ||
                 std::abs(ct - ct_fd) <= 1e-10;
    CHECK(close);
  }
}

TEST_CASE("symmetry is exact and values stay in (0, 1]") {
  svgd::Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    Vec x = rng.normal_vector(4), y = rng.normal_vector(4);
    KernelSpec spec = KernelSpec::rbf(2.0);
    double a = svgd::kernel_eval(x, y, spec);
    double b = svgd::kernel_eval(y, x, spec);
    CHECK(a == b);
    CHECK(a > 0.0);
    CHECK(a <= 1.0);  // Assumption-style bound with B = 1
  }
}

TEST_CASE("bandwidth resolution") {
  Eigen::MatrixXd particles(3, 2);
  particles << 0.0, 0.0, 1.0, 0.0, 3.0, 0.0;

  KernelSpec dim = svgd::resolve_bandwidth(KernelSpec::rbf_dimension(), particles);
  CHECK(dim.bandwidth == 2.0);

  // Pairwise squared distances 1, 9, 4 -> median 4.
  KernelSpec med = svgd::resolve_bandwidth(KernelSpec::rbf_median(), particles);
  CHECK(med.bandwidth == 4.0);

  Eigen::MatrixXd coincident = Eigen::MatrixXd::Zero(3, 2);
  CHECK_THROWS_AS(svgd::resolve_bandwidth(KernelSpec::rbf_median(), coincident),
                  std::invalid_argument);
}

TEST_CASE("errors: dimension mismatch, bad bandwidth, unresolved spec") {
  Vec x(2), y(3);
  x.setZero();
  y.setZero();
  CHECK_THROWS_AS(svgd::kernel_eval(x, y, KernelSpec::rbf(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(svgd::kernel_grad_x(x, y, KernelSpec::rbf(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(svgd::kernel_eval(x, x, KernelSpec::rbf(-1.0)), std::invalid_argument);
  CHECK_THROWS_AS(svgd::kernel_eval(x, x, KernelSpec::rbf(0.0)), std::invalid_argument);
  CHECK_THROWS_AS(svgd::kernel_eval(x, x, KernelSpec::rbf_median()), std::invalid_argument);
}
