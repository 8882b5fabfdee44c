#pragma once

#include <Eigen/Dense>

namespace svgd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class KernelFamily { rbf };

enum class BandwidthRule { fixed, dimension, median_heuristic };

// RBF kernel k(x,y) = exp(-||x-y||^2 / h). The bandwidth h is either given
// directly or resolved against a particle set (h = d, or h = median of the
// pairwise squared distances).
struct KernelSpec {
  KernelFamily family = KernelFamily::rbf;
  BandwidthRule rule = BandwidthRule::fixed;
  double bandwidth = 1.0;

  static KernelSpec rbf(double h) {
    return KernelSpec{KernelFamily::rbf, BandwidthRule::fixed, h};
  }
  static KernelSpec rbf_dimension() {
    return KernelSpec{KernelFamily::rbf, BandwidthRule::dimension, 0.0};
  }
  static KernelSpec rbf_median() {
    return KernelSpec{KernelFamily::rbf, BandwidthRule::median_heuristic, 0.0};
  }
  bool resolved() const { return rule == BandwidthRule::fixed; }
};

// Resolves dimension / median-heuristic rules into a fixed bandwidth.
// Throws std::invalid_argument if the result would not be positive.
KernelSpec resolve_bandwidth(const KernelSpec& spec, const Mat& particles);

double kernel_eval(const Vec& x, const Vec& y, const KernelSpec& spec);

// Gradient with respect to the first argument: -(2/h) (x-y) k(x,y).
Vec kernel_grad_x(const Vec& x, const Vec& y, const KernelSpec& spec);

// tr(d^2 k / dx dy) = (2d/h - 4||x-y||^2/h^2) k(x,y).
double kernel_cross_trace(const Vec& x, const Vec& y, const KernelSpec& spec);

// Pairwise k(X_i, Y_j) for row-per-point matrices.
Mat kernel_matrix(const Mat& X, const Mat& Y, const KernelSpec& spec);

}  // namespace svgd
