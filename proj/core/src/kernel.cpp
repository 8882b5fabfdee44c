#include "svgd/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace svgd {

namespace {

double checked_bandwidth(const KernelSpec& spec) {
  if (!spec.resolved())
    throw std::invalid_argument("kernel spec not resolved: bandwidth rule requires a particle set");
  if (!(spec.bandwidth > 0.0))
    throw std::invalid_argument("kernel bandwidth must be positive");
  return spec.bandwidth;
}

void check_dims(const Vec& x, const Vec& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("kernel arguments have mismatched dimensions");
}

}  // namespace

KernelSpec resolve_bandwidth(const KernelSpec& spec, const Mat& particles) {
  switch (spec.rule) {
    case BandwidthRule::fixed:
      checked_bandwidth(spec);
      return spec;
    case BandwidthRule::dimension:
      return KernelSpec::rbf(static_cast<double>(particles.cols()));
    case BandwidthRule::median_heuristic: {
      const Eigen::Index n = particles.rows();
      if (n < 2) return KernelSpec::rbf(static_cast<double>(particles.cols()));
      std::vector<double> sq;
      sq.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
          sq.push_back((particles.row(i) - particles.row(j)).squaredNorm());
      std::size_t mid = sq.size() / 2;
      std::nth_element(sq.begin(), sq.begin() + mid, sq.end());
      double h = sq[mid];
      if (!(h > 0.0))
        throw std::invalid_argument("median-heuristic bandwidth degenerate: particles coincide");
      return KernelSpec::rbf(h);
    }
  }
  throw std::logic_error("unknown bandwidth rule");
}

double kernel_eval(const Vec& x, const Vec& y, const KernelSpec& spec) {
  check_dims(x, y);
  double h = checked_bandwidth(spec);
  return std::exp(-(x - y).squaredNorm() / h);
}

Vec kernel_grad_x(const Vec& x, const Vec& y, const KernelSpec& spec) {
  check_dims(x, y);
  double h = checked_bandwidth(spec);
  Vec diff = x - y;
  return (-2.0 / h * std::exp(-diff.squaredNorm() / h)) * diff;
}

double kernel_cross_trace(const Vec& x, const Vec& y, const KernelSpec& spec) {
  check_dims(x, y);
  double h = checked_bandwidth(spec);
  double sq = (x - y).squaredNorm();
  double d = static_cast<double>(x.size());
  return (2.0 * d / h - 4.0 * sq / (h * h)) * std::exp(-sq / h);
}

Mat kernel_matrix(const Mat& X, const Mat& Y, const KernelSpec& spec) {
  if (X.cols() != Y.cols())
    throw std::invalid_argument("kernel arguments have mismatched dimensions");
  double h = checked_bandwidth(spec);
  Mat K(X.rows(), Y.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < Y.rows(); ++j)
      K(i, j) = std::exp(-(X.row(i) - Y.row(j)).squaredNorm() / h);
  return K;
}

}  // namespace svgd
