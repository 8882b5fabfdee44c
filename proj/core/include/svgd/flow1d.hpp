#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

#include "svgd/kernel.hpp"
#include "svgd/target.hpp"

namespace svgd {

// Cell-averaged density on a uniform 1D grid; values are nonnegative and
// sum(values) * dx == 1.
struct GridDensity {
  double lo = 0.0;
  double hi = 1.0;
  int m = 0;
  Eigen::ArrayXd values;

  double dx() const { return (hi - lo) / static_cast<double>(m); }
  double center(int i) const { return lo + (i + 0.5) * dx(); }
  Eigen::ArrayXd centers() const;
  double mass() const { return values.sum() * dx(); }
};

// Discretizes exp(log_pdf) at cell centers and renormalizes on the grid.
GridDensity make_grid_density(double lo, double hi, int m,
                              const std::function<double(double)>& log_pdf);
GridDensity grid_gaussian(double lo, double hi, int m, double mean, double sigma);
GridDensity grid_from_target(double lo, double hi, int m, const TargetModel& target);

// Density floor below which a cell counts as outside the support.
inline constexpr double kDensityFloor = 1e-300;

// Renyi divergence of order alpha between grid densities on matching grids.
// Cells where pi vanishes while rho does not yield +infinity for alpha >= 1
// and are excluded from the sum for alpha < 1.
double renyi_divergence_grid(const GridDensity& rho, const GridDensity& pi, double alpha);

// Circular-embedding FFT convolution with the RBF kernel column on a fixed
// grid: apply(u)_i = sum_j exp(-((i-j)dx)^2 / h) u_j.
class GridConvolver {
 public:
  GridConvolver(int m, double dx, double bandwidth);
  ~GridConvolver();
  GridConvolver(const GridConvolver&) = delete;
  GridConvolver& operator=(const GridConvolver&) = delete;

  Eigen::ArrayXd apply(const Eigen::ArrayXd& u);

 private:
  struct Impl;
  Impl* impl_;
};

// Velocity of the weighted kernelized flow at cell centers:
//   v(x) = -(pi/rho)^beta(x) * sum_j k(x, x_j) [dlog rho + V'](x_j) rho_j dx.
// dlog rho uses central differences of log values, one-sided at support
// edges; cells outside the support (or where pi vanishes) carry zero velocity.
Eigen::ArrayXd flow_velocity_grid(const GridDensity& rho, const TargetModel& target,
                                  const KernelSpec& spec, double beta);

// Double cell-sum quadrature of the kernelized squared score mismatch
// (the Stein Fisher information of rho relative to the target).
double stein_fisher_grid(const GridDensity& rho, const TargetModel& target,
                         const KernelSpec& spec);

struct CflError : std::runtime_error {
  double max_velocity;
  explicit CflError(double vmax)
      : std::runtime_error("CFL violation: dt * max|v| exceeds 0.9 dx"), max_velocity(vmax) {}
};

// Conservative first-order upwind step for d(rho)/dt + d(rho v)/dx = 0 with
// zero-flux boundaries. Requires dt * max|v| <= 0.9 dx.
GridDensity flow_step(const GridDensity& rho, const Eigen::ArrayXd& velocity, double dt);

struct FlowSample {
  double t;
  double renyi;              // D_{beta+1}(rho_t | pi)
  double stein_fisher;       // I(rho_t | pi)
  double identity_residual;  // |d/dt e^{beta D} + beta(beta+1) I| over the last interval
  double avg_stein_fisher;   // cumulative integral of I over [0, t], divided by the horizon T
  double bound;              // rate bound for the active beta (constant over the run)
};

struct FlowReport {
  std::vector<FlowSample> samples;
  double bound = 0.0;
  double horizon = 0.0;
  double beta = 0.0;
  double initial_divergence = 0.0;  // D_{beta+1}(rho_0 | pi)
  double max_mass_error = 0.0;
  double min_density = 0.0;
  long long steps = 0;
};

// Simulates the flow to time T, recording diagnostics every dt0 (which also
// caps the substep; substeps additionally keep dt * max|v| <= 0.45 dx, half
// the step-level CFL bound, which makes nonnegativity unconditional). The
// report tracks the worst mass error and the minimum density so callers can
// assert conservation and positivity. The recorded bound is
//   -1/(T beta (beta+1))            for beta in (-1, 0),
//   KL(rho_0 | pi)/T                for beta = 0,
//   e^{beta D_{beta+1}(rho_0|pi)} / (T beta (beta+1))  for beta > 0.
FlowReport run_flow(const GridDensity& rho0, const TargetModel& target, const KernelSpec& spec,
                    double beta, double T, double dt0);

}  // namespace svgd
