#include "svgd/flow1d.hpp"

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace svgd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_grid(const GridDensity& g) {
  if (g.m < 2) throw std::invalid_argument("grid must have at least 2 cells");
  if (!(g.hi > g.lo)) throw std::invalid_argument("grid bounds must satisfy lo < hi");
  if (g.values.size() != g.m) throw std::invalid_argument("grid value count mismatch");
}

void check_same_grid(const GridDensity& a, const GridDensity& b) {
  if (a.m != b.m || a.lo != b.lo || a.hi != b.hi)
    throw std::invalid_argument("grid densities live on different grids");
}

// The flow is one-dimensional, so the dimension rule means h = 1; the median
// rule has no particle set to resolve against here.
KernelSpec resolve_flow_kernel(const KernelSpec& spec) {
  if (spec.resolved()) return spec;
  if (spec.rule == BandwidthRule::dimension) return KernelSpec::rbf(1.0);
  throw std::invalid_argument("median-heuristic bandwidth is not defined for the grid flow");
}

}  // namespace

Eigen::ArrayXd GridDensity::centers() const {
  Eigen::ArrayXd x(m);
  for (int i = 0; i < m; ++i) x(i) = center(i);
  return x;
}

GridDensity make_grid_density(double lo, double hi, int m,
                              const std::function<double(double)>& log_pdf) {
  GridDensity g{lo, hi, m, Eigen::ArrayXd(m)};
  check_grid(g);
  Eigen::ArrayXd logs(m);
  for (int i = 0; i < m; ++i) {
    logs(i) = log_pdf(g.center(i));
    if (std::isnan(logs(i)) || logs(i) == kInf)
      throw std::invalid_argument("non-finite log-density on the grid");
  }
  double mx = logs.maxCoeff();
  if (!std::isfinite(mx)) throw std::invalid_argument("log-density vanishes on the whole grid");
  g.values = (logs - mx).exp();
  g.values /= g.values.sum() * g.dx();
  return g;
}

GridDensity grid_gaussian(double lo, double hi, int m, double mean, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("grid_gaussian: sigma must be positive");
  return make_grid_density(lo, hi, m, [mean, sigma](double x) {
    double z = (x - mean) / sigma;
    return -0.5 * z * z;
  });
}

GridDensity grid_from_target(double lo, double hi, int m, const TargetModel& target) {
  if (target.dim != 1) throw std::invalid_argument("grid_from_target: target must be 1D");
  return make_grid_density(lo, hi, m, [&target](double x) {
    Eigen::VectorXd p(1);
    p(0) = x;
    return target.log_density_unnorm(p);
  });
}

double renyi_divergence_grid(const GridDensity& rho, const GridDensity& pi, double alpha) {
  check_grid(rho);
  check_same_grid(rho, pi);
  if (!(alpha > 0.0)) throw std::invalid_argument("renyi divergence requires alpha > 0");
  const double dx = rho.dx();
  double acc = 0.0;
  for (int i = 0; i < rho.m; ++i) {
    double r = rho.values(i);
    if (r <= kDensityFloor) continue;
    double p = pi.values(i);
    if (p <= kDensityFloor) {
      if (alpha >= 1.0) return kInf;  // absolute-continuity failure
      continue;                       // excluded from the sum for alpha < 1
    }
    double log_ratio = std::log(r) - std::log(p);
    if (alpha == 1.0)
      acc += log_ratio * r * dx;
    else
      acc += std::exp((alpha - 1.0) * log_ratio) * r * dx;
  }
  if (alpha == 1.0) return acc;
  return std::log(acc) / (alpha - 1.0);
}

// ---------------------------------------------------------------------------
// FFT convolution with the kernel column (circulant embedding of the
// symmetric Toeplitz matrix k(|i-j| dx)).

struct GridConvolver::Impl {
  int m = 0;
  int padded = 0;
  double* real = nullptr;
  fftw_complex* freq = nullptr;
  fftw_complex* kernel_freq = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

GridConvolver::GridConvolver(int m, double dx, double bandwidth) : impl_(new Impl) {
  if (m < 1) throw std::invalid_argument("GridConvolver: m must be positive");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("GridConvolver: bandwidth must be positive");
  impl_->m = m;
  int padded = 1;
  while (padded < 2 * m) padded <<= 1;
  impl_->padded = padded;
  const int bins = padded / 2 + 1;
  impl_->real = fftw_alloc_real(padded);
  impl_->freq = fftw_alloc_complex(bins);
  impl_->kernel_freq = fftw_alloc_complex(bins);
  impl_->forward = fftw_plan_dft_r2c_1d(padded, impl_->real, impl_->freq, FFTW_ESTIMATE);
  impl_->inverse = fftw_plan_dft_c2r_1d(padded, impl_->freq, impl_->real, FFTW_ESTIMATE);

  for (int i = 0; i < padded; ++i) impl_->real[i] = 0.0;
  for (int j = 0; j < m; ++j) {
    double r = j * dx;
    double value = std::exp(-r * r / bandwidth);
    impl_->real[j] = value;
    if (j > 0) impl_->real[padded - j] = value;
  }
  fftw_execute(impl_->forward);
  for (int b = 0; b < bins; ++b) {
    impl_->kernel_freq[b][0] = impl_->freq[b][0];
    impl_->kernel_freq[b][1] = impl_->freq[b][1];
  }
}

GridConvolver::~GridConvolver() {
  fftw_destroy_plan(impl_->forward);
  fftw_destroy_plan(impl_->inverse);
  fftw_free(impl_->real);
  fftw_free(impl_->freq);
  fftw_free(impl_->kernel_freq);
  delete impl_;
}

Eigen::ArrayXd GridConvolver::apply(const Eigen::ArrayXd& u) {
  if (u.size() != impl_->m) throw std::invalid_argument("GridConvolver: input size mismatch");
  const int padded = impl_->padded;
  for (int i = 0; i < impl_->m; ++i) impl_->real[i] = u(i);
  for (int i = impl_->m; i < padded; ++i) impl_->real[i] = 0.0;
  fftw_execute(impl_->forward);
  const int bins = padded / 2 + 1;
  for (int b = 0; b < bins; ++b) {
    double re = impl_->freq[b][0] * impl_->kernel_freq[b][0] -
                impl_->freq[b][1] * impl_->kernel_freq[b][1];
    double im = impl_->freq[b][0] * impl_->kernel_freq[b][1] +
                impl_->freq[b][1] * impl_->kernel_freq[b][0];
    impl_->freq[b][0] = re;
    impl_->freq[b][1] = im;
  }
  fftw_execute(impl_->inverse);
  Eigen::ArrayXd out(impl_->m);
  const double norm = 1.0 / static_cast<double>(padded);
  for (int i = 0; i < impl_->m; ++i) out(i) = impl_->real[i] * norm;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Shared per-grid state for velocity / Stein-Fisher evaluations.
struct FlowContext {
  GridDensity pi;
  Eigen::ArrayXd log_pi;
  Eigen::ArrayXd vprime;  // V' at centers = -score
  GridConvolver conv;

  FlowContext(const GridDensity& sample_grid, const TargetModel& target, double bandwidth)
      : pi(grid_from_target(sample_grid.lo, sample_grid.hi, sample_grid.m, target)),
        log_pi(sample_grid.m),
        vprime(sample_grid.m),
        conv(sample_grid.m, sample_grid.dx(), bandwidth) {
    for (int i = 0; i < sample_grid.m; ++i) {
      log_pi(i) = pi.values(i) > kDensityFloor ? std::log(pi.values(i)) : -kInf;
      Eigen::VectorXd p(1);
      p(0) = sample_grid.center(i);
      vprime(i) = -target.score(p)(0);
    }
  }
};

// d log(rho)/dx by central differences on log values, one-sided at the edges
// of the support; zero for cells outside the support.
Eigen::ArrayXd dlog_density(const GridDensity& rho) {
  const int m = rho.m;
  const double dx = rho.dx();
  Eigen::ArrayXd logs(m);
  for (int i = 0; i < m; ++i)
    logs(i) = rho.values(i) > kDensityFloor ? std::log(rho.values(i)) : 0.0;
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    if (rho.values(i) <= kDensityFloor) continue;
    bool left = i > 0 && rho.values(i - 1) > kDensityFloor;
    bool right = i + 1 < m && rho.values(i + 1) > kDensityFloor;
    if (left && right)
      out(i) = (logs(i + 1) - logs(i - 1)) / (2.0 * dx);
    else if (right)
      out(i) = (logs(i + 1) - logs(i)) / dx;
    else if (left)
      out(i) = (logs(i) - logs(i - 1)) / dx;
  }
  return out;
}

// Integrand weights u_j = [dlog rho + V'](x_j) rho_j; the kernelized score
// mismatch is conv(u) dx and the Stein Fisher information is <u, conv(u)> dx^2.
Eigen::ArrayXd score_mismatch_weights(const GridDensity& rho, const FlowContext& ctx) {
  Eigen::ArrayXd u = (dlog_density(rho) + ctx.vprime) * rho.values;
  for (int i = 0; i < rho.m; ++i)
    if (rho.values(i) <= kDensityFloor) u(i) = 0.0;
  return u;
}

struct VelocityFisher {
  Eigen::ArrayXd velocity;
  double fisher;
};

VelocityFisher velocity_and_fisher(const GridDensity& rho, FlowContext& ctx, double beta) {
  const double dx = rho.dx();
  Eigen::ArrayXd u = score_mismatch_weights(rho, ctx);
  Eigen::ArrayXd conv = ctx.conv.apply(u);
  double fisher = (u * conv).sum() * dx * dx;
  if (fisher < 0.0) fisher = 0.0;

  Eigen::ArrayXd v(rho.m);
  for (int i = 0; i < rho.m; ++i) {
    if (rho.values(i) <= kDensityFloor || ctx.log_pi(i) == -kInf) {
      v(i) = 0.0;
      continue;
    }
    double pref = beta == 0.0 ? 1.0 : std::exp(beta * (ctx.log_pi(i) - std::log(rho.values(i))));
    v(i) = -pref * conv(i) * dx;
  }
  return {std::move(v), fisher};
}

}  // namespace

Eigen::ArrayXd flow_velocity_grid(const GridDensity& rho, const TargetModel& target,
                                  const KernelSpec& spec, double beta) {
  check_grid(rho);
  if (!(beta > -1.0)) throw std::invalid_argument("beta must exceed -1");
  FlowContext ctx(rho, target, resolve_flow_kernel(spec).bandwidth);
  return velocity_and_fisher(rho, ctx, beta).velocity;
}

double stein_fisher_grid(const GridDensity& rho, const TargetModel& target,
                         const KernelSpec& spec) {
  check_grid(rho);
  FlowContext ctx(rho, target, resolve_flow_kernel(spec).bandwidth);
  return velocity_and_fisher(rho, ctx, 0.0).fisher;
}

GridDensity flow_step(const GridDensity& rho, const Eigen::ArrayXd& velocity, double dt) {
  check_grid(rho);
  if (velocity.size() != rho.m) throw std::invalid_argument("flow_step: velocity size mismatch");
  if (!(dt > 0.0)) throw std::invalid_argument("flow_step: dt must be positive");
  const double dx = rho.dx();
  const double vmax = velocity.abs().maxCoeff();
  if (dt * vmax > 0.9 * dx * (1.0 + 1e-12)) throw CflError(vmax);

  const int m = rho.m;
  // First-order upwind interface fluxes; zero flux through the boundaries.
  Eigen::ArrayXd flux = Eigen::ArrayXd::Zero(m + 1);
  for (int k = 1; k < m; ++k) {
    double vf = 0.5 * (velocity(k - 1) + velocity(k));
    flux(k) = vf > 0.0 ? vf * rho.values(k - 1) : vf * rho.values(k);
  }
  GridDensity next = rho;
  for (int i = 0; i < m; ++i)
    next.values(i) = rho.values(i) - dt / dx * (flux(i + 1) - flux(i));
  return next;
}

FlowReport run_flow(const GridDensity& rho0, const TargetModel& target, const KernelSpec& spec,
                    double beta, double T, double dt0) {
  check_grid(rho0);
  if (!(beta > -1.0)) throw std::invalid_argument("beta must exceed -1");
  if (!(T > 0.0) || !(dt0 > 0.0)) throw std::invalid_argument("run_flow: T and dt0 must be positive");

  FlowContext ctx(rho0, target, resolve_flow_kernel(spec).bandwidth);
  const double alpha = beta + 1.0;
  const double dx = rho0.dx();

  FlowReport report;
  report.horizon = T;
  report.beta = beta;
  report.initial_divergence = renyi_divergence_grid(rho0, ctx.pi, alpha);
  if (report.initial_divergence == kInf)
    throw std::runtime_error("run_flow: initial Renyi divergence is infinite (rho0 not absolutely continuous w.r.t. pi on the grid)");

  if (beta == 0.0) {
    report.bound = renyi_divergence_grid(rho0, ctx.pi, 1.0) / T;
  } else if (beta > 0.0) {
    report.bound = std::exp(beta * report.initial_divergence) / (T * beta * (beta + 1.0));
  } else {
    report.bound = -1.0 / (T * beta * (beta + 1.0));
  }

  GridDensity rho = rho0;
  VelocityFisher vf = velocity_and_fisher(rho, ctx, beta);
  double cumulative = 0.0;  // integral of I over [0, t]
  double prev_exp = std::exp(beta * report.initial_divergence);
  report.min_density = rho.values.minCoeff();

  report.samples.push_back(
      {0.0, report.initial_divergence, vf.fisher, 0.0, 0.0, report.bound});

  double t = 0.0;
  while (t < T - 1e-15 * T) {
    const double t_next = std::min(t + dt0, T);
    double interval_integral = 0.0;
    double s = t;
    while (s < t_next - 1e-15 * T) {
      double vmax = vf.velocity.abs().maxCoeff();
      double remaining = t_next - s;
      double dt_sub = remaining;
      if (vmax > 0.0) dt_sub = std::min(dt_sub, 0.45 * dx / vmax);
      if (dt_sub < remaining && !(dt_sub > 1e-9 * dt0))
        throw std::runtime_error("run_flow: velocity blow-up, substep collapsed at t=" +
                                 std::to_string(s));
      rho = flow_step(rho, vf.velocity, dt_sub);
      s += dt_sub;
      ++report.steps;
      VelocityFisher next = velocity_and_fisher(rho, ctx, beta);
      interval_integral += 0.5 * (vf.fisher + next.fisher) * dt_sub;
      vf = std::move(next);
    }
    t = t_next;
    cumulative += interval_integral;

    double divergence = renyi_divergence_grid(rho, ctx.pi, alpha);
    if (divergence == kInf)
      throw std::runtime_error("run_flow: Renyi divergence hit the +inf sentinel at t=" + std::to_string(t));
    double now_exp = std::exp(beta * divergence);
    double interval = t - report.samples.back().t;
    double avg_rate = interval_integral / interval;
    double residual = std::abs((now_exp - prev_exp) / interval + beta * (beta + 1.0) * avg_rate);
    prev_exp = now_exp;

    report.max_mass_error = std::max(report.max_mass_error, std::abs(rho.mass() - 1.0));
    report.min_density = std::min(report.min_density, rho.values.minCoeff());
    report.samples.push_back({t, divergence, vf.fisher, residual, cumulative / T, report.bound});
  }
  return report;
}

}  // namespace svgd
