#include <benchmark/benchmark.h>

#include "svgd/flow1d.hpp"
#include "svgd/rng.hpp"
#include "svgd/sampler.hpp"
#include "svgd/stein.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

svgd::TargetModel standard_gaussian(int d) {
  return svgd::make_mixture_target(svgd::single_gaussian(VectorXd::Zero(d), VectorXd::Ones(d)));
}

void BM_svgd_direction(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  svgd::Rng rng(1);
  MatrixXd particles = rng.normal_matrix(n, d);
  svgd::TargetModel target = standard_gaussian(d);
  MatrixXd scores = svgd::score_matrix(target, particles);
  svgd::KernelSpec spec = svgd::KernelSpec::rbf(static_cast<double>(d));
  for (auto _ : state) {
    MatrixXd dir = svgd::svgd_direction_from_scores(particles, scores, spec);
    benchmark::DoNotOptimize(dir);
  }
}
BENCHMARK(BM_svgd_direction)->Args({100, 10})->Args({300, 10})->Args({300, 54});

void BM_stein_matrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  svgd::Rng rng(2);
  MatrixXd particles = rng.normal_matrix(n, d);
  svgd::TargetModel target = standard_gaussian(d);
  MatrixXd scores = svgd::score_matrix(target, particles);
  svgd::KernelSpec spec = svgd::KernelSpec::rbf(static_cast<double>(d));
  for (auto _ : state) {
    svgd::SteinMatrix K = svgd::build_stein_matrix_from_scores(particles, scores, spec, true);
    benchmark::DoNotOptimize(K);
  }
}
BENCHMARK(BM_stein_matrix)->Args({100, 10})->Args({300, 10})->Args({300, 54});

void BM_mirror_descent(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  svgd::Rng rng(3);
  MatrixXd particles = rng.normal_matrix(n, 10);
  svgd::TargetModel target = standard_gaussian(10);
  svgd::SteinMatrix K = svgd::build_stein_matrix(particles, target, svgd::KernelSpec::rbf(10.0), true);
  svgd::SimplexWeights w = svgd::SimplexWeights::uniform(n);
  for (auto _ : state) {
    w = svgd::mirror_descent_step(w, K, 0.5);
    benchmark::DoNotOptimize(w);
  }
}
BENCHMARK(BM_mirror_descent)->Arg(100)->Arg(300)->Arg(1000);

void BM_flow_substep(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  svgd::TargetModel target = standard_gaussian(1);
  svgd::GridDensity rho = svgd::grid_gaussian(-10.0, 10.0, m, -2.0, 1.0);
  svgd::KernelSpec spec = svgd::KernelSpec::rbf(1.0);
  for (auto _ : state) {
    Eigen::ArrayXd v = svgd::flow_velocity_grid(rho, target, spec, -0.5);
    double vmax = v.abs().maxCoeff();
    svgd::GridDensity next = svgd::flow_step(rho, v, 0.45 * rho.dx() / vmax);
    benchmark::DoNotOptimize(next);
  }
}
BENCHMARK(BM_flow_substep)->Arg(1024)->Arg(2048)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
