// Target oracles: closed-form scores against finite differences of the log
// density, minibatch scaling, and the synthetic-data generator.

#include <doctest.h>

#include <cmath>

#include "svgd/rng.hpp"
#include "svgd/target.hpp"

using Eigen::VectorXd;

namespace {

VectorXd fd_score(const std::function<double(const VectorXd&)>& logp, const VectorXd& x,
                  double step = 1e-5) {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    VectorXd xp = x, xm = x;
    xp(i) += step;
    xm(i) -= step;
    g(i) = (logp(xp) - logp(xm)) / (2.0 * step);
  }
  return g;
}

svgd::GaussianMixture two_bump_1d() {
  svgd::GaussianMixture mix;
  mix.components.push_back({0.4, VectorXd::Constant(1, 2.0), VectorXd::Ones(1)});
  mix.components.push_back({0.6, VectorXd::Constant(1, 6.0), VectorXd::Ones(1)});
  return mix;
}

}  // namespace

TEST_CASE("gaussian score closed forms") {
  VectorXd mu = VectorXd::Constant(3, 1.5);
  svgd::GaussianMixture single = svgd::single_gaussian(mu, VectorXd::Ones(3));

  CHECK(svgd::gaussian_mixture_score(mu, single).isZero(0.0));

  svgd::Rng rng(3);
  VectorXd x = rng.normal_vector(3);
  VectorXd score = svgd::gaussian_mixture_score(x, single);
  CHECK((score - (mu - x)).norm() < 1e-14);
}

TEST_CASE("mixture score matches finite differences") {
  svgd::GaussianMixture mix = two_bump_1d();
  VectorXd x4 = VectorXd::Constant(1, 4.0);
  VectorXd fd =
      fd_score([&](const VectorXd& p) { return svgd::gaussian_mixture_log_density(p, mix); }, x4);
  VectorXd score = svgd::gaussian_mixture_score(x4, mix);
  CHECK((score - fd).norm() < 1e-6);
}

TEST_CASE("score-gradient consistency across random points and targets") {
  svgd::Rng rng(42);
  svgd::GaussianMixture mix;
  mix.components.push_back({0.3, rng.normal_vector(4), VectorXd::Constant(4, 0.8)});
  mix.components.push_back({0.5, rng.normal_vector(4), VectorXd::Constant(4, 1.5)});
  mix.components.push_back({0.2, rng.normal_vector(4), VectorXd::Constant(4, 2.2)});
  svgd::TargetModel target = svgd::make_mixture_target(mix);

  for (int trial = 0; trial < 50; ++trial) {
    VectorXd x = 2.0 * rng.normal_vector(4);
    VectorXd fd = fd_score(target.log_density_unnorm, x);
    VectorXd score = target.score(x);
    CHECK((score - fd).norm() / std::max(fd.norm(), 1e-8) <= 1e-5);
  }
}

TEST_CASE("normalization-constant invariance of the oracle pair") {
  svgd::TargetModel target = svgd::make_mixture_target(two_bump_1d());
  svgd::TargetModel shifted = target;
  const double c = 7.25;
  auto base = target.log_density_unnorm;
  shifted.log_density_unnorm = [base, c](const VectorXd& x) { return base(x) + c; };

  svgd::Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    VectorXd x = 3.0 * rng.normal_vector(1);
    CHECK(target.score(x) == shifted.score(x));  // score untouched by the shift
    VectorXd fd = fd_score(shifted.log_density_unnorm, x);
    CHECK((shifted.score(x) - fd).norm() < 1e-5);
  }
}

TEST_CASE("logistic score: prior-only, finite differences, minibatch scaling") {
  svgd::Rng rng(17);

  SUBCASE("empty dataset gives the prior score") {
    svgd::LogisticPosterior post;
    post.design.resize(0, 3);
    post.labels.resize(0);
    post.prior_precision = 1.0;
    VectorXd w = rng.normal_vector(3);
    svgd::Rng score_rng(0);
    CHECK((svgd::logistic_score(w, post, score_rng) + w).norm() == 0.0);
  }

  SUBCASE("one data point matches finite differences") {
    svgd::LogisticPosterior post;
    post.design = rng.normal_matrix(1, 3);
    post.labels = VectorXd::Constant(1, 1.0);
    post.prior_precision = 0.5;
    VectorXd w = rng.normal_vector(3);
    svgd::Rng score_rng(0);
    VectorXd score = svgd::logistic_score(w, post, score_rng);
    VectorXd fd =
        fd_score([&](const VectorXd& p) { return svgd::logistic_log_density(p, post); }, w);
    CHECK((score - fd).norm() < 1e-6);
  }

  SUBCASE("minibatch equal to the dataset is the full-batch score") {
    auto [data, truth] = svgd::synthesize_logistic_data(4, 20, 1);
    svgd::LogisticPosterior full{data.rows, data.labels, 0.1, std::nullopt};
    svgd::LogisticPosterior batched{data.rows, data.labels, 0.1, 20};
    VectorXd w = rng.normal_vector(4);
    svgd::Rng r1(5), r2(5);
    VectorXd a = svgd::logistic_score(w, full, r1);
    VectorXd b = svgd::logistic_score(w, batched, r2);
    CHECK(a == b);
  }

  SUBCASE("disjoint minibatches average to the full-batch score") {
    auto [data, truth] = svgd::synthesize_logistic_data(3, 12, 2);
    svgd::LogisticPosterior post{data.rows, data.labels, 0.2, std::nullopt};
    VectorXd w = rng.normal_vector(3);
    svgd::Rng score_rng(0);
    VectorXd full = svgd::logistic_score(w, post, score_rng);
    VectorXd averaged = VectorXd::Zero(3);
    for (int b = 0; b < 3; ++b) {
      std::vector<int> batch{4 * b, 4 * b + 1, 4 * b + 2, 4 * b + 3};
      averaged += svgd::logistic_score_on_batch(w, post, batch);
    }
    averaged /= 3.0;
    CHECK((averaged - full).norm() < 1e-10);
  }

  SUBCASE("dimension mismatch is rejected") {
    svgd::LogisticPosterior post;
    post.design = rng.normal_matrix(2, 3);
    post.labels = VectorXd::Constant(2, 1.0);
    svgd::Rng score_rng(0);
    CHECK_THROWS_AS(svgd::logistic_score(rng.normal_vector(4), post, score_rng),
                    std::invalid_argument);
  }
}

TEST_CASE("synthetic data generator") {
  SUBCASE("deterministic per seed") {
    auto [a, wa] = svgd::synthesize_logistic_data(5, 100, 77);
    auto [b, wb] = svgd::synthesize_logistic_data(5, 100, 77);
    CHECK(a.rows == b.rows);
    CHECK(a.labels == b.labels);
    CHECK(wa == wb);
    auto [c, wc] = svgd::synthesize_logistic_data(5, 100, 78);
    CHECK(wa != wc);
  }

  SUBCASE("labels are balanced by construction") {
    auto [data, truth] = svgd::synthesize_logistic_data(5, 1000, 0);
    double positive = static_cast<double>((data.labels.array() > 0).count()) / 1000.0;
    CHECK(positive > 0.2);
    CHECK(positive < 0.8);
  }

  SUBCASE("zero weights give a fair coin") {
    svgd::Dataset data = svgd::synthesize_logistic_data_with_weights(VectorXd::Zero(1), 10000, 4);
    double positive = static_cast<double>((data.labels.array() > 0).count()) / 10000.0;
    CHECK(positive >= 0.45);
    CHECK(positive <= 0.55);
  }

  SUBCASE("invalid sizes are rejected") {
    CHECK_THROWS_AS(svgd::synthesize_logistic_data(0, 5, 1), std::invalid_argument);
    CHECK_THROWS_AS(svgd::synthesize_logistic_data(2, 0, 1), std::invalid_argument);
  }
}
