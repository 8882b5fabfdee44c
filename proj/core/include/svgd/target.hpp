#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "svgd/rng.hpp"

namespace svgd {

// Oracle pair for a target pi ~ exp(-V): unnormalized log density and score
// grad log pi = -grad V. Both are pure given the closure state.
struct TargetModel {
  int dim = 0;
  std::function<double(const Eigen::VectorXd&)> log_density_unnorm;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> score;
};

// One score call per particle, row i = score(x_i).
Eigen::MatrixXd score_matrix(const TargetModel& target, const Eigen::MatrixXd& particles);

struct MixtureComponent {
  double weight;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // diagonal covariance
};

struct GaussianMixture {
  std::vector<MixtureComponent> components;

  int dim() const { return components.empty() ? 0 : static_cast<int>(components.front().mean.size()); }
  // Weights on the simplex, variances strictly positive, dimensions equal.
  void validate() const;
};

GaussianMixture single_gaussian(Eigen::VectorXd mean, Eigen::VectorXd variance);

double gaussian_mixture_log_density(const Eigen::VectorXd& x, const GaussianMixture& mix);
Eigen::VectorXd gaussian_mixture_score(const Eigen::VectorXd& x, const GaussianMixture& mix);
TargetModel make_mixture_target(GaussianMixture mix);

struct Dataset {
  Eigen::MatrixXd rows;   // N_data x d feature matrix
  Eigen::VectorXd labels; // entries in {-1, +1}
  int feature_count() const { return static_cast<int>(rows.cols()); }
  int size() const { return static_cast<int>(rows.rows()); }
};

// Bayesian logistic regression posterior over the weight vector:
// p(w | data) ~ N(w; 0, alpha^{-1} I) * prod_i sigmoid(y_i <x_i, w>).
struct LogisticPosterior {
  Eigen::MatrixXd design;
  Eigen::VectorXd labels;
  double prior_precision = 0.01;
  std::optional<int> minibatch;
};

double logistic_log_density(const Eigen::VectorXd& w, const LogisticPosterior& post);

// Full-batch score when no minibatch is configured; otherwise the likelihood
// term runs over a fresh batch drawn from rng and is rescaled by N/|B|.
Eigen::VectorXd logistic_score(const Eigen::VectorXd& w, const LogisticPosterior& post, Rng& rng);

// Deterministic core: likelihood term restricted to the given indices,
// rescaled by N/|indices|.
Eigen::VectorXd logistic_score_on_batch(const Eigen::VectorXd& w, const LogisticPosterior& post,
                                        const std::vector<int>& indices);

// TargetModel whose score draws minibatches from an internal generator seeded
// here; with no minibatch configured the oracles are exact and seed is unused.
TargetModel make_logistic_target(LogisticPosterior post, std::uint64_t seed = 0);

// Standard-normal features and true weights; labels Bernoulli(sigmoid(<x,w>))
// mapped to {-1,+1}. Deterministic per seed.
std::pair<Dataset, Eigen::VectorXd> synthesize_logistic_data(int d, int n, std::uint64_t seed);

// Same generator with the true weights pinned by the caller.
Dataset synthesize_logistic_data_with_weights(const Eigen::VectorXd& weights, int n,
                                              std::uint64_t seed);

}  // namespace svgd
