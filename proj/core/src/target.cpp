#include "svgd/target.hpp"

#include <cmath>
#include <stdexcept>

namespace svgd {

namespace {

// log(1 + e^t) without overflow.
double log1p_exp(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

// sigmoid(t) = 1 / (1 + e^{-t})
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

void check_dim(const Eigen::VectorXd& x, int dim, const char* what) {
  if (static_cast<int>(x.size()) != dim)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

Eigen::MatrixXd score_matrix(const TargetModel& target, const Eigen::MatrixXd& particles) {
  Eigen::MatrixXd S(particles.rows(), particles.cols());
  for (Eigen::Index i = 0; i < particles.rows(); ++i)
    S.row(i) = target.score(particles.row(i).transpose()).transpose();
  return S;
}

void GaussianMixture::validate() const {
  if (components.empty()) throw std::invalid_argument("mixture has no components");
  int d = dim();
  double total = 0.0;
  for (const auto& c : components) {
    if (static_cast<int>(c.mean.size()) != d || static_cast<int>(c.variance.size()) != d)
      throw std::invalid_argument("mixture components have mismatched dimensions");
    if (!(c.weight > 0.0)) throw std::invalid_argument("mixture weights must be positive");
    if ((c.variance.array() <= 0.0).any())
      throw std::invalid_argument("mixture variances must be strictly positive");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("mixture weights must sum to 1");
}

GaussianMixture single_gaussian(Eigen::VectorXd mean, Eigen::VectorXd variance) {
  GaussianMixture mix;
  mix.components.push_back({1.0, std::move(mean), std::move(variance)});
  return mix;
}

namespace {

// Per-component log weight*pdf values; shared by density and score.
Eigen::VectorXd component_log_terms(const Eigen::VectorXd& x, const GaussianMixture& mix) {
  const int k = static_cast<int>(mix.components.size());
  Eigen::VectorXd logt(k);
  for (int c = 0; c < k; ++c) {
    const auto& comp = mix.components[c];
    double quad = ((x - comp.mean).array().square() / comp.variance.array()).sum();
    double logdet = comp.variance.array().log().sum();
    logt(c) = std::log(comp.weight) - 0.5 * (quad + logdet + x.size() * std::log(2.0 * M_PI));
  }
  return logt;
}

}  // namespace

double gaussian_mixture_log_density(const Eigen::VectorXd& x, const GaussianMixture& mix) {
  check_dim(x, mix.dim(), "gaussian_mixture_log_density");
  Eigen::VectorXd logt = component_log_terms(x, mix);
  double mx = logt.maxCoeff();
  return mx + std::log((logt.array() - mx).exp().sum());
}

Eigen::VectorXd gaussian_mixture_score(const Eigen::VectorXd& x, const GaussianMixture& mix) {
  check_dim(x, mix.dim(), "gaussian_mixture_score");
  Eigen::VectorXd logt = component_log_terms(x, mix);
  double mx = logt.maxCoeff();
  Eigen::VectorXd resp = (logt.array() - mx).exp();
  resp /= resp.sum();
  Eigen::VectorXd score = Eigen::VectorXd::Zero(x.size());
  for (int c = 0; c < static_cast<int>(mix.components.size()); ++c) {
    const auto& comp = mix.components[c];
    score += resp(c) * ((comp.mean - x).array() / comp.variance.array()).matrix();
  }
  return score;
}

TargetModel make_mixture_target(GaussianMixture mix) {
  mix.validate();
  auto shared = std::make_shared<GaussianMixture>(std::move(mix));
  TargetModel target;
  target.dim = shared->dim();
  target.log_density_unnorm = [shared](const Eigen::VectorXd& x) {
    return gaussian_mixture_log_density(x, *shared);
  };
  target.score = [shared](const Eigen::VectorXd& x) {
    return gaussian_mixture_score(x, *shared);
  };
  return target;
}

double logistic_log_density(const Eigen::VectorXd& w, const LogisticPosterior& post) {
  if (post.design.rows() > 0 && post.design.cols() != w.size())
    throw std::invalid_argument("logistic_log_density: dimension mismatch");
  double value = -0.5 * post.prior_precision * w.squaredNorm();
  for (Eigen::Index i = 0; i < post.design.rows(); ++i) {
    double margin = post.labels(i) * post.design.row(i).dot(w);
    value -= log1p_exp(-margin);
  }
  return value;
}

Eigen::VectorXd logistic_score_on_batch(const Eigen::VectorXd& w, const LogisticPosterior& post,
                                        const std::vector<int>& indices) {
  if (post.design.rows() > 0 && post.design.cols() != w.size())
    throw std::invalid_argument("logistic_score: dimension mismatch");
  Eigen::VectorXd grad = -post.prior_precision * w;
  if (indices.empty()) return grad;
  double scale = static_cast<double>(post.design.rows()) / static_cast<double>(indices.size());
  for (int i : indices) {
    double margin = post.labels(i) * post.design.row(i).dot(w);
    grad += scale * sigmoid(-margin) * post.labels(i) * post.design.row(i).transpose();
  }
  return grad;
}

Eigen::VectorXd logistic_score(const Eigen::VectorXd& w, const LogisticPosterior& post, Rng& rng) {
  const int n = static_cast<int>(post.design.rows());
  if (!post.minibatch || *post.minibatch >= n) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    return logistic_score_on_batch(w, post, all);
  }
  if (n == 0) throw std::invalid_argument("logistic_score: minibatch requested on empty dataset");
  if (*post.minibatch <= 0) throw std::invalid_argument("logistic_score: minibatch size must be positive");
  return logistic_score_on_batch(w, post, rng.sample_without_replacement(n, *post.minibatch));
}

TargetModel make_logistic_target(LogisticPosterior post, std::uint64_t seed) {
  auto shared = std::make_shared<LogisticPosterior>(std::move(post));
  auto rng = std::make_shared<Rng>(seed);
  TargetModel target;
  target.dim = static_cast<int>(shared->design.cols());
  target.log_density_unnorm = [shared](const Eigen::VectorXd& w) {
    return logistic_log_density(w, *shared);
  };
  target.score = [shared, rng](const Eigen::VectorXd& w) {
    return logistic_score(w, *shared, *rng);
  };
  return target;
}

namespace {

Dataset synthesize_rows_and_labels(const Eigen::VectorXd* fixed_weights, int d, int n, Rng& rng) {
  Dataset data;
  data.rows = rng.normal_matrix(n, d);
  Eigen::VectorXd weights = fixed_weights ? *fixed_weights : rng.normal_vector(d);
  data.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    double p = sigmoid(data.rows.row(i).dot(weights));
    data.labels(i) = rng.uniform() < p ? 1.0 : -1.0;
  }
  return data;
}

}  // namespace

std::pair<Dataset, Eigen::VectorXd> synthesize_logistic_data(int d, int n, std::uint64_t seed) {
  if (d < 1 || n < 1) throw std::invalid_argument("synthesize_logistic_data: d and n must be >= 1");
  Rng rng(seed);
  Dataset data;
  data.rows = rng.normal_matrix(n, d);
  Eigen::VectorXd weights = rng.normal_vector(d);
  data.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    double p = sigmoid(data.rows.row(i).dot(weights));
    data.labels(i) = rng.uniform() < p ? 1.0 : -1.0;
  }
  return {std::move(data), std::move(weights)};
}

Dataset synthesize_logistic_data_with_weights(const Eigen::VectorXd& weights, int n,
                                              std::uint64_t seed) {
  if (weights.size() < 1 || n < 1)
    throw std::invalid_argument("synthesize_logistic_data: d and n must be >= 1");
  Rng rng(seed);
  return synthesize_rows_and_labels(&weights, static_cast<int>(weights.size()), n, rng);
}

}  // namespace svgd
