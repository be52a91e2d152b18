#pragma once

#include <span>
#include <vector>

#include "dabag/dataset.hpp"
#include "dabag/rng.hpp"

namespace dabag {

// Multivariate normal with a cached Cholesky factor.
class Gaussian {
 public:
  // Throws NumericError unless cov is symmetric positive definite.
  Gaussian(Vector mean, Eigen::MatrixXd cov);

  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  [[nodiscard]] const Vector& mean() const { return mean_; }
  [[nodiscard]] const Eigen::MatrixXd& cov() const { return cov_; }
  [[nodiscard]] double log_density(std::span<const double> x) const;
  // Squared Mahalanobis distance to the mean.
  [[nodiscard]] double mahalanobis2(std::span<const double> x) const;
  void sample(Generator& gen, std::span<double> out) const;

 private:
  Vector mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;  // lower triangular
  double log_norm_ = 0.0;
};

struct MixtureComponent {
  double weight;
  Gaussian gaussian;
};

// Class-conditional density f_l as a weighted sum of Gaussians.
class ClassDensity {
 public:
  explicit ClassDensity(std::vector<MixtureComponent> components);

  [[nodiscard]] std::size_t dim() const { return components_.front().gaussian.dim(); }
  [[nodiscard]] const std::vector<MixtureComponent>& components() const { return components_; }
  [[nodiscard]] double log_density(std::span<const double> x) const;
  void sample(Generator& gen, std::span<double> out) const;

 private:
  std::vector<MixtureComponent> components_;
  std::vector<double> weights_;
};

// Known label-shift model sum_l q_l f_l(x). Generators sample from this very
// object, so the Bayes rule always matches the data it is compared against.
class GaussianMixtureOracle {
 public:
  // class_weights are normalized on construction; they must be non-negative
  // with a positive sum.
  GaussianMixtureOracle(std::vector<double> class_weights, std::vector<ClassDensity> classes);

  [[nodiscard]] int n_classes() const { return static_cast<int>(classes_.size()); }
  [[nodiscard]] std::size_t dim() const { return classes_.front().dim(); }
  [[nodiscard]] const std::vector<double>& class_weights() const { return weights_; }
  [[nodiscard]] const ClassDensity& density(Label l) const { return classes_.at(static_cast<std::size_t>(l - 1)); }
  [[nodiscard]] const std::vector<ClassDensity>& classes() const { return classes_; }

  // Same class densities, different priors.
  [[nodiscard]] GaussianMixtureOracle with_class_weights(std::vector<double> class_weights) const;

  // log q_l + log f_l(x) for each class.
  [[nodiscard]] std::vector<double> log_joint(std::span<const double> x) const;
  // Posterior class probabilities under the mixture.
  [[nodiscard]] std::vector<double> posterior(std::span<const double> x) const;

  // Draws `count` labeled points from the mixture.
  [[nodiscard]] Dataset sample(std::size_t count, Generator& gen) const;

 private:
  std::vector<double> weights_;
  std::vector<ClassDensity> classes_;
};

// argmax_l q_l f_l(x); ties resolve to the smallest class id.
Label bayes_classify(const GaussianMixtureOracle& oracle, std::span<const double> x);

struct RiskEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Monte Carlo estimate of E[1 - max_l P(Y = l | X)] under the mixture.
RiskEstimate bayes_risk(const GaussianMixtureOracle& oracle, std::size_t n_mc, const RngStream& rng);

}  // namespace dabag
