#include "dabag/gaussian_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dabag/error.hpp"

namespace dabag {

namespace {

double log_sum_exp(std::span<const double> v) {
  const double hi = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

}  // namespace

Gaussian::Gaussian(Vector mean, Eigen::MatrixXd cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  const auto p = mean_.size();
  if (p < 1 || cov_.rows() != p || cov_.cols() != p) throw UsageError("Gaussian: mean/covariance shape mismatch");
  if (!cov_.isApprox(cov_.transpose(), 1e-12)) throw NumericError("Gaussian: covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  if (llt.info() != Eigen::Success) throw NumericError("Gaussian: covariance is not positive definite");
  chol_ = llt.matrixL();
  const double log_det = 2.0 * chol_.diagonal().array().log().sum();
  log_norm_ = -0.5 * (static_cast<double>(p) * std::log(2.0 * std::numbers::pi) + log_det);
}

double Gaussian::mahalanobis2(std::span<const double> x) const {
  if (x.size() != dim()) throw DataError("Gaussian: point dimension mismatch");
  const Vector diff = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size())) - mean_;
  const Vector z = chol_.triangularView<Eigen::Lower>().solve(diff);
  return z.squaredNorm();
}

double Gaussian::log_density(std::span<const double> x) const { return log_norm_ - 0.5 * mahalanobis2(x); }

void Gaussian::sample(Generator& gen, std::span<double> out) const {
  const auto p = static_cast<Eigen::Index>(dim());
  Vector z(p);
  for (Eigen::Index i = 0; i < p; ++i) z[i] = gen.normal();
  Eigen::Map<Vector>(out.data(), p) = mean_ + chol_ * z;
}

ClassDensity::ClassDensity(std::vector<MixtureComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw UsageError("ClassDensity: needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0)) throw UsageError("ClassDensity: negative component weight");
    if (c.gaussian.dim() != components_.front().gaussian.dim()) {
      throw UsageError("ClassDensity: components differ in dimension");
    }
    total += c.weight;
  }
  if (!(total > 0.0)) throw UsageError("ClassDensity: component weights sum to zero");
  for (auto& c : components_) {
    c.weight /= total;
    weights_.push_back(c.weight);
  }
}

double ClassDensity::log_density(std::span<const double> x) const {
  std::vector<double> terms;
  terms.reserve(components_.size());
  for (const auto& c : components_) {
    terms.push_back(c.weight > 0.0 ? std::log(c.weight) + c.gaussian.log_density(x)
                                   : -std::numeric_limits<double>::infinity());
  }
  return log_sum_exp(terms);
}

void ClassDensity::sample(Generator& gen, std::span<double> out) const {
  const std::size_t c = components_.size() == 1 ? 0 : gen.categorical(weights_);
  components_[c].gaussian.sample(gen, out);
}

GaussianMixtureOracle::GaussianMixtureOracle(std::vector<double> class_weights, std::vector<ClassDensity> classes)
    : weights_(std::move(class_weights)), classes_(std::move(classes)) {
  if (classes_.size() < 2) throw UsageError("mixture oracle needs at least two classes");
  if (weights_.size() != classes_.size()) throw UsageError("mixture oracle: one weight per class required");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw UsageError("mixture oracle: class weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw UsageError("mixture oracle: class weights sum to zero");
  for (double& w : weights_) w /= total;
  for (const auto& c : classes_) {
    if (c.dim() != classes_.front().dim()) throw UsageError("mixture oracle: classes differ in dimension");
  }
}

GaussianMixtureOracle GaussianMixtureOracle::with_class_weights(std::vector<double> class_weights) const {
  return GaussianMixtureOracle(std::move(class_weights), classes_);
}

std::vector<double> GaussianMixtureOracle::log_joint(std::span<const double> x) const {
  std::vector<double> out;
  out.reserve(classes_.size());
  for (std::size_t l = 0; l < classes_.size(); ++l) {
    out.push_back(weights_[l] > 0.0 ? std::log(weights_[l]) + classes_[l].log_density(x)
                                    : -std::numeric_limits<double>::infinity());
  }
  return out;
}

std::vector<double> GaussianMixtureOracle::posterior(std::span<const double> x) const {
  auto lj = log_joint(x);
  const double norm = log_sum_exp(lj);
  for (double& v : lj) v = std::exp(v - norm);
  return lj;
}

Dataset GaussianMixtureOracle::sample(std::size_t count, Generator& gen) const {
  const auto p = static_cast<Eigen::Index>(dim());
  Matrix x(static_cast<Eigen::Index>(count), p);
  std::vector<Label> y(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto l = gen.categorical(weights_);
    y[i] = static_cast<Label>(l + 1);
    classes_[l].sample(gen, {x.data() + static_cast<Eigen::Index>(i) * p, static_cast<std::size_t>(p)});
  }
  return Dataset(std::move(x), std::move(y), n_classes());
}

Label bayes_classify(const GaussianMixtureOracle& oracle, std::span<const double> x) {
  const auto lj = oracle.log_joint(x);
  std::size_t best = 0;
  for (std::size_t l = 1; l < lj.size(); ++l) {
    if (lj[l] > lj[best]) best = l;
  }
  return static_cast<Label>(best + 1);
}

RiskEstimate bayes_risk(const GaussianMixtureOracle& oracle, std::size_t n_mc, const RngStream& rng) {
  if (n_mc < 1) throw UsageError("bayes_risk: n_mc must be at least 1");
  auto gen = rng.generator();
  const std::size_t p = oracle.dim();
  std::vector<double> x(p);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n_mc; ++i) {
    const auto l = gen.categorical(oracle.class_weights());
    oracle.classes()[l].sample(gen, x);
    const auto post = oracle.posterior(x);
    const double loss = 1.0 - *std::max_element(post.begin(), post.end());
    sum += loss;
    sum_sq += loss * loss;
  }
  const double n = static_cast<double>(n_mc);
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace dabag
