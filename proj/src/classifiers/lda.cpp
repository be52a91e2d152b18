#include <cmath>

#include "dabag/error.hpp"
#include "kinds.hpp"

namespace dabag::detail {

LdaModel fit_lda(const LdaSpec& spec, const Dataset& train) {
  LdaModel model;
  model.classes = present_classes(train);
  const auto K = static_cast<Eigen::Index>(model.classes.size());
  const auto p = static_cast<Eigen::Index>(train.dim());
  const auto n = static_cast<Eigen::Index>(train.rows());
  const auto& x = train.features();

  std::vector<Eigen::Index> slot(static_cast<std::size_t>(train.n_classes()) + 1, -1);
  for (Eigen::Index c = 0; c < K; ++c) slot[static_cast<std::size_t>(model.classes[static_cast<std::size_t>(c)])] = c;

  model.means = Eigen::MatrixXd::Zero(K, p);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = slot[static_cast<std::size_t>(train.label(static_cast<std::size_t>(i)))];
    model.means.row(c) += x.row(i);
    counts[c] += 1.0;
  }
  for (Eigen::Index c = 0; c < K; ++c) model.means.row(c) /= counts[c];

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = slot[static_cast<std::size_t>(train.label(static_cast<std::size_t>(i)))];
    const Eigen::RowVectorXd diff = x.row(i) - model.means.row(c);
    scatter.noalias() += diff.transpose() * diff;
  }
  const double dof = n > K ? static_cast<double>(n - K) : static_cast<double>(n);
  Eigen::MatrixXd cov = scatter / dof;
  if (spec.ridge > 0.0) {
    const double scale = cov.trace() / static_cast<double>(p);
    cov.diagonal().array() += spec.ridge * (scale > 0.0 ? scale : 1.0);
  }

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericError("lda: pooled covariance is singular; use a positive ridge");
  }
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  if (diag.minCoeff() <= 1e-12 * std::max(1.0, diag.maxCoeff())) {
    throw NumericError("lda: pooled covariance is numerically singular; use a positive ridge");
  }
  model.covariance_inverse = llt.solve(Eigen::MatrixXd::Identity(p, p));

  model.weights = model.means * model.covariance_inverse;
  model.offsets.resize(K);
  for (Eigen::Index c = 0; c < K; ++c) {
    const double prior = counts[c] / static_cast<double>(n);
    model.priors.push_back(prior);
    model.offsets[c] = -0.5 * model.weights.row(c).dot(model.means.row(c)) + std::log(prior);
  }
  return model;
}

Label predict_lda(const LdaModel& model, std::span<const double> x) {
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  std::vector<double> score(model.classes.size());
  for (std::size_t c = 0; c < score.size(); ++c) {
    const auto r = static_cast<Eigen::Index>(c);
    score[c] = model.weights.row(r).dot(xv) + model.offsets[r];
  }
  return model.classes[argmax_first(score)];
}

}  // namespace dabag::detail
