#include <cmath>

#include "dabag/error.hpp"
#include "kinds.hpp"

namespace dabag {

namespace {

struct Design {
  Eigen::MatrixXd x;  // n x (p + 1), last column ones
  Eigen::MatrixXd y;  // n x (K - 1) one-hot, reference class is all zeros
};

Design make_design(const Dataset& train, const std::vector<Label>& classes) {
  const auto n = static_cast<Eigen::Index>(train.rows());
  const auto p = static_cast<Eigen::Index>(train.dim());
  const auto free = static_cast<Eigen::Index>(classes.size()) - 1;
  Design d;
  d.x.resize(n, p + 1);
  d.x.leftCols(p) = train.features();
  d.x.col(p).setOnes();
  d.y = Eigen::MatrixXd::Zero(n, free);
  std::vector<Eigen::Index> slot(static_cast<std::size_t>(train.n_classes()) + 1, -1);
  for (std::size_t c = 0; c < classes.size(); ++c) slot[static_cast<std::size_t>(classes[c])] = static_cast<Eigen::Index>(c);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = slot[static_cast<std::size_t>(train.label(static_cast<std::size_t>(i)))];
    if (c < free) d.y(i, c) = 1.0;
  }
  return d;
}

// Row-wise softmax probabilities for the free classes, plus the mean negative
// log-likelihood.
struct Fit {
  Eigen::MatrixXd prob;
  double nll = 0.0;
};

Fit evaluate(const Design& d, const Eigen::MatrixXd& coef) {
  const Eigen::MatrixXd logits = d.x * coef.transpose();
  const auto n = logits.rows();
  Fit f;
  f.prob.resize(n, logits.cols());
  double nll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = std::max(0.0, logits.row(i).size() ? logits.row(i).maxCoeff() : 0.0);
    double denom = std::exp(-hi);
    for (Eigen::Index c = 0; c < logits.cols(); ++c) denom += std::exp(logits(i, c) - hi);
    const double log_denom = hi + std::log(denom);
    double observed = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      f.prob(i, c) = std::exp(logits(i, c) - log_denom);
      if (d.y(i, c) > 0.0) observed = logits(i, c);
    }
    nll += log_denom - observed;
  }
  f.nll = nll / static_cast<double>(n);
  return f;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  Eigen::VectorXd v(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) v.segment(r * m.cols(), m.cols()) = m.row(r).transpose();
  return v;
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) m.row(r) = v.segment(r * cols, cols).transpose();
  return m;
}

double objective(const Design& d, const Eigen::MatrixXd& coef, double l2) {
  return evaluate(d, coef).nll + 0.5 * l2 * coef.squaredNorm();
}

Eigen::VectorXd gradient(const Design& d, const Fit& f, const Eigen::MatrixXd& coef, double l2) {
  const double n = static_cast<double>(d.x.rows());
  const Eigen::MatrixXd g = (f.prob - d.y).transpose() * d.x / n + l2 * coef;
  return flatten(g);
}

Eigen::MatrixXd hessian(const Design& d, const Fit& f, double l2) {
  const Eigen::Index free = f.prob.cols();
  const Eigen::Index dim = d.x.cols();
  const double n = static_cast<double>(d.x.rows());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(free * dim, free * dim);
  for (Eigen::Index a = 0; a < free; ++a) {
    for (Eigen::Index b = a; b < free; ++b) {
      Eigen::VectorXd w = -f.prob.col(a).cwiseProduct(f.prob.col(b));
      if (a == b) w += f.prob.col(a);
      const Eigen::MatrixXd block = d.x.transpose() * w.asDiagonal() * d.x / n;
      h.block(a * dim, b * dim, dim, dim) = block;
      if (a != b) h.block(b * dim, a * dim, dim, dim) = block.transpose();
    }
  }
  h.diagonal().array() += l2;
  return h;
}

}  // namespace

LogisticLoss logistic_loss(const Eigen::MatrixXd& coef, const Dataset& train, double l2) {
  const auto classes = detail::present_classes(train);
  if (coef.rows() != static_cast<Eigen::Index>(classes.size()) - 1 ||
      coef.cols() != static_cast<Eigen::Index>(train.dim()) + 1) {
    throw UsageError("logistic_loss: coefficient shape does not match the data");
  }
  const Design d = make_design(train, classes);
  const Fit f = evaluate(d, coef);
  return {f.nll + 0.5 * l2 * coef.squaredNorm(), gradient(d, f, coef, l2)};
}

namespace detail {

LogisticModel fit_logistic(const LogisticSpec& spec, const Dataset& train) {
  LogisticModel model;
  model.classes = present_classes(train);
  const auto free = static_cast<Eigen::Index>(model.classes.size()) - 1;
  const auto dim = static_cast<Eigen::Index>(train.dim()) + 1;
  model.coef = Eigen::MatrixXd::Zero(free, dim);
  if (free == 0) {
    model.converged = true;
    return model;
  }

  const Design d = make_design(train, model.classes);
  Fit f = evaluate(d, model.coef);
  double value = f.nll + 0.5 * spec.l2 * model.coef.squaredNorm();
  for (std::size_t it = 0; it < spec.max_iter; ++it) {
    const Eigen::VectorXd g = gradient(d, f, model.coef, spec.l2);
    model.gradient_norm = g.norm();
    if (model.gradient_norm <= spec.tol) {
      model.converged = true;
      break;
    }
    Eigen::VectorXd step = -hessian(d, f, spec.l2).ldlt().solve(g);
    if (!step.allFinite() || step.dot(g) >= 0.0) step = -g;

    const double slope = step.dot(g);
    double scale = 1.0;
    bool moved = false;
    for (int halvings = 0; halvings < 60; ++halvings, scale *= 0.5) {
      const Eigen::MatrixXd trial = model.coef + unflatten(scale * step, free, dim);
      const double trial_value = objective(d, trial, spec.l2);
      if (trial_value <= value + 1e-4 * scale * slope) {
        model.coef = trial;
        value = trial_value;
        moved = true;
        break;
      }
    }
    model.iterations = it + 1;
    if (!moved) break;  // at the floating-point floor of the objective
    f = evaluate(d, model.coef);
  }
  if (!model.converged) {
    model.gradient_norm = gradient(d, f, model.coef, spec.l2).norm();
    model.converged = model.gradient_norm <= spec.tol;
  }
  return model;
}

Label predict_logistic(const LogisticModel& model, std::span<const double> x) {
  const auto free = model.coef.rows();
  if (free == 0) return model.classes.front();
  const auto p = static_cast<Eigen::Index>(x.size());
  // The reference class scores 0; ties keep the smaller class id.
  std::vector<double> score(model.classes.size(), 0.0);
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), p);
  for (Eigen::Index c = 0; c < free; ++c) {
    score[static_cast<std::size_t>(c)] = model.coef.row(c).head(p).dot(xv) + model.coef(c, p);
  }
  return model.classes[argmax_first(score)];
}

}  // namespace detail
}  // namespace dabag
