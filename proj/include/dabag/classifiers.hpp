#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dabag/dataset.hpp"
#include "dabag/rng.hpp"

namespace dabag {

// k = 0 selects round(n^(4/(p+4))) from the training set it is fit on.
struct KnnSpec {
  std::size_t k = 0;
};

// Multinomial logistic regression fit by damped Newton steps on the mean
// cross-entropy plus (l2 / 2) * ||coef||^2.
struct LogisticSpec {
  std::size_t max_iter = 200;
  double l2 = 1e-6;
  double tol = 1e-8;
};

// Ridge is relative: ridge * trace(pooled covariance) / p is added to the
// diagonal. Zero disables it and singular covariances then raise NumericError.
struct LdaSpec {
  double ridge = 1e-8;
};

// CART with Gini impurity. max_features = 0 searches every feature at each
// node; a positive value samples that many per node (random-forest style).
struct TreeSpec {
  std::size_t max_depth = 8;
  std::size_t min_leaf = 5;
  std::size_t max_features = 0;
};

using ClassifierSpec = std::variant<KnnSpec, LogisticSpec, LdaSpec, TreeSpec>;

std::string kind_name(const ClassifierSpec& spec);
void validate(const ClassifierSpec& spec);
// round(n^(4/(p+4))), at least 1.
std::size_t knn_schedule_k(std::size_t n, std::size_t p);

struct KnnModel {
  Dataset train;
  std::size_t k;
};

struct LogisticModel {
  // Present classes; the last one is the reference with zero coefficients.
  std::vector<Label> classes;
  // (classes.size() - 1) x (p + 1); column p is the intercept.
  Eigen::MatrixXd coef;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

struct LdaModel {
  std::vector<Label> classes;
  // Row c is the discriminant direction for classes[c].
  Eigen::MatrixXd weights;
  Eigen::VectorXd offsets;
  Eigen::MatrixXd means;
  Eigen::MatrixXd covariance_inverse;
  std::vector<double> priors;
};

struct TreeNode {
  // -1 marks a leaf.
  int feature = -1;
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  // Training label counts reaching this node; entry l - 1 is class l.
  std::vector<double> counts;
};

struct TreeModel {
  // nodes[0] is the root. A point goes left when x[feature] <= threshold.
  std::vector<TreeNode> nodes;
};

class FittedClassifier {
 public:
  using State = std::variant<KnnModel, LogisticModel, LdaModel, TreeModel>;

  FittedClassifier(State state, int n_classes, std::size_t dim)
      : state_(std::move(state)), n_classes_(n_classes), dim_(dim) {}

  [[nodiscard]] const State& state() const { return state_; }
  [[nodiscard]] int n_classes() const { return n_classes_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }

 private:
  State state_;
  int n_classes_;
  std::size_t dim_;
};

// A class missing from `train` is never predicted by the fitted model.
FittedClassifier fit(const ClassifierSpec& spec, const Dataset& train, const RngStream& rng);

// Label in 1..L. kNN uses `rng` for distance and vote ties; the other kinds
// are deterministic and ignore it.
Label predict(const FittedClassifier& model, std::span<const double> x, const RngStream& rng);

// Row i is predicted with rng.derive(i).
std::vector<Label> predict_all(const FittedClassifier& model, const Dataset& points, const RngStream& rng);

struct LogisticLoss {
  double value = 0.0;
  // Flattened row-major over coef.
  Eigen::VectorXd gradient;
};

// Penalized mean cross-entropy at `coef` for the classes present in `train`,
// with the last present class as reference. Exposed for gradient checks.
LogisticLoss logistic_loss(const Eigen::MatrixXd& coef, const Dataset& train, double l2);

// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax_first(std::span<const double> values);

}  // namespace dabag
