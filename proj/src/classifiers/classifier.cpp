#include <cmath>

#include "dabag/error.hpp"
#include "dabag/neighbors.hpp"
#include "kinds.hpp"

namespace dabag {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Label predict_knn(const KnnModel& model, std::span<const double> x, const RngStream& rng) {
  const auto neighbors = k_nearest(x, model.train, model.k, Metric{}, rng.derive(Purpose::kNeighborTie));
  const auto votes = class_weights_from(neighbors, model.train).weights;
  const double top = *std::max_element(votes.begin(), votes.end());
  std::vector<std::size_t> leaders;
  for (std::size_t l = 0; l < votes.size(); ++l) {
    if (votes[l] == top) leaders.push_back(l);
  }
  if (leaders.size() == 1) return static_cast<Label>(leaders.front() + 1);
  auto gen = rng.derive(Purpose::kVoteTie).generator();
  return static_cast<Label>(leaders[gen.index(leaders.size())] + 1);
}

}  // namespace

std::size_t argmax_first(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::string kind_name(const ClassifierSpec& spec) {
  return std::visit(Overloaded{[](const KnnSpec&) { return std::string("knn"); },
                               [](const LogisticSpec&) { return std::string("logistic"); },
                               [](const LdaSpec&) { return std::string("lda"); },
                               [](const TreeSpec&) { return std::string("tree"); }},
                    spec);
}

void validate(const ClassifierSpec& spec) {
  std::visit(Overloaded{[](const KnnSpec&) {},
                        [](const LogisticSpec& s) {
                          if (s.max_iter < 1) throw UsageError("logistic: max_iter must be at least 1");
                          if (!(s.l2 >= 0.0)) throw UsageError("logistic: l2 must be non-negative");
                          if (!(s.tol > 0.0)) throw UsageError("logistic: tol must be positive");
                        },
                        [](const LdaSpec& s) {
                          if (!(s.ridge >= 0.0)) throw UsageError("lda: ridge must be non-negative");
                        },
                        [](const TreeSpec& s) {
                          if (s.max_depth < 1) throw UsageError("tree: max_depth must be at least 1");
                          if (s.min_leaf < 1) throw UsageError("tree: min_leaf must be at least 1");
                        }},
             spec);
}

std::size_t knn_schedule_k(std::size_t n, std::size_t p) {
  const double k = std::round(std::pow(static_cast<double>(n), 4.0 / (static_cast<double>(p) + 4.0)));
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

namespace detail {

std::vector<Label> present_classes(const Dataset& train) {
  std::vector<bool> seen(static_cast<std::size_t>(train.n_classes()), false);
  for (Label y : train.labels()) seen[static_cast<std::size_t>(y - 1)] = true;
  std::vector<Label> out;
  for (std::size_t l = 0; l < seen.size(); ++l) {
    if (seen[l]) out.push_back(static_cast<Label>(l + 1));
  }
  return out;
}

}  // namespace detail

FittedClassifier fit(const ClassifierSpec& spec, const Dataset& train, const RngStream& rng) {
  validate(spec);
  if (!train.has_labels()) throw UsageError("fit: training data must be labeled");
  const int L = train.n_classes();
  const std::size_t p = train.dim();
  auto state = std::visit(
      Overloaded{[&](const KnnSpec& s) -> FittedClassifier::State {
                   const std::size_t k = s.k == 0 ? knn_schedule_k(train.rows(), p) : s.k;
                   return KnnModel{train, std::min(k, train.rows())};
                 },
                 [&](const LogisticSpec& s) -> FittedClassifier::State { return detail::fit_logistic(s, train); },
                 [&](const LdaSpec& s) -> FittedClassifier::State { return detail::fit_lda(s, train); },
                 [&](const TreeSpec& s) -> FittedClassifier::State {
                   return detail::fit_tree(s, train, rng.derive(Purpose::kFit));
                 }},
      spec);
  return FittedClassifier(std::move(state), L, p);
}

Label predict(const FittedClassifier& model, std::span<const double> x, const RngStream& rng) {
  if (x.size() != model.dim()) {
    throw DataError("predict: point has dimension " + std::to_string(x.size()) + ", model expects " +
                    std::to_string(model.dim()));
  }
  return std::visit(Overloaded{[&](const KnnModel& m) { return predict_knn(m, x, rng); },
                               [&](const LogisticModel& m) { return detail::predict_logistic(m, x); },
                               [&](const LdaModel& m) { return detail::predict_lda(m, x); },
                               [&](const TreeModel& m) { return detail::predict_tree(m, x); }},
                    model.state());
}

std::vector<Label> predict_all(const FittedClassifier& model, const Dataset& points, const RngStream& rng) {
  std::vector<Label> out(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) out[i] = predict(model, points.row(i), rng.derive(i));
  return out;
}

}  // namespace dabag
