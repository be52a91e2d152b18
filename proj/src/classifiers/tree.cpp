#include <algorithm>
#include <numeric>

#include "dabag/error.hpp"
#include "kinds.hpp"

namespace dabag::detail {

namespace {

double gini(const std::vector<double>& counts, double total) {
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (double c : counts) sum_sq += c * c;
  return 1.0 - sum_sq / (total * total);
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

class Grower {
 public:
  Grower(const TreeSpec& spec, const Dataset& train, const RngStream& rng)
      : spec_(spec), train_(train), gen_(rng.generator()), L_(static_cast<std::size_t>(train.n_classes())) {}

  TreeModel grow() {
    std::vector<std::size_t> all(train_.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    build(all, 0);
    return std::move(model_);
  }

 private:
  std::vector<double> tally(const std::vector<std::size_t>& rows) const {
    std::vector<double> counts(L_, 0.0);
    for (std::size_t i : rows) counts[static_cast<std::size_t>(train_.label(i) - 1)] += 1.0;
    return counts;
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> features(train_.dim());
    std::iota(features.begin(), features.end(), std::size_t{0});
    if (spec_.max_features > 0 && spec_.max_features < features.size()) {
      gen_.shuffle(std::span<std::size_t>(features));
      features.resize(spec_.max_features);
      std::sort(features.begin(), features.end());
    }
    return features;
  }

  Split best_split(const std::vector<std::size_t>& rows, const std::vector<double>& counts) {
    const double n = static_cast<double>(rows.size());
    Split best;
    best.impurity = gini(counts, n);
    const double parent = best.impurity;
    const auto& x = train_.features();

    std::vector<std::size_t> order(rows);
    for (std::size_t f : candidate_features()) {
      const auto col = static_cast<Eigen::Index>(f);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x(static_cast<Eigen::Index>(a), col) < x(static_cast<Eigen::Index>(b), col);
      });
      std::vector<double> left(L_, 0.0);
      std::vector<double> right = counts;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const auto y = static_cast<std::size_t>(train_.label(order[i]) - 1);
        left[y] += 1.0;
        right[y] -= 1.0;
        const std::size_t n_left = i + 1;
        const std::size_t n_right = order.size() - n_left;
        if (n_left < spec_.min_leaf || n_right < spec_.min_leaf) continue;
        const double lo = x(static_cast<Eigen::Index>(order[i]), col);
        const double hi = x(static_cast<Eigen::Index>(order[i + 1]), col);
        if (!(lo < hi)) continue;
        const double nl = static_cast<double>(n_left);
        const double nr = static_cast<double>(n_right);
        const double impurity = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
        if (impurity < best.impurity - 1e-12) {
          double threshold = lo + (hi - lo) / 2.0;
          if (!(threshold < hi)) threshold = lo;
          best = {static_cast<int>(f), threshold, impurity};
        }
      }
    }
    if (best.feature >= 0 && !(best.impurity < parent)) best.feature = -1;
    return best;
  }

  std::size_t build(const std::vector<std::size_t>& rows, std::size_t depth) {
    const std::size_t id = model_.nodes.size();
    model_.nodes.push_back(TreeNode{-1, 0.0, 0, 0, tally(rows)});
    const auto counts = model_.nodes[id].counts;
    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
    if (pure || depth >= spec_.max_depth || rows.size() < 2 * spec_.min_leaf) return id;

    const Split split = best_split(rows, counts);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    const auto col = static_cast<Eigen::Index>(split.feature);
    for (std::size_t i : rows) {
      (train_.features()(static_cast<Eigen::Index>(i), col) <= split.threshold ? left : right).push_back(i);
    }
    const std::size_t l = build(left, depth + 1);
    const std::size_t r = build(right, depth + 1);
    auto& node = model_.nodes[id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const TreeSpec& spec_;
  const Dataset& train_;
  Generator gen_;
  std::size_t L_;
  TreeModel model_;
};

}  // namespace

TreeModel fit_tree(const TreeSpec& spec, const Dataset& train, const RngStream& rng) {
  return Grower(spec, train, rng).grow();
}

Label predict_tree(const TreeModel& model, std::span<const double> x) {
  std::size_t id = 0;
  while (model.nodes[id].feature >= 0) {
    const auto& node = model.nodes[id];
    id = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return static_cast<Label>(argmax_first(model.nodes[id].counts) + 1);
}

}  // namespace dabag::detail
