#include "dabag/dataset.hpp"

#include <cmath>

#include "dabag/error.hpp"

namespace dabag {

namespace {

void validate_features(const Matrix& features) {
  if (features.rows() < 1 || features.cols() < 1) {
    throw DataError("dataset needs at least one row and one column");
  }
  if (!features.allFinite()) throw DataError("dataset contains NaN or infinite feature values");
}

}  // namespace

Dataset::Dataset(Matrix features) : features_(std::move(features)) { validate_features(features_); }

Dataset::Dataset(Matrix features, std::vector<Label> labels, int n_classes,
                 std::vector<std::string> label_names)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      n_classes_(n_classes),
      label_names_(std::move(label_names)) {
  validate_features(features_);
  if (n_classes_ < 2) throw DataError("labeled dataset needs at least two classes");
  if (labels_->size() != rows()) {
    throw DataError("label count " + std::to_string(labels_->size()) + " does not match row count " +
                    std::to_string(rows()));
  }
  for (Label y : *labels_) {
    if (y < 1 || y > n_classes_) {
      throw DataError("label " + std::to_string(y) + " outside 1.." + std::to_string(n_classes_));
    }
  }
  if (label_names_.empty()) {
    for (int l = 1; l <= n_classes_; ++l) label_names_.push_back(std::to_string(l));
  }
  if (label_names_.size() != static_cast<std::size_t>(n_classes_)) {
    throw DataError("label name table size does not match class count");
  }
}

const std::vector<Label>& Dataset::labels() const {
  if (!labels_) throw UsageError("dataset has no labels");
  return *labels_;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw DataError("subset of zero rows");
  Matrix out(static_cast<Eigen::Index>(indices.size()), features_.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= rows()) throw InvariantError("subset index out of range");
    out.row(static_cast<Eigen::Index>(r)) = features_.row(static_cast<Eigen::Index>(indices[r]));
  }
  if (!labels_) return Dataset(std::move(out));
  std::vector<Label> ys;
  ys.reserve(indices.size());
  for (std::size_t i : indices) ys.push_back((*labels_)[i]);
  return Dataset(std::move(out), std::move(ys), n_classes_, label_names_);
}

std::vector<std::vector<std::size_t>> Dataset::rows_by_class() const {
  const auto& ys = labels();
  std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(n_classes_));
  for (std::size_t i = 0; i < ys.size(); ++i) groups[static_cast<std::size_t>(ys[i] - 1)].push_back(i);
  return groups;
}

std::vector<double> class_proportions(const Dataset& d) {
  if (!d.has_labels()) throw UsageError("class_proportions requires a labeled dataset");
  std::vector<double> counts(static_cast<std::size_t>(d.n_classes()), 0.0);
  for (Label y : d.labels()) counts[static_cast<std::size_t>(y - 1)] += 1.0;
  const double n = static_cast<double>(d.rows());
  for (double& c : counts) c /= n;
  return counts;
}

void require_same_dim(const Dataset& a, const Dataset& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw DataError(std::string(what) + ": feature dimension mismatch (" + std::to_string(a.dim()) +
                    " vs " + std::to_string(b.dim()) + ")");
  }
}

}  // namespace dabag
