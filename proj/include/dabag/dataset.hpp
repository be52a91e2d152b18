#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dabag {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Class ids are 1-based and contiguous: 1..n_classes.
using Label = int;

// Immutable feature matrix (rows = samples) with optional class labels.
//
// Input labels of any spelling are mapped to 1..L; the original names are kept
// in label_names() so that predictions can be written back out.
class Dataset {
 public:
  // Unlabeled dataset.
  explicit Dataset(Matrix features);
  // Labeled dataset. Every label must lie in 1..n_classes and n_classes >= 2.
  Dataset(Matrix features, std::vector<Label> labels, int n_classes,
          std::vector<std::string> label_names = {});

  [[nodiscard]] std::size_t rows() const { return static_cast<std::size_t>(features_.rows()); }
  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }
  [[nodiscard]] const Matrix& features() const { return features_; }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * dim(), dim()};
  }

  [[nodiscard]] bool has_labels() const { return labels_.has_value(); }
  // Throws UsageError when unlabeled.
  [[nodiscard]] const std::vector<Label>& labels() const;
  [[nodiscard]] Label label(std::size_t i) const { return labels()[i]; }
  [[nodiscard]] int n_classes() const { return n_classes_; }
  [[nodiscard]] const std::vector<std::string>& label_names() const { return label_names_; }

  // Rows picked by index (repeats allowed), labels and metadata carried over.
  [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const;
  // Row indices grouped per class: result[l - 1] lists rows with label l.
  [[nodiscard]] std::vector<std::vector<std::size_t>> rows_by_class() const;
  [[nodiscard]] Dataset without_labels() const { return Dataset(features_); }

 private:
  Matrix features_;
  std::optional<std::vector<Label>> labels_;
  int n_classes_ = 0;
  std::vector<std::string> label_names_;
};

// Fraction of rows carrying each label. Entry l - 1 is the share of class l.
std::vector<double> class_proportions(const Dataset& d);

void require_same_dim(const Dataset& a, const Dataset& b, const char* what);

}  // namespace dabag
