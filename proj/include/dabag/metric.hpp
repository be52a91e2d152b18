#pragma once

#include <span>
#include <vector>

#include "dabag/dataset.hpp"

namespace dabag {

enum class MetricKind { kEuclidean };

// Euclidean distance, optionally on z-scored features. Centering cancels in
// differences, so standardization only needs the per-feature scale.
class Metric {
 public:
  Metric() = default;

  // Scales taken from the training data; features with zero spread keep scale 1.
  static Metric standardized(const Dataset& train);

  [[nodiscard]] MetricKind kind() const { return kind_; }
  [[nodiscard]] bool is_standardized() const { return !inv_scale_.empty(); }
  [[nodiscard]] const std::vector<double>& inverse_scale() const { return inv_scale_; }

  // Squared distance without dimension checks; the hot path for neighbor search.
  [[nodiscard]] double squared_unchecked(const double* a, const double* b, std::size_t p) const {
    double acc = 0.0;
    if (inv_scale_.empty()) {
      for (std::size_t i = 0; i < p; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
      }
    } else {
      for (std::size_t i = 0; i < p; ++i) {
        const double d = (a[i] - b[i]) * inv_scale_[i];
        acc += d * d;
      }
    }
    return acc;
  }

 private:
  MetricKind kind_ = MetricKind::kEuclidean;
  std::vector<double> inv_scale_;
};

// Throws DataError on dimension mismatch or when the metric's scale vector
// does not match the points.
double distance(std::span<const double> a, std::span<const double> b, const Metric& m = {});
double squared_distance(std::span<const double> a, std::span<const double> b, const Metric& m = {});

}  // namespace dabag
