#pragma once

#include <span>
#include <vector>

#include "dabag/dataset.hpp"
#include "dabag/metric.hpp"
#include "dabag/rng.hpp"

namespace dabag {

struct AnomalyConfig {
  std::size_t k = 5;
  double alpha = 0.1;
  double split_fraction = 0.5;
  Metric metric;

  void validate() const;
};

struct AnomalyCalibration {
  // Per-class thresholds on the distance scale; entry l - 1 is class l.
  std::vector<double> thresholds;
  // Rows scored (first split) and rows searched (second split) per class.
  std::vector<std::size_t> calibration_sizes;
  std::vector<std::size_t> reference_sizes;
  // Training row indices of each class's second split.
  std::vector<std::vector<std::size_t>> reference_rows;
  AnomalyConfig config;
};

// Root mean squared distance from x to its k nearest rows of class_data.
// k above the row count is reduced to it and reported through `k_clamped`.
double dtm_hat(std::span<const double> x, const Dataset& class_data, std::size_t k, const Metric& metric = {},
               bool* k_clamped = nullptr);

// Order statistic ceil((1 - alpha) * n) (1-based) of the scores.
double upper_quantile(std::vector<double> scores, double alpha);

// Splits each class at random, scores the first part against the second and
// keeps the (1 - alpha) quantile as that class's threshold. Every class needs
// at least 2 (k + 1) rows.
AnomalyCalibration calibrate(const Dataset& train, const AnomalyConfig& cfg, const RngStream& rng);

// Scores points against the full per-class training data.
class DtmScorer {
 public:
  DtmScorer(const Dataset& train, AnomalyCalibration calibration);

  [[nodiscard]] const AnomalyCalibration& calibration() const { return calibration_; }
  // d_l(x) for every class.
  [[nodiscard]] std::vector<double> scores(std::span<const double> x) const;
  // 1 when x exceeds the threshold of every class, else 0.
  [[nodiscard]] int statistic(std::span<const double> x) const;

 private:
  std::vector<Dataset> classes_;
  AnomalyCalibration calibration_;
};

int test_statistic(std::span<const double> x, const Dataset& train, const AnomalyCalibration& cal);

struct AnomalyPartition {
  std::vector<std::size_t> inliers;
  std::vector<std::size_t> anomalies;
  // scores[i][l - 1] = d_l(test row i).
  std::vector<std::vector<double>> scores;
};

// Test rows may number zero.
AnomalyPartition filter_anomalies(const Matrix& test, const Dataset& train, const AnomalyCalibration& cal);

}  // namespace dabag
