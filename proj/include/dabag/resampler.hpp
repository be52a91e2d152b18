#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dabag/dataset.hpp"
#include "dabag/metric.hpp"
#include "dabag/rng.hpp"

namespace dabag {

struct ResampleConfig {
  std::size_t k = 1;
  // Rows drawn per test point; ceil(n / m) when unset.
  std::optional<std::size_t> per_test_draws;
  double eps_stop = 0.01;
  std::size_t t_max = 50;
  // When the test set is larger than the training set, guide each iteration
  // with a random subset of n test points instead of all m.
  bool subsample_guides = false;
  Metric metric;

  void validate() const;
  [[nodiscard]] std::size_t draws_for(std::size_t n_train, std::size_t n_guides) const;
};

enum class StopReason { kThreshold, kIterationCap };

struct ResampleTrace {
  std::vector<double> initial_proportions;
  // Class proportions of D^(1), ..., D^(T).
  std::vector<std::vector<double>> proportions;
  std::size_t iterations = 0;
  StopReason stopped_by = StopReason::kIterationCap;
};

struct ResampleResult {
  Dataset data;
  ResampleTrace trace;
};

// One pass of the nearest-neighbor stratified bootstrap: for every test point
// j, weight the classes by the labels of its k nearest rows of `current`,
// split `draws` rows across classes by a multinomial draw, and fill each class
// share uniformly with replacement from that class of `current`.
//
// Returns row indices into `current`, grouped by test point in order.
std::vector<std::size_t> inn_step_rows(const Dataset& current, const Dataset& test, std::size_t k,
                                       std::size_t draws, const Metric& metric, const RngStream& rng);

// inn_step_rows materialized as a dataset. Draw count from cfg against
// current.rows().
Dataset inn_step(const Dataset& current, const Dataset& test, const ResampleConfig& cfg,
                 const RngStream& rng);

// Iterates inn_step from the training data until consecutive class
// proportions differ by less than eps_stop in every class, or t_max passes.
ResampleResult inn_resample(const Dataset& train, const Dataset& test, const ResampleConfig& cfg,
                            const RngStream& rng);

// B independent replicates; replicate b (1-based) uses master.derive(b).
std::vector<ResampleResult> resample_batch(const Dataset& train, const Dataset& test,
                                           const ResampleConfig& cfg, std::size_t replicates,
                                           const RngStream& master, std::size_t threads = 1);

double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace dabag
