#include "dabag/resampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dabag/error.hpp"
#include "dabag/neighbors.hpp"
#include "dabag/parallel.hpp"

namespace dabag {

void ResampleConfig::validate() const {
  if (k < 1) throw UsageError("resample: k must be at least 1");
  if (!(eps_stop > 0.0)) throw UsageError("resample: eps_stop must be positive");
  if (t_max < 1) throw UsageError("resample: t_max must be at least 1");
  if (per_test_draws && *per_test_draws < 1) throw UsageError("resample: per_test_draws must be at least 1");
}

std::size_t ResampleConfig::draws_for(std::size_t n_train, std::size_t n_guides) const {
  if (per_test_draws) return *per_test_draws;
  if (n_guides == 0) throw UsageError("resample: empty test set");
  return (n_train + n_guides - 1) / n_guides;
}

double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvariantError("proportion vectors differ in length");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

std::vector<std::size_t> inn_step_rows(const Dataset& current, const Dataset& test, std::size_t k,
                                       std::size_t draws, const Metric& metric, const RngStream& rng) {
  require_same_dim(current, test, "inn_step");
  const auto by_class = current.rows_by_class();
  const std::size_t m = test.rows();

  std::vector<std::size_t> out;
  out.reserve(m * draws);
  for (std::size_t j = 0; j < m; ++j) {
    const RngStream point = rng.derive(j);
    const ClassWeights pi = class_weights(test.row(j), current, k, metric, point.derive(Purpose::kNeighborTie));

    auto counts_gen = point.derive(Purpose::kMultinomial).generator();
    const auto counts = counts_gen.multinomial(draws, pi.weights);

    const RngStream within = point.derive(Purpose::kWithinClass);
    for (std::size_t l = 0; l < counts.size(); ++l) {
      if (counts[l] == 0) continue;
      const auto& pool = by_class[l];
      if (pool.empty()) throw InvariantError("inn_step: positive weight on a class with no rows");
      auto gen = within.derive(l + 1).generator();
      for (std::size_t r = 0; r < counts[l]; ++r) out.push_back(pool[gen.index(pool.size())]);
    }
  }
  if (out.size() != m * draws) throw InvariantError("inn_step: output size differs from m * draws");
  return out;
}

Dataset inn_step(const Dataset& current, const Dataset& test, const ResampleConfig& cfg,
                 const RngStream& rng) {
  cfg.validate();
  const std::size_t draws = cfg.draws_for(current.rows(), test.rows());
  const auto rows = inn_step_rows(current, test, cfg.k, draws, cfg.metric, rng);
  return current.subset(rows);
}

ResampleResult inn_resample(const Dataset& train, const Dataset& test, const ResampleConfig& cfg,
                            const RngStream& rng) {
  cfg.validate();
  if (!train.has_labels()) throw UsageError("inn_resample: training data must be labeled");
  require_same_dim(train, test, "inn_resample");

  const bool subsample = cfg.subsample_guides && test.rows() > train.rows();
  const std::size_t n_guides = subsample ? train.rows() : test.rows();
  const std::size_t draws = cfg.draws_for(train.rows(), n_guides);

  ResampleTrace trace;
  trace.initial_proportions = class_proportions(train);
  Dataset current = train;
  std::vector<double> previous = trace.initial_proportions;

  for (std::size_t t = 1; t <= cfg.t_max; ++t) {
    const RngStream iteration = rng.derive(t);
    std::vector<std::size_t> rows;
    if (subsample) {
      std::vector<std::size_t> guides(test.rows());
      std::iota(guides.begin(), guides.end(), std::size_t{0});
      auto gen = iteration.derive(Purpose::kResample).generator();
      gen.shuffle(std::span<std::size_t>(guides));
      guides.resize(n_guides);
      std::sort(guides.begin(), guides.end());
      rows = inn_step_rows(current, test.subset(guides), cfg.k, draws, cfg.metric, iteration);
    } else {
      rows = inn_step_rows(current, test, cfg.k, draws, cfg.metric, iteration);
    }
    current = current.subset(rows);

    auto props = class_proportions(current);
    const double change = max_abs_difference(props, previous);
    trace.proportions.push_back(props);
    trace.iterations = t;
    previous = std::move(props);
    if (change < cfg.eps_stop) {
      trace.stopped_by = StopReason::kThreshold;
      break;
    }
  }
  return {std::move(current), std::move(trace)};
}

std::vector<ResampleResult> resample_batch(const Dataset& train, const Dataset& test,
                                           const ResampleConfig& cfg, std::size_t replicates,
                                           const RngStream& master, std::size_t threads) {
  if (replicates < 1) throw UsageError("resample_batch: need at least one replicate");
  std::vector<std::optional<ResampleResult>> slots(replicates);
  parallel_for(replicates, threads, [&](std::size_t b) {
    slots[b] = inn_resample(train, test, cfg, master.derive(b + 1));
  });
  std::vector<ResampleResult> out;
  out.reserve(replicates);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace dabag
