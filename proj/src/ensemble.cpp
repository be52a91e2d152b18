#include "dabag/ensemble.hpp"

#include <algorithm>
#include <numeric>

#include "dabag/error.hpp"
#include "dabag/parallel.hpp"

namespace dabag {

void DaBaggingConfig::validate() const {
  if (replicates < 1) throw UsageError("ensemble: replicates must be at least 1");
  resample.validate();
  dabag::validate(base);
}

EnsembleModel fit_ensemble(const Dataset& train, const Dataset* test_features, const DaBaggingConfig& cfg,
                           const RngStream& rng) {
  cfg.validate();
  if (!train.has_labels()) throw UsageError("fit_ensemble: training data must be labeled");
  const bool adaptive = cfg.mode == EnsembleMode::kDomainAdaptive;
  if (adaptive) {
    if (test_features == nullptr) throw UsageError("fit_ensemble: domain-adaptive mode needs test features");
    require_same_dim(train, *test_features, "fit_ensemble");
  }

  const std::size_t B = cfg.replicates;
  std::vector<std::optional<FittedClassifier>> members(B);
  std::vector<ResampleTrace> traces(adaptive ? B : 0);
  const RngStream resample_root = rng.derive(Purpose::kResample);
  const RngStream bootstrap_root = rng.derive(Purpose::kBootstrap);
  const RngStream fit_root = rng.derive(Purpose::kFit);

  parallel_for(B, cfg.threads, [&](std::size_t b) {
    const std::uint64_t path = b + 1;
    if (adaptive) {
      auto result = inn_resample(train, *test_features, cfg.resample, resample_root.derive(path));
      members[b] = fit(cfg.base, result.data, fit_root.derive(path));
      traces[b] = std::move(result.trace);
    } else {
      auto gen = bootstrap_root.derive(path).generator();
      std::vector<std::size_t> rows(train.rows());
      for (auto& r : rows) r = gen.index(train.rows());
      members[b] = fit(cfg.base, train.subset(rows), fit_root.derive(path));
    }
  });

  EnsembleModel model;
  model.members.reserve(B);
  for (auto& m : members) model.members.push_back(std::move(*m));
  model.traces = std::move(traces);
  model.config = cfg;
  model.n_classes = train.n_classes();
  model.dim = train.dim();
  return model;
}

std::vector<double> tally_fraction(std::span<const Label> votes, int n_classes) {
  std::vector<double> out(static_cast<std::size_t>(n_classes), 0.0);
  if (votes.empty()) throw UsageError("tally_fraction: no votes");
  for (Label v : votes) out[static_cast<std::size_t>(v - 1)] += 1.0;
  for (double& f : out) f /= static_cast<double>(votes.size());
  return out;
}

Label tally_majority(std::span<const Label> votes, int n_classes) {
  std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
  if (votes.empty()) throw UsageError("tally_majority: no votes");
  for (Label v : votes) counts[static_cast<std::size_t>(v - 1)] += 1.0;
  return static_cast<Label>(argmax_first(counts) + 1);
}

std::vector<Label> member_votes(const EnsembleModel& model, std::span<const double> x, const RngStream& rng) {
  std::vector<Label> out;
  out.reserve(model.members.size());
  for (std::size_t b = 0; b < model.members.size(); ++b) out.push_back(predict(model.members[b], x, rng.derive(b + 1)));
  return out;
}

std::vector<double> vote_fraction(const EnsembleModel& model, std::span<const double> x, const RngStream& rng) {
  return tally_fraction(member_votes(model, x, rng), model.n_classes);
}

Label predict_ensemble(const EnsembleModel& model, std::span<const double> x, const RngStream& rng) {
  return tally_majority(member_votes(model, x, rng), model.n_classes);
}

VoteTable vote_table(const EnsembleModel& model, const Dataset& points, const RngStream& rng) {
  VoteTable table;
  table.n_classes = model.n_classes;
  const std::size_t B = model.members.size();
  const std::size_t n = points.rows();
  table.votes.assign(B, std::vector<Label>(n, 0));
  parallel_for(B, model.config.threads, [&](std::size_t b) {
    for (std::size_t i = 0; i < n; ++i) {
      table.votes[b][i] = predict(model.members[b], points.row(i), rng.derive(i).derive(b + 1));
    }
  });
  return table;
}

std::vector<double> VoteTable::fraction(std::size_t point, std::size_t first_members) const {
  const std::size_t B = first_members == 0 ? members() : std::min(first_members, members());
  std::vector<Label> column(B);
  for (std::size_t b = 0; b < B; ++b) column[b] = votes[b][point];
  return tally_fraction(column, n_classes);
}

std::vector<Label> VoteTable::majority(std::size_t first_members) const {
  const std::size_t B = first_members == 0 ? members() : std::min(first_members, members());
  std::vector<Label> out(points());
  std::vector<Label> column(B);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t b = 0; b < B; ++b) column[b] = votes[b][i];
    out[i] = tally_majority(column, n_classes);
  }
  return out;
}

std::vector<VarianceRow> variance_vs_B(const Dataset& train, const Dataset& test_labeled, DaBaggingConfig cfg,
                                       const std::vector<std::size_t>& replicate_grid, std::size_t repetitions,
                                       const RngStream& rng) {
  if (replicate_grid.empty()) throw UsageError("variance_vs_B: empty replicate grid");
  if (!std::is_sorted(replicate_grid.begin(), replicate_grid.end()) || replicate_grid.front() < 1) {
    throw UsageError("variance_vs_B: replicate grid must be ascending and positive");
  }
  if (repetitions < 1) throw UsageError("variance_vs_B: need at least one repetition");
  const auto& truth = test_labeled.labels();
  const Dataset guides = test_labeled.without_labels();
  cfg.replicates = replicate_grid.back();

  std::vector<std::vector<double>> errors(replicate_grid.size(), std::vector<double>(repetitions));
  for (std::size_t r = 0; r < repetitions; ++r) {
    const RngStream rep = rng.derive(r + 1);
    const auto model = fit_ensemble(train, &guides, cfg, rep.derive(Purpose::kFit));
    const auto table = vote_table(model, guides, rep.derive(Purpose::kPredict));
    for (std::size_t g = 0; g < replicate_grid.size(); ++g) {
      const auto pred = table.majority(replicate_grid[g]);
      std::size_t wrong = 0;
      for (std::size_t i = 0; i < pred.size(); ++i) wrong += pred[i] != truth[i] ? 1 : 0;
      errors[g][r] = static_cast<double>(wrong) / static_cast<double>(pred.size());
    }
  }

  std::vector<VarianceRow> rows;
  for (std::size_t g = 0; g < replicate_grid.size(); ++g) {
    VarianceRow row;
    row.replicates = replicate_grid[g];
    const auto& e = errors[g];
    row.mean_error = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
    if (e.size() > 1) {
      double ss = 0.0;
      for (double v : e) ss += (v - row.mean_error) * (v - row.mean_error);
      row.variance = ss / static_cast<double>(e.size() - 1);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dabag
