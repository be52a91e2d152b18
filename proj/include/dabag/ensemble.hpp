#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dabag/classifiers.hpp"
#include "dabag/resampler.hpp"

namespace dabag {

enum class EnsembleMode { kDomainAdaptive, kClassicalBootstrap };

struct DaBaggingConfig {
  std::size_t replicates = 50;
  ResampleConfig resample;
  ClassifierSpec base = TreeSpec{};
  EnsembleMode mode = EnsembleMode::kDomainAdaptive;
  // Worker threads for member fitting and prediction; 0 = default_threads().
  std::size_t threads = 1;

  void validate() const;
};

struct EnsembleModel {
  std::vector<FittedClassifier> members;
  // One per member in domain-adaptive mode, empty otherwise.
  std::vector<ResampleTrace> traces;
  DaBaggingConfig config;
  int n_classes = 0;
  std::size_t dim = 0;
};

// Domain-adaptive mode fits member b on the b-th nearest-neighbor resample of
// `train` guided by `test_features`; classical mode fits it on an n-out-of-n
// bootstrap of `train` and never looks at `test_features`.
EnsembleModel fit_ensemble(const Dataset& train, const Dataset* test_features, const DaBaggingConfig& cfg,
                           const RngStream& rng);

// Per-member predictions for one point. Member b uses rng.derive(b + 1).
std::vector<Label> member_votes(const EnsembleModel& model, std::span<const double> x, const RngStream& rng);

// Fraction of members voting for each class.
std::vector<double> vote_fraction(const EnsembleModel& model, std::span<const double> x, const RngStream& rng);

// Plurality vote; ties go to the smallest class id.
Label predict_ensemble(const EnsembleModel& model, std::span<const double> x, const RngStream& rng);

// Cached member predictions over a fixed set of points: votes[b][i] is member
// b's label for point i, computed with the same stream as
// member_votes(model, points.row(i), rng.derive(i)).
struct VoteTable {
  std::vector<std::vector<Label>> votes;
  int n_classes = 0;

  [[nodiscard]] std::size_t members() const { return votes.size(); }
  [[nodiscard]] std::size_t points() const { return votes.empty() ? 0 : votes.front().size(); }
  // Plurality over the first `first_members` members (all when 0).
  [[nodiscard]] std::vector<Label> majority(std::size_t first_members = 0) const;
  [[nodiscard]] std::vector<double> fraction(std::size_t point, std::size_t first_members = 0) const;
};

VoteTable vote_table(const EnsembleModel& model, const Dataset& points, const RngStream& rng);

std::vector<double> tally_fraction(std::span<const Label> votes, int n_classes);
Label tally_majority(std::span<const Label> votes, int n_classes);

struct VarianceRow {
  std::size_t replicates = 0;
  double mean_error = 0.0;
  // Absent with a single repetition.
  std::optional<double> variance;
};

// Test error of ensembles of each size in `replicate_grid` across `repetitions`
// independent randomizations on fixed data. Each repetition fits one ensemble
// of the largest size and scores its leading members, so the grid sizes share
// members within a repetition.
std::vector<VarianceRow> variance_vs_B(const Dataset& train, const Dataset& test_labeled, DaBaggingConfig cfg,
                                       const std::vector<std::size_t>& replicate_grid, std::size_t repetitions,
                                       const RngStream& rng);

}  // namespace dabag
