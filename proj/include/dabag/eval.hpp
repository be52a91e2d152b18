#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dabag/anomaly.hpp"
#include "dabag/ensemble.hpp"
#include "dabag/simgen.hpp"

namespace dabag {

// Misclassification fraction. Throws UsageError on empty or unequal inputs.
double test_error(const std::vector<Label>& predictions, const std::vector<Label>& truth);
double accuracy(const std::vector<Label>& predictions, const std::vector<Label>& truth);

struct DetectionRates {
  // False-flag rate among true inliers; absent without inliers.
  std::optional<double> type_I;
  // Detection rate among true anomalies; absent without anomalies.
  std::optional<double> power;
};

DetectionRates type_I_and_power(const std::vector<bool>& flagged, const std::vector<bool>& truth);

enum class MethodKind {
  kDomainAdaptive,
  kClassicalBagging,
  // A single base classifier fit on the raw training data.
  kSingle,
};

std::string to_string(MethodKind kind);
MethodKind method_kind_from_string(const std::string& name);

struct MethodConfig {
  std::string tag;
  MethodKind kind = MethodKind::kDomainAdaptive;
  ClassifierSpec base = TreeSpec{};
  std::size_t replicates = 50;
  ResampleConfig resample;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::kSetting1;
  std::size_t n_train = 500;
  std::size_t n_test = 500;
  // One entry per grid point: inlier test proportions.
  std::vector<std::vector<double>> q_grid;
  double epsilon_out = 0.0;
  std::vector<MethodConfig> methods;
  std::size_t reps = 20;
  std::uint64_t seed = 1;
  // When set, flagged test rows are removed before fitting and scoring.
  std::optional<AnomalyConfig> anomaly;
  // Worker threads over cells; 0 = default_threads().
  std::size_t threads = 1;

  void validate() const;
};

struct ExperimentRecord {
  std::size_t grid_index = 0;
  std::vector<double> q;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  std::string scenario;
  std::string method;
  std::optional<double> accuracy;
  std::optional<double> error;
  std::optional<double> type_I;
  std::optional<double> power;
  // Test rows kept after anomaly filtering and scored (true inliers only).
  std::size_t scored = 0;
  double runtime_seconds = 0.0;
  std::string failure;
};

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;
};

struct ExperimentAggregate {
  std::size_t grid_index = 0;
  std::vector<double> q;
  std::string method;
  Summary accuracy;
  Summary error;
  Summary type_I;
  Summary power;
  std::size_t failures = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRecord> records;
  std::vector<ExperimentAggregate> aggregates;
};

// Mean and sample standard deviation of the present values.
Summary summarize(const std::vector<std::optional<double>>& values);
std::vector<ExperimentAggregate> aggregate(const std::vector<ExperimentRecord>& records);

// Full factorial over (grid point x rep x method). Each (grid point, rep)
// cell draws one dataset shared by every method, so methods are compared on
// identical data. Failures inside a cell are recorded and the run continues.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct ExcessRiskConfig {
  std::size_t replicates = 50;
  ClassifierSpec base = KnnSpec{};
  ResampleConfig resample;
  std::size_t reps = 20;
  // Fresh labeled draws from the test distribution used to estimate R(C).
  std::size_t n_eval = 2000;
  std::size_t n_mc = 100000;
  std::size_t threads = 1;
};

struct ExcessRiskReport {
  RiskEstimate bayes;
  RiskEstimate ensemble;  // E R(C_DA)
  RiskEstimate single;    // E R(C^xi), the first member of each ensemble
  double lhs = 0.0;       // ensemble - bayes
  double rhs = 0.0;       // 2 * (single - bayes)
  double std_error = 0.0; // of lhs - rhs
  bool holds = false;     // lhs <= rhs + 3 * std_error
};

using ScenarioFactory = std::function<GroundTruth(const RngStream&)>;

// Estimates both sides of E R(C_DA) - R_Bayes <= 2 (E R(C^xi) - R_Bayes)
// by averaging over data draws and resampling draws jointly.
// Risks are measured as E[1 - P(Y = C(X) | X)] over fresh test draws, which
// uses the known posterior instead of sampled labels.
ExcessRiskReport excess_risk_check(const ScenarioFactory& scenario, const ExcessRiskConfig& cfg, const RngStream& rng);
// Repetition r draws its data with generate(spec, rng.derive(r + 1)).
ExcessRiskReport excess_risk_check(const ScenarioSpec& spec, const ExcessRiskConfig& cfg, const RngStream& rng);

}  // namespace dabag
