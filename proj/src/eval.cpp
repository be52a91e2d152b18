#include "dabag/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "dabag/error.hpp"
#include "dabag/parallel.hpp"

namespace dabag {

namespace {

std::size_t count_wrong(const std::vector<Label>& predictions, const std::vector<Label>& truth) {
  if (predictions.size() != truth.size()) throw UsageError("test_error: prediction and truth lengths differ");
  if (predictions.empty()) throw UsageError("test_error: no predictions");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predictions[i] != truth[i] ? 1 : 0;
  return wrong;
}

// E[1 - P(Y = C(X) | X)] over the given points.
std::vector<double> conditional_risks(const GaussianMixtureOracle& oracle, const Dataset& points,
                                      const std::vector<Label>& predictions) {
  std::vector<double> out(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto post = oracle.posterior(points.row(i));
    out[i] = 1.0 - post[static_cast<std::size_t>(predictions[i] - 1)];
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Standard error of the mean; 0 for a single value.
double std_error_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

struct CellOutcome {
  std::vector<ExperimentRecord> records;
};

}  // namespace

double test_error(const std::vector<Label>& predictions, const std::vector<Label>& truth) {
  return static_cast<double>(count_wrong(predictions, truth)) / static_cast<double>(truth.size());
}

double accuracy(const std::vector<Label>& predictions, const std::vector<Label>& truth) {
  const std::size_t wrong = count_wrong(predictions, truth);
  return static_cast<double>(truth.size() - wrong) / static_cast<double>(truth.size());
}

DetectionRates type_I_and_power(const std::vector<bool>& flagged, const std::vector<bool>& truth) {
  if (flagged.size() != truth.size()) throw UsageError("type_I_and_power: flag and truth lengths differ");
  std::size_t inliers = 0, false_flags = 0, outliers = 0, detected = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      ++outliers;
      detected += flagged[i] ? 1 : 0;
    } else {
      ++inliers;
      false_flags += flagged[i] ? 1 : 0;
    }
  }
  DetectionRates r;
  if (inliers > 0) r.type_I = static_cast<double>(false_flags) / static_cast<double>(inliers);
  if (outliers > 0) r.power = static_cast<double>(detected) / static_cast<double>(outliers);
  return r;
}

std::string to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::kDomainAdaptive:
      return "da";
    case MethodKind::kClassicalBagging:
      return "classical";
    case MethodKind::kSingle:
      return "none";
  }
  throw InvariantError("unhandled method kind");
}

MethodKind method_kind_from_string(const std::string& name) {
  if (name == "da") return MethodKind::kDomainAdaptive;
  if (name == "classical") return MethodKind::kClassicalBagging;
  if (name == "none") return MethodKind::kSingle;
  throw UsageError("unknown method mode '" + name + "' (expected da, classical or none)");
}

void ExperimentConfig::validate() const {
  if (q_grid.empty()) throw UsageError("experiment: q grid is empty");
  if (methods.empty()) throw UsageError("experiment: no methods");
  if (reps < 1) throw UsageError("experiment: reps must be at least 1");
  for (const auto& q : q_grid) {
    ScenarioSpec spec{scenario, n_train, n_test, q, epsilon_out, seed};
    spec.validate();
  }
  for (const auto& m : methods) {
    if (m.tag.empty()) throw UsageError("experiment: method tag is empty");
    if (m.replicates < 1) throw UsageError("experiment: method '" + m.tag + "' needs at least one replicate");
    dabag::validate(m.base);
    m.resample.validate();
  }
  if (anomaly) anomaly->validate();
}

Summary summarize(const std::vector<std::optional<double>>& values) {
  std::vector<double> present;
  for (const auto& v : values) {
    if (v) present.push_back(*v);
  }
  Summary s;
  s.count = present.size();
  if (present.empty()) return s;
  s.mean = mean_of(present);
  if (present.size() > 1) {
    double ss = 0.0;
    for (double x : present) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(present.size() - 1));
  }
  return s;
}

std::vector<ExperimentAggregate> aggregate(const std::vector<ExperimentRecord>& records) {
  // Keyed by (grid index, first appearance of the method) so the output order
  // follows the records.
  std::vector<std::string> method_order;
  std::map<std::tuple<std::size_t, std::size_t>, std::vector<const ExperimentRecord*>> groups;
  for (const auto& r : records) {
    auto it = std::find(method_order.begin(), method_order.end(), r.method);
    const auto m = static_cast<std::size_t>(it - method_order.begin());
    if (it == method_order.end()) method_order.push_back(r.method);
    groups[{r.grid_index, m}].push_back(&r);
  }

  std::vector<ExperimentAggregate> out;
  for (const auto& [key, group] : groups) {
    ExperimentAggregate a;
    a.grid_index = std::get<0>(key);
    a.method = method_order[std::get<1>(key)];
    a.q = group.front()->q;
    std::vector<std::optional<double>> acc, err, t1, pw;
    for (const auto* r : group) {
      acc.push_back(r->accuracy);
      err.push_back(r->error);
      t1.push_back(r->type_I);
      pw.push_back(r->power);
      a.failures += r->failure.empty() ? 0 : 1;
    }
    a.accuracy = summarize(acc);
    a.error = summarize(err);
    a.type_I = summarize(t1);
    a.power = summarize(pw);
    out.push_back(std::move(a));
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n_grid = cfg.q_grid.size();
  const std::size_t n_cells = n_grid * cfg.reps;
  std::vector<CellOutcome> cells(n_cells);
  const RngStream master(cfg.seed);
  const std::string scenario_name = to_string(cfg.scenario);

  parallel_for(n_cells, cfg.threads, [&](std::size_t c) {
    const std::size_t g = c / cfg.reps;
    const std::size_t rep = c % cfg.reps;
    const RngStream cell = master.derive(g + 1).derive(rep + 1);

    auto blank = [&](const MethodConfig& m) {
      ExperimentRecord r;
      r.grid_index = g;
      r.q = cfg.q_grid[g];
      r.rep = rep;
      r.seed = cfg.seed;
      r.scenario = scenario_name;
      r.method = m.tag;
      return r;
    };
    auto fail_all = [&](const std::string& why) {
      for (const auto& m : cfg.methods) {
        auto r = blank(m);
        r.failure = why;
        cells[c].records.push_back(std::move(r));
      }
    };

    std::optional<GroundTruth> gt;
    try {
      const ScenarioSpec spec{cfg.scenario, cfg.n_train, cfg.n_test, cfg.q_grid[g], cfg.epsilon_out, cfg.seed};
      gt = generate(spec, cell);
    } catch (const std::exception& e) {
      fail_all(std::string("generate: ") + e.what());
      return;
    }

    const std::size_t m_rows = gt->test.rows();
    std::vector<std::size_t> kept(m_rows);
    std::iota(kept.begin(), kept.end(), 0);
    DetectionRates rates;
    if (cfg.anomaly) {
      try {
        const auto cal = calibrate(gt->train, *cfg.anomaly, cell.derive(Purpose::kSplit));
        auto part = filter_anomalies(gt->test.features(), gt->train, cal);
        std::vector<bool> flagged(m_rows, false);
        for (std::size_t i : part.anomalies) flagged[i] = true;
        rates = type_I_and_power(flagged, gt->anomaly);
        kept = std::move(part.inliers);
      } catch (const std::exception& e) {
        fail_all(std::string("anomaly: ") + e.what());
        return;
      }
    }

    // Scored rows: retained and truly from an inlier class.
    std::vector<std::size_t> scored;
    std::vector<Label> truth;
    for (std::size_t i : kept) {
      if (gt->test_labels[i] != 0) {
        scored.push_back(i);
        truth.push_back(gt->test_labels[i]);
      }
    }
    const Dataset guides_all = gt->test;

    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      const auto& method = cfg.methods[mi];
      auto record = blank(method);
      record.type_I = rates.type_I;
      record.power = rates.power;
      record.scored = scored.size();
      const auto start = std::chrono::steady_clock::now();
      try {
        if (kept.empty()) throw DataError("every test row was flagged as an anomaly");
        if (scored.empty()) throw DataError("no retained test rows come from an inlier class");
        const Dataset guides = guides_all.subset(kept);
        const Dataset points = guides_all.subset(scored);
        const RngStream mstream = cell.derive(Purpose::kFit).derive(mi + 1);
        std::vector<Label> pred;
        if (method.kind == MethodKind::kSingle) {
          const auto model = fit(method.base, gt->train, mstream.derive(Purpose::kFit));
          pred = predict_all(model, points, mstream.derive(Purpose::kPredict));
        } else {
          DaBaggingConfig dc;
          dc.replicates = method.replicates;
          dc.resample = method.resample;
          dc.base = method.base;
          dc.mode = method.kind == MethodKind::kDomainAdaptive ? EnsembleMode::kDomainAdaptive
                                                               : EnsembleMode::kClassicalBootstrap;
          dc.threads = 1;
          const auto model = fit_ensemble(gt->train, &guides, dc, mstream.derive(Purpose::kFit));
          pred = vote_table(model, points, mstream.derive(Purpose::kPredict)).majority();
        }
        record.accuracy = accuracy(pred, truth);
        record.error = 1.0 - *record.accuracy;
      } catch (const std::exception& e) {
        record.failure = e.what();
      }
      record.runtime_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      cells[c].records.push_back(std::move(record));
    }
  });

  ExperimentResult result;
  for (auto& cell : cells) {
    for (auto& r : cell.records) result.records.push_back(std::move(r));
  }
  result.aggregates = aggregate(result.records);
  return result;
}

ExcessRiskReport excess_risk_check(const ScenarioFactory& scenario, const ExcessRiskConfig& cfg,
                                   const RngStream& rng) {
  if (cfg.reps < 1) throw UsageError("excess_risk_check: reps must be at least 1");
  if (cfg.n_eval < 1 || cfg.n_mc < 1) throw UsageError("excess_risk_check: n_eval and n_mc must be positive");

  std::vector<double> ensemble_risk(cfg.reps), single_risk(cfg.reps);
  std::optional<RiskEstimate> bayes;
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    const RngStream rep = rng.derive(r + 1);
    const GroundTruth gt = scenario(rep);
    if (gt.test_oracle.n_classes() != 2) throw UsageError("excess_risk_check: needs a two-class scenario");
    // The Bayes risk depends only on the test mixture, which is the same
    // across repetitions up to a rotation.
    if (!bayes) bayes = bayes_risk(gt.test_oracle, cfg.n_mc, rng.derive(Purpose::kEvaluation));

    DaBaggingConfig dc;
    dc.replicates = cfg.replicates;
    dc.resample = cfg.resample;
    dc.base = cfg.base;
    dc.threads = cfg.threads;
    const auto model = fit_ensemble(gt.train, &gt.test, dc, rep.derive(Purpose::kFit));

    auto gen = rep.derive(Purpose::kEvaluation).generator();
    const Dataset eval_points = gt.test_oracle.sample(cfg.n_eval, gen).without_labels();
    const auto table = vote_table(model, eval_points, rep.derive(Purpose::kPredict));
    ensemble_risk[r] = mean_of(conditional_risks(gt.test_oracle, eval_points, table.majority()));
    single_risk[r] = mean_of(conditional_risks(gt.test_oracle, eval_points, table.votes.front()));
  }

  ExcessRiskReport rep;
  rep.bayes = *bayes;
  rep.ensemble = {mean_of(ensemble_risk), std_error_of(ensemble_risk)};
  rep.single = {mean_of(single_risk), std_error_of(single_risk)};
  rep.lhs = rep.ensemble.value - rep.bayes.value;
  rep.rhs = 2.0 * (rep.single.value - rep.bayes.value);
  // lhs - rhs = ensemble - 2 single + bayes; the first two are paired per rep.
  std::vector<double> paired(cfg.reps);
  for (std::size_t r = 0; r < cfg.reps; ++r) paired[r] = ensemble_risk[r] - 2.0 * single_risk[r];
  const double se_paired = std_error_of(paired);
  rep.std_error = std::sqrt(se_paired * se_paired + rep.bayes.std_error * rep.bayes.std_error);
  rep.holds = rep.lhs <= rep.rhs + 3.0 * rep.std_error;
  return rep;
}

ExcessRiskReport excess_risk_check(const ScenarioSpec& spec, const ExcessRiskConfig& cfg, const RngStream& rng) {
  spec.validate();
  return excess_risk_check([spec](const RngStream& s) { return generate(spec, s); }, cfg, rng);
}

}  // namespace dabag
