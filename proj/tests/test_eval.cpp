#include <doctest.h>

#include <json.hpp>
#include <random>
#include <sstream>

#include "dabag/cli/csv.hpp"
#include "dabag/cli/output.hpp"
#include "dabag/error.hpp"
#include "dabag/eval.hpp"

using namespace dabag;

namespace {

ExperimentConfig small_experiment() {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::kSetting1;
  cfg.n_train = 60;
  cfg.n_test = 40;
  cfg.q_grid = {{0.5, 0.5}, {0.2, 0.8}};
  cfg.reps = 3;
  cfg.seed = 12;
  MethodConfig da{"da-knn", MethodKind::kDomainAdaptive, KnnSpec{3}, 3, {}};
  MethodConfig bag{"bagging-tree", MethodKind::kClassicalBagging, TreeSpec{}, 3, {}};
  MethodConfig one{"lda", MethodKind::kSingle, LdaSpec{}, 1, {}};
  cfg.methods = {da, bag, one};
  return cfg;
}

void check_same(const ExperimentResult& a, const ExperimentResult& b) {
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].method == b.records[i].method);
    CHECK(a.records[i].accuracy == b.records[i].accuracy);
    CHECK(a.records[i].type_I == b.records[i].type_I);
    CHECK(a.records[i].power == b.records[i].power);
    CHECK(a.records[i].failure == b.records[i].failure);
  }
  CHECK(cli::records_csv(a.records, false) == cli::records_csv(b.records, false));
}

std::optional<double> cell_value(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

}  // namespace

TEST_CASE("test_error examples") {
  CHECK(test_error({1, 2, 2}, {1, 2, 2}) == 0.0);
  CHECK(test_error({2, 1, 1}, {1, 2, 2}) == 1.0);
  CHECK(test_error({1, 2, 2}, {1, 2, 1}) == doctest::Approx(1.0 / 3));
  CHECK_THROWS_AS(test_error({1}, {1, 2}), UsageError);
  CHECK_THROWS_AS(test_error({}, {}), UsageError);
}

TEST_CASE("accuracy and test_error add to one") {
  std::mt19937_64 eng(80);
  for (int t = 0; t < 1000; ++t) {
    std::vector<Label> a(1 + eng() % 50), b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = 1 + static_cast<int>(eng() % 3);
      b[i] = 1 + static_cast<int>(eng() % 3);
    }
    CHECK(accuracy(a, b) + test_error(a, b) == 1.0);
  }
}

TEST_CASE("type_I_and_power edge cases") {
  const std::vector<bool> truth{false, false, true, true};
  auto r = type_I_and_power(truth, truth);
  CHECK(*r.type_I == 0.0);
  CHECK(*r.power == 1.0);
  r = type_I_and_power({true, true, true, true}, truth);
  CHECK(*r.type_I == 1.0);
  CHECK(*r.power == 1.0);
  r = type_I_and_power({true, false, false, true}, truth);
  CHECK(*r.type_I == 0.5);
  CHECK(*r.power == 0.5);
  r = type_I_and_power({false, true}, {false, false});
  CHECK(*r.type_I == 0.5);
  CHECK_FALSE(r.power);
  r = type_I_and_power({true}, {true});
  CHECK_FALSE(r.type_I);
  CHECK_THROWS_AS(type_I_and_power({true}, {true, false}), UsageError);
}

TEST_CASE("method kinds round-trip through their names") {
  for (auto k : {MethodKind::kDomainAdaptive, MethodKind::kClassicalBagging, MethodKind::kSingle}) {
    CHECK(method_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(method_kind_from_string("bagging"), UsageError);
}

TEST_CASE("summarize skips absent values") {
  const auto s = summarize({1.0, std::nullopt, 3.0});
  CHECK(s.count == 2);
  CHECK(s.mean == 2.0);
  CHECK(s.sd == doctest::Approx(std::sqrt(2.0)));
  const auto one = summarize({4.0});
  CHECK(one.sd == 0.0);
  CHECK(summarize({std::nullopt}).count == 0);
}

TEST_CASE("experiment config validation") {
  auto cfg = small_experiment();
  CHECK_NOTHROW(cfg.validate());
  cfg.q_grid.clear();
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = small_experiment();
  cfg.methods[0].replicates = 0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = small_experiment();
  cfg.q_grid = {{0.5, 0.6}};
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = small_experiment();
  cfg.reps = 0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
}

TEST_CASE("one cell and one rep give one record") {
  auto cfg = small_experiment();
  cfg.q_grid = {{0.3, 0.7}};
  cfg.reps = 1;
  cfg.methods.resize(1);
  const auto res = run_experiment(cfg);
  REQUIRE(res.records.size() == 1);
  const auto& r = res.records[0];
  CHECK(r.failure.empty());
  CHECK(r.scored == 40);
  CHECK(*r.accuracy + *r.error == 1.0);
  CHECK_FALSE(r.type_I);
  REQUIRE(res.aggregates.size() == 1);
  CHECK(res.aggregates[0].accuracy.mean == *r.accuracy);
}

TEST_CASE("run_experiment is deterministic and independent of the worker count") {
  auto cfg = small_experiment();
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  check_same(a, b);
  cfg.threads = 4;
  check_same(a, run_experiment(cfg));
  CHECK(a.records.size() == 2 * 3 * 3);
  cfg.seed = 13;
  CHECK_FALSE(cli::records_csv(a.records, false) == cli::records_csv(run_experiment(cfg).records, false));
}

TEST_CASE("anomaly runs report rates and score only retained inliers") {
  auto cfg = small_experiment();
  cfg.n_train = 100;
  cfg.n_test = 100;
  cfg.epsilon_out = 0.1;
  cfg.anomaly = AnomalyConfig{};
  const auto res = run_experiment(cfg);
  for (const auto& r : res.records) {
    REQUIRE(r.failure.empty());
    REQUIRE(r.type_I);
    REQUIRE(r.power);
    CHECK(*r.type_I >= 0.0);
    CHECK(*r.power <= 1.0);
    CHECK(r.scored <= 90);
  }
}

TEST_CASE("cell failures are recorded and the run continues") {
  auto cfg = small_experiment();
  cfg.n_train = 10;  // 5 rows per class, too few for k = 5 calibration
  cfg.epsilon_out = 0.1;
  cfg.anomaly = AnomalyConfig{};
  const auto res = run_experiment(cfg);
  CHECK(res.records.size() == 18);
  for (const auto& r : res.records) {
    CHECK_FALSE(r.failure.empty());
    CHECK_FALSE(r.accuracy);
  }
  for (const auto& a : res.aggregates) {
    CHECK(a.failures == 3);
    CHECK(a.accuracy.count == 0);
  }
}

TEST_CASE("aggregates are recomputable from the written records") {
  auto cfg = small_experiment();
  cfg.epsilon_out = 0.1;
  cfg.n_train = 100;
  cfg.n_test = 100;
  cfg.anomaly = AnomalyConfig{};
  const auto res = run_experiment(cfg);

  std::istringstream csv(cli::records_csv(res.records, false));
  const auto table = cli::read_csv(csv, "records.csv");
  REQUIRE(table.rows.size() == res.records.size());
  auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(table.header.begin(), table.header.end(), name) - table.header.begin());
  };
  std::vector<ExperimentRecord> parsed;
  for (const auto& row : table.rows) {
    ExperimentRecord r;
    r.grid_index = std::stoul(row[col("grid_index")]);
    r.method = row[col("method")];
    r.accuracy = cell_value(row[col("accuracy")]);
    r.error = cell_value(row[col("error")]);
    r.type_I = cell_value(row[col("type_I")]);
    r.power = cell_value(row[col("power")]);
    r.failure = row[col("failure")];
    parsed.push_back(r);
  }
  const auto recomputed = aggregate(parsed);

  const auto json = nlohmann::json::parse(cli::aggregates_json(cfg, res.aggregates));
  const auto& rows = json.at("aggregates");
  REQUIRE(rows.size() == recomputed.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].at("method").get<std::string>() == recomputed[i].method);
    CHECK(rows[i].at("grid_index").get<std::size_t>() == recomputed[i].grid_index);
    CHECK(rows[i].at("accuracy").at("mean").get<double>() == recomputed[i].accuracy.mean);
    CHECK(rows[i].at("accuracy").at("sd").get<double>() == recomputed[i].accuracy.sd);
    CHECK(rows[i].at("power").at("mean").get<double>() == recomputed[i].power.mean);
    CHECK(rows[i].at("type_I").at("count").get<std::size_t>() == recomputed[i].type_I.count);
    CHECK(rows[i].at("failures").get<std::size_t>() == recomputed[i].failures);
  }
}

TEST_CASE("excess risk with indistinguishable classes is zero on both sides") {
  auto factory = [](const RngStream& rng) {
    Vector mu = Vector::Zero(2);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
    std::vector<ClassDensity> classes;
    classes.emplace_back(std::vector<MixtureComponent>{{1.0, Gaussian(mu, id)}});
    classes.emplace_back(std::vector<MixtureComponent>{{1.0, Gaussian(mu, id)}});
    return gen_mixture(std::move(classes), {0.5, 0.5}, {0.5, 0.5}, 0.0, std::nullopt, 60, 40, rng);
  };
  ExcessRiskConfig cfg;
  cfg.replicates = 3;
  cfg.reps = 3;
  cfg.n_eval = 200;
  cfg.n_mc = 1000;
  cfg.base = KnnSpec{3};
  const auto r = excess_risk_check(factory, cfg, RngStream(14));
  CHECK(r.bayes.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(r.lhs) <= 1e-12);
  CHECK(std::abs(r.rhs) <= 1e-12);
  CHECK(r.holds);
}

TEST_CASE("excess risk on a small Setting I instance") {
  ExcessRiskConfig cfg;
  cfg.replicates = 5;
  cfg.reps = 3;
  cfg.n_eval = 300;
  cfg.n_mc = 100000;
  const auto r = excess_risk_check(ScenarioSpec{Scenario::kSetting1, 100, 100, {0.2, 0.8}, 0.0, 1}, cfg, RngStream(15));
  CHECK(r.bayes.value > 0.0);
  CHECK(r.bayes.std_error < 0.001);
  CHECK(r.ensemble.value >= r.bayes.value - 4 * r.bayes.std_error);
  CHECK(r.single.value >= r.bayes.value - 4 * r.bayes.std_error);
  CHECK(r.lhs == doctest::Approx(r.ensemble.value - r.bayes.value));
  CHECK(r.rhs == doctest::Approx(2 * (r.single.value - r.bayes.value)));
  CHECK(r.holds == (r.lhs <= r.rhs + 3 * r.std_error));
}
