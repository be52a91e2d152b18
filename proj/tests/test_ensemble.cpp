#include <doctest.h>

#include <random>

#include "dabag/ensemble.hpp"
#include "dabag/error.hpp"
#include "support/oracles.hpp"

using namespace dabag;

namespace {

Dataset column(const std::vector<double>& values, std::vector<Label> labels = {}) {
  Matrix x(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = values[i];
  if (labels.empty()) return Dataset(std::move(x));
  return Dataset(std::move(x), std::move(labels), 2);
}

DaBaggingConfig config(std::size_t B, ClassifierSpec base, EnsembleMode mode = EnsembleMode::kDomainAdaptive) {
  DaBaggingConfig cfg;
  cfg.replicates = B;
  cfg.base = base;
  cfg.mode = mode;
  cfg.resample.k = 3;
  return cfg;
}

}  // namespace

TEST_CASE("tally examples") {
  const std::vector<Label> two{2, 2, 2};
  CHECK(tally_fraction(two, 2) == std::vector<double>{0.0, 1.0});
  const std::vector<Label> even{1, 1, 2, 2};
  CHECK(tally_fraction(even, 2) == std::vector<double>{0.5, 0.5});
  CHECK(tally_majority(even, 2) == 1);
  const std::vector<Label> most{1, 2, 2};
  CHECK(tally_majority(most, 2) == 2);
  const std::vector<Label> none;
  CHECK_THROWS_AS(tally_majority(none, 2), UsageError);
}

TEST_CASE("tallies match a brute-force plurality") {
  std::mt19937_64 eng(60);
  for (int trial = 0; trial < 1000; ++trial) {
    const int L = 2 + trial % 4;
    std::vector<Label> votes(1 + eng() % 15);
    for (auto& v : votes) v = 1 + static_cast<int>(eng() % static_cast<unsigned>(L));
    CHECK(tally_majority(votes, L) == oracle::plurality(votes, L));
    const auto f = tally_fraction(votes, L);
    const auto c = oracle::counts(votes, L);
    for (int l = 0; l < L; ++l) {
      CHECK(f[static_cast<std::size_t>(l)] ==
            doctest::Approx(static_cast<double>(c[static_cast<std::size_t>(l)]) / static_cast<double>(votes.size())));
    }
  }
}

TEST_CASE("configuration errors") {
  std::mt19937_64 eng(61);
  const auto train = oracle::random_labeled(eng, 30, 2, 2);
  CHECK_THROWS_AS(fit_ensemble(train, nullptr, config(3, TreeSpec{}), RngStream(1)), UsageError);
  CHECK_THROWS_AS(fit_ensemble(train, &train, config(0, TreeSpec{}), RngStream(1)), UsageError);
  CHECK_NOTHROW(fit_ensemble(train, nullptr, config(3, TreeSpec{}, EnsembleMode::kClassicalBootstrap), RngStream(1)));
}

TEST_CASE("a one-member ensemble behaves like its member") {
  std::mt19937_64 eng(62);
  const auto train = oracle::random_labeled(eng, 60, 3, 3);
  const auto test = oracle::random_labeled(eng, 40, 3, 3).without_labels();
  for (const auto& base : {ClassifierSpec{KnnSpec{3}}, ClassifierSpec{TreeSpec{}}}) {
    const auto model = fit_ensemble(train, &test, config(1, base), RngStream(2));
    REQUIRE(model.members.size() == 1);
    REQUIRE(model.traces.size() == 1);
    const RngStream rng(3);
    for (std::size_t i = 0; i < test.rows(); ++i) {
      CHECK(predict_ensemble(model, test.row(i), rng) == predict(model.members[0], test.row(i), rng.derive(1)));
    }
  }
}

TEST_CASE("classical mode never looks at the test set") {
  std::mt19937_64 eng(63);
  const auto train = oracle::random_labeled(eng, 60, 2, 2);
  const auto test_a = oracle::random_labeled(eng, 30, 2, 2).without_labels();
  const auto test_b = oracle::random_labeled(eng, 50, 2, 2, 4.0).without_labels();
  const auto cfg = config(5, TreeSpec{}, EnsembleMode::kClassicalBootstrap);
  const auto a = fit_ensemble(train, &test_a, cfg, RngStream(4));
  const auto b = fit_ensemble(train, &test_b, cfg, RngStream(4));
  CHECK(a.traces.empty());
  for (std::size_t m = 0; m < 5; ++m) {
    const auto& ta = std::get<TreeModel>(a.members[m].state());
    const auto& tb = std::get<TreeModel>(b.members[m].state());
    REQUIRE(ta.nodes.size() == tb.nodes.size());
    for (std::size_t n = 0; n < ta.nodes.size(); ++n) {
      CHECK(ta.nodes[n].feature == tb.nodes[n].feature);
      CHECK(ta.nodes[n].threshold == tb.nodes[n].threshold);
      CHECK(ta.nodes[n].counts == tb.nodes[n].counts);
    }
  }
}

TEST_CASE("vote fractions, ensemble labels and cached votes agree") {
  std::mt19937_64 eng(64);
  const auto train = oracle::random_labeled(eng, 80, 2, 3, 1.5);
  const auto points = oracle::random_labeled(eng, 1000, 2, 3, 2.5).without_labels();
  const auto model = fit_ensemble(train, &points, config(6, KnnSpec{5}), RngStream(5));
  const RngStream rng(6);
  const auto table = vote_table(model, points, rng);
  REQUIRE(table.members() == 6);
  REQUIRE(table.points() == points.rows());
  const auto majority = table.majority();
  const auto first_three = table.majority(3);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const RngStream point = rng.derive(i);
    const auto frac = vote_fraction(model, points.row(i), point);
    const auto label = predict_ensemble(model, points.row(i), point);
    CHECK(label == static_cast<Label>(argmax_first(frac) + 1));

    const auto votes = member_votes(model, points.row(i), point);
    std::vector<Label> column;
    for (std::size_t b = 0; b < 6; ++b) column.push_back(table.votes[b][i]);
    CHECK(column == votes);
    CHECK(majority[i] == oracle::plurality(column, 3));
    CHECK(first_three[i] == oracle::plurality({column[0], column[1], column[2]}, 3));
    CHECK(table.fraction(i) == frac);
  }
}

TEST_CASE("an odd two-class ensemble never ties") {
  std::mt19937_64 eng(65);
  const auto train = oracle::random_labeled(eng, 60, 2, 2, 1.5);
  const auto points = oracle::random_labeled(eng, 300, 2, 2, 2.0).without_labels();
  const auto model = fit_ensemble(train, &points, config(5, TreeSpec{}, EnsembleMode::kClassicalBootstrap), RngStream(7));
  const auto table = vote_table(model, points, RngStream(8));
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto f = table.fraction(i);
    CHECK(f[0] != f[1]);
  }
}

TEST_CASE("member fitting is independent of the thread count") {
  std::mt19937_64 eng(66);
  const auto train = oracle::random_labeled(eng, 60, 3, 2);
  const auto test = oracle::random_labeled(eng, 40, 3, 2).without_labels();
  auto cfg = config(8, TreeSpec{});
  const auto serial = fit_ensemble(train, &test, cfg, RngStream(9));
  cfg.threads = 4;
  const auto threaded = fit_ensemble(train, &test, cfg, RngStream(9));
  CHECK(vote_table(serial, test, RngStream(1)).votes == vote_table(threaded, test, RngStream(1)).votes);
  for (std::size_t b = 0; b < 8; ++b) CHECK(serial.traces[b].proportions == threaded.traces[b].proportions);
}

TEST_CASE("a replicate that collapses to one class still fits") {
  const auto train = column({0, 0.1, 0.2, 0.3, 10, 10.1, 10.2, 10.3}, {1, 1, 1, 1, 2, 2, 2, 2});
  const auto test = column({0.05, 0.15, 0.25, -0.1});
  auto cfg = config(3, TreeSpec{});
  cfg.resample.k = 1;
  const auto model = fit_ensemble(train, &test, cfg, RngStream(10));
  for (const auto& trace : model.traces) CHECK(trace.proportions.back() == std::vector<double>{1.0, 0.0});
  const std::vector<double> far{10.0};
  CHECK(predict_ensemble(model, far, RngStream(1)) == 1);
}

TEST_CASE("variance_vs_B degenerate cases") {
  // One distinct point per class and pure neighborhoods: every resample is the same multiset.
  const auto train = column({0, 0, 0, 0, 0, 5, 5, 5, 5, 5}, {1, 1, 1, 1, 1, 2, 2, 2, 2, 2});
  const auto test = column({0.1, -0.1, 0.2, 4.9, 5.1, 0.4, 4.8, 5.3, -0.3, 5.2}, {1, 1, 1, 2, 2, 2, 2, 2, 1, 1});
  auto cfg = config(1, TreeSpec{8, 1, 0});
  cfg.resample.k = 1;
  const auto rows = variance_vs_B(train, test, cfg, {1}, 5, RngStream(11));
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].variance);
  CHECK(*rows[0].variance == 0.0);
  CHECK(rows[0].mean_error == doctest::Approx(0.2));

  const auto single = variance_vs_B(train, test, cfg, {1, 2}, 1, RngStream(11));
  CHECK_FALSE(single[0].variance);
  CHECK_THROWS_AS(variance_vs_B(train, test, cfg, {4, 2}, 3, RngStream(11)), UsageError);
  CHECK_THROWS_AS(variance_vs_B(train, test, cfg, {}, 3, RngStream(11)), UsageError);
}
