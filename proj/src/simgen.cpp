#include "dabag/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dabag/error.hpp"

namespace dabag {

namespace {

constexpr std::size_t kSettingDim = 10;

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

Vector sparse_vector(std::initializer_list<double> head, std::size_t p) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(p));
  Eigen::Index i = 0;
  for (double x : head) v[i++] = x;
  return v;
}

void check_simplex(const std::vector<double>& q, std::size_t classes, const char* what) {
  if (q.size() != classes) throw UsageError(std::string(what) + ": q must have one entry per class");
  double total = 0.0;
  for (double v : q) {
    if (!(v >= 0.0)) throw UsageError(std::string(what) + ": q entries must be non-negative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw UsageError(std::string(what) + ": q must sum to 1");
}

// Draws the rows of each block from its sampler, then shuffles row order.
template <typename Sampler>
void fill_blocks(const std::vector<std::size_t>& counts, std::size_t p, Generator& gen, Sampler&& sample_block,
                 Matrix& x, std::vector<Label>& tags) {
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  x.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(p));
  tags.resize(total);
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  gen.shuffle(std::span<std::size_t>(order));
  std::size_t next = 0;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    for (std::size_t r = 0; r < counts[b]; ++r) {
      const std::size_t row = order[next++];
      tags[row] = static_cast<Label>(b);
      sample_block(b, std::span<double>(x.data() + row * p, p));
    }
  }
}

}  // namespace

GroundTruth gen_mixture(std::vector<ClassDensity> classes, std::vector<double> train_p, std::vector<double> test_q,
                        double epsilon_out, std::optional<Gaussian> anomaly, std::size_t n, std::size_t m,
                        const RngStream& rng) {
  if (n < 1 || m < 1) throw UsageError("scenario: n_train and n_test must be at least 1");
  if (!(epsilon_out >= 0.0 && epsilon_out < 1.0)) throw UsageError("scenario: epsilon_out must lie in [0, 1)");
  if (classes.empty()) throw UsageError("scenario: no classes");
  check_simplex(test_q, classes.size(), "scenario");
  const std::size_t L = classes.size();
  const std::size_t p = classes.front().dim();

  GaussianMixtureOracle train_oracle(train_p, classes);
  GaussianMixtureOracle test_oracle(test_q, std::move(classes));

  const RngStream data = rng.derive(Purpose::kData);

  // Training rows.
  Matrix xtr;
  std::vector<Label> ytr;
  {
    auto gen = data.derive(1).generator();
    fill_blocks(apportion(n, train_p), p, gen,
                [&](std::size_t b, std::span<double> out) { train_oracle.classes()[b].sample(gen, out); }, xtr, ytr);
    for (auto& y : ytr) y += 1;
  }

  // Test rows: L inlier blocks plus one anomaly block.
  std::vector<double> test_weights;
  for (double q : test_q) test_weights.push_back((1.0 - epsilon_out) * q);
  test_weights.push_back(epsilon_out);
  const auto test_counts = apportion(m, test_weights);
  if (test_counts.back() > 0 && !anomaly) throw UsageError("scenario: anomalies requested without an anomaly model");

  Matrix xte;
  std::vector<Label> blocks;
  {
    auto gen = data.derive(2).generator();
    fill_blocks(test_counts, p, gen,
                [&](std::size_t b, std::span<double> out) {
                  if (b < L) {
                    test_oracle.classes()[b].sample(gen, out);
                  } else {
                    anomaly->sample(gen, out);
                  }
                },
                xte, blocks);
  }

  std::vector<Label> test_labels(blocks.size());
  std::vector<bool> flags(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const bool is_anomaly = static_cast<std::size_t>(blocks[i]) == L;
    flags[i] = is_anomaly;
    test_labels[i] = is_anomaly ? 0 : blocks[i] + 1;
  }

  const int n_classes = static_cast<int>(L);
  Dataset train(std::move(xtr), std::move(ytr), n_classes);
  return GroundTruth{std::move(train),          Dataset(std::move(xte)), std::move(test_labels), std::move(flags),
                     std::move(train_oracle), std::move(test_oracle),   std::move(anomaly)};
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kToy3:
      return "toy3";
    case Scenario::kSetting1:
      return "setting1";
    case Scenario::kSetting2:
      return "setting2";
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "toy3") return Scenario::kToy3;
  if (name == "setting1") return Scenario::kSetting1;
  if (name == "setting2") return Scenario::kSetting2;
  throw UsageError("unknown scenario '" + name + "' (expected toy3, setting1 or setting2)");
}

void ScenarioSpec::validate() const {
  const std::size_t classes = scenario == Scenario::kToy3 ? 3 : 2;
  check_simplex(q, classes, "scenario");
  if (n_train < 1 || n_test < 1) throw UsageError("scenario: n_train and n_test must be at least 1");
  if (!(epsilon_out >= 0.0 && epsilon_out < 1.0)) throw UsageError("scenario: epsilon_out must lie in [0, 1)");
  if (scenario == Scenario::kToy3 && epsilon_out > 0.0) {
    throw UsageError("scenario: toy3 has no anomaly model");
  }
}

std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw UsageError("apportion: negative weight");
    sum += w;
  }
  if (!(sum > 0.0)) throw UsageError("apportion: weights sum to zero");
  std::vector<std::size_t> counts(weights.size());
  std::vector<double> remainder(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / sum;
    // Guard against 0.1 * 500 evaluating to 49.999...
    const double floor = std::floor(exact + 1e-9);
    counts[i] = static_cast<std::size_t>(floor);
    remainder[i] = exact - floor;
    assigned += counts[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++counts[order[i % order.size()]];
  return counts;
}

Eigen::MatrixXd haar_rotation(std::size_t p, const RngStream& rng) {
  if (p < 1) throw UsageError("haar_rotation: p must be at least 1");
  auto gen = rng.generator();
  const auto n = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = gen.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Eigen::MatrixXd equicorrelated_block(std::size_t size, double diagonal) {
  const auto s = static_cast<Eigen::Index>(size);
  Eigen::MatrixXd b = Eigen::MatrixXd::Constant(s, s, 0.5);
  b.diagonal().array() += diagonal;
  return b;
}

std::vector<ClassDensity> setting1_classes() {
  const std::size_t p = kSettingDim;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(p, p);
  const Vector mu0 = sparse_vector({2.0, -2.0}, p);
  const Vector mu1 = sparse_vector({2.0, 2.0}, p);
  std::vector<ClassDensity> classes;
  classes.emplace_back(std::vector<MixtureComponent>{{0.5, Gaussian(mu0, identity)}, {0.5, Gaussian(-mu0, identity)}});
  classes.emplace_back(std::vector<MixtureComponent>{{0.5, Gaussian(mu1, identity)}, {0.5, Gaussian(-mu1, identity)}});
  return classes;
}

std::vector<ClassDensity> setting2_classes(const Eigen::MatrixXd& rotation) {
  const std::size_t p = kSettingDim;
  const auto n = static_cast<Eigen::Index>(p);
  if (rotation.rows() != n || rotation.cols() != n) throw UsageError("setting2: rotation must be 10 x 10");

  Eigen::MatrixXd sigma0 = Eigen::MatrixXd::Zero(n, n);
  sigma0.topLeftCorner(3, 3) = equicorrelated_block(3, 1.5);
  sigma0.bottomRightCorner(n - 3, n - 3) = equicorrelated_block(p - 3, 0.5);
  // The second block of the class-2 covariance has the same form as the first
  // block of class 1, at size p - 3.
  Eigen::MatrixXd sigma1 = Eigen::MatrixXd::Zero(n, n);
  sigma1.topLeftCorner(3, 3) = equicorrelated_block(3, 0.5);
  sigma1.bottomRightCorner(n - 3, n - 3) = equicorrelated_block(p - 3, 1.5);

  const Vector mu0 = sparse_vector({1.0, 1.0, 1.0}, p);
  const Vector mu1 = Vector::Zero(n);

  std::vector<ClassDensity> classes;
  classes.emplace_back(std::vector<MixtureComponent>{
      {1.0, Gaussian(rotation * mu0, symmetrize(rotation * sigma0 * rotation.transpose()))}});
  classes.emplace_back(std::vector<MixtureComponent>{
      {1.0, Gaussian(rotation * mu1, symmetrize(rotation * sigma1 * rotation.transpose()))}});
  return classes;
}

GroundTruth gen_toy3(std::size_t n, std::size_t m, const std::vector<double>& q, const RngStream& rng) {
  check_simplex(q, 3, "gen_toy3");
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, 0.2, 0.2, 1.0;
  std::vector<ClassDensity> classes;
  for (double y : {1.0, 4.0, 7.0}) {
    Vector mean(2);
    mean << 1.0, y;
    classes.emplace_back(std::vector<MixtureComponent>{{1.0, Gaussian(mean, sigma)}});
  }
  return gen_mixture(std::move(classes), {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, q, 0.0, std::nullopt, n, m, rng);
}

GroundTruth gen_setting1(std::size_t n, std::size_t m, double q1, double epsilon_out, const RngStream& rng) {
  if (!(q1 >= 0.0 && q1 <= 1.0)) throw UsageError("gen_setting1: q1 must lie in [0, 1]");
  const std::size_t p = kSettingDim;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(p, p);
  cov(0, 0) = 0.5;
  cov(1, 1) = 0.5;
  Gaussian anomaly(sparse_vector({4.0, 4.0}, p), cov);
  return gen_mixture(setting1_classes(), {0.5, 0.5}, {q1, 1.0 - q1}, epsilon_out, std::move(anomaly), n, m, rng);
}

GroundTruth gen_setting2(std::size_t n, std::size_t m, double q1, double epsilon_out, const RngStream& rng) {
  if (!(q1 >= 0.0 && q1 <= 1.0)) throw UsageError("gen_setting2: q1 must lie in [0, 1]");
  const std::size_t p = kSettingDim;
  const Eigen::MatrixXd rotation = haar_rotation(p, rng.derive(Purpose::kData).derive(3));
  Gaussian anomaly(rotation * sparse_vector({0.0, 0.0, 2.0, 2.0}, p), Eigen::MatrixXd::Identity(p, p));
  return gen_mixture(setting2_classes(rotation), {0.5, 0.5}, {q1, 1.0 - q1}, epsilon_out, std::move(anomaly), n, m,
                  rng);
}

GroundTruth generate(const ScenarioSpec& spec, const RngStream& rng) {
  spec.validate();
  switch (spec.scenario) {
    case Scenario::kToy3:
      return gen_toy3(spec.n_train, spec.n_test, spec.q, rng);
    case Scenario::kSetting1:
      return gen_setting1(spec.n_train, spec.n_test, spec.q[0], spec.epsilon_out, rng);
    case Scenario::kSetting2:
      return gen_setting2(spec.n_train, spec.n_test, spec.q[0], spec.epsilon_out, rng);
  }
  throw InvariantError("unhandled scenario");
}

}  // namespace dabag
