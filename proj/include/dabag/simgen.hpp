#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dabag/dataset.hpp"
#include "dabag/gaussian_mixture.hpp"
#include "dabag/rng.hpp"

namespace dabag {

enum class Scenario { kToy3, kSetting1, kSetting2 };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

struct ScenarioSpec {
  Scenario scenario = Scenario::kSetting1;
  std::size_t n_train = 500;
  std::size_t n_test = 500;
  // Test proportions among the non-anomalous rows; sums to 1. The full test
  // mixture is (1 - epsilon_out) * q plus epsilon_out anomalies.
  std::vector<double> q = {0.5, 0.5};
  double epsilon_out = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GroundTruth {
  Dataset train;
  // Test features only; labels below are for scoring.
  Dataset test;
  // Class id per test row, 0 for injected anomalies.
  std::vector<Label> test_labels;
  std::vector<bool> anomaly;
  GaussianMixtureOracle train_oracle;
  // Inlier part of the test distribution.
  GaussianMixtureOracle test_oracle;
  std::optional<Gaussian> anomaly_density;
};

// Splits `total` into integer counts proportional to `weights` (largest
// remainder, ties to the lower index).
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights);

// Generic label-shift generator: training counts apportioned by train_p, test
// counts by ((1 - epsilon_out) * test_q, epsilon_out), rows in random order.
GroundTruth gen_mixture(std::vector<ClassDensity> classes, std::vector<double> train_p, std::vector<double> test_q,
                        double epsilon_out, std::optional<Gaussian> anomaly, std::size_t n, std::size_t m,
                        const RngStream& rng);

// Uniformly random orthogonal matrix: QR of a Gaussian matrix with the signs of
// R's diagonal moved into Q.
Eigen::MatrixXd haar_rotation(std::size_t p, const RngStream& rng);

// Three 2-d Gaussians at (1,1), (1,4), (1,7), unit variances and 0.2
// covariance; training classes balanced.
GroundTruth gen_toy3(std::size_t n, std::size_t m, const std::vector<double>& q, const RngStream& rng);

// Sparse class boundaries in p = 10: each class a symmetric pair of unit
// Gaussians at +-(2,-2,0,...) or +-(2,2,0,...). Anomalies ~ N((4,4,0,...),
// diag(0.5,0.5,1,...)).
GroundTruth gen_setting1(std::size_t n, std::size_t m, double q1, double epsilon_out, const RngStream& rng);

// Rotated sparse normal in p = 10 with a Haar rotation fixed per call.
// Anomalies ~ N(R (0,0,2,2,0,...), I).
GroundTruth gen_setting2(std::size_t n, std::size_t m, double q1, double epsilon_out, const RngStream& rng);

GroundTruth generate(const ScenarioSpec& spec, const RngStream& rng);
inline GroundTruth generate(const ScenarioSpec& spec) { return generate(spec, RngStream(spec.seed)); }

// Class densities used by the generators, exposed for oracle checks.
std::vector<ClassDensity> setting1_classes();
std::vector<ClassDensity> setting2_classes(const Eigen::MatrixXd& rotation);
// diag(d) + 0.5 * 1 1^T of the given size.
Eigen::MatrixXd equicorrelated_block(std::size_t size, double diagonal);

}  // namespace dabag
