#include "dabag/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dabag/error.hpp"

namespace dabag {

void AnomalyConfig::validate() const {
  if (k < 1) throw UsageError("anomaly: k must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("anomaly: alpha must lie in (0, 1)");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw UsageError("anomaly: split_fraction must lie in (0, 1)");
}

double dtm_hat(std::span<const double> x, const Dataset& class_data, std::size_t k, const Metric& metric,
               bool* k_clamped) {
  if (k < 1) throw UsageError("dtm_hat: k must be at least 1");
  const std::size_t n = class_data.rows();
  const std::size_t p = class_data.dim();
  if (x.size() != p) throw DataError("dtm_hat: point dimension mismatch");
  if (k_clamped != nullptr) *k_clamped = k > n;
  k = std::min(k, n);

  std::vector<double> sq(n);
  const double* base = class_data.features().data();
  for (std::size_t i = 0; i < n; ++i) sq[i] = metric.squared_unchecked(x.data(), base + i * p, p);
  if (k < n) std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(k - 1), sq.end());
  std::sort(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(k));
  const double total = std::accumulate(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
  return std::sqrt(total / static_cast<double>(k));
}

double upper_quantile(std::vector<double> scores, double alpha) {
  if (scores.empty()) throw UsageError("upper_quantile: no scores");
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("upper_quantile: alpha must lie in (0, 1)");
  const double n = static_cast<double>(scores.size());
  // The small offset keeps (1 - 0.1) * 100 at order statistic 90.
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, scores.size());
  std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(rank - 1), scores.end());
  return scores[rank - 1];
}

AnomalyCalibration calibrate(const Dataset& train, const AnomalyConfig& cfg, const RngStream& rng) {
  cfg.validate();
  if (!train.has_labels()) throw UsageError("calibrate: training data must be labeled");
  const auto groups = train.rows_by_class();
  AnomalyCalibration cal;
  cal.config = cfg;
  const RngStream split_root = rng.derive(Purpose::kSplit);

  for (std::size_t l = 0; l < groups.size(); ++l) {
    std::vector<std::size_t> rows = groups[l];
    const std::size_t n = rows.size();
    if (n < 2 * (cfg.k + 1)) {
      throw UsageError("calibrate: class '" + train.label_names()[l] + "' has " + std::to_string(n) +
                       " rows; at least " + std::to_string(2 * (cfg.k + 1)) + " are needed for k = " +
                       std::to_string(cfg.k));
    }
    // Canonical order first so the split depends on the rows, not their positions.
    std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      const auto ra = train.row(a), rb = train.row(b);
      return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    auto gen = split_root.derive(l + 1).generator();
    gen.shuffle(std::span<std::size_t>(rows));
    auto n_first = static_cast<std::size_t>(std::llround(cfg.split_fraction * static_cast<double>(n)));
    n_first = std::clamp<std::size_t>(n_first, 1, n - cfg.k);

    const std::span<const std::size_t> first(rows.data(), n_first);
    const std::span<const std::size_t> second(rows.data() + n_first, n - n_first);
    const Dataset reference = train.subset(second);
    std::vector<double> scores;
    scores.reserve(n_first);
    for (std::size_t i : first) scores.push_back(dtm_hat(train.row(i), reference, cfg.k, cfg.metric));

    cal.thresholds.push_back(upper_quantile(std::move(scores), cfg.alpha));
    cal.calibration_sizes.push_back(n_first);
    cal.reference_sizes.push_back(n - n_first);
    cal.reference_rows.emplace_back(second.begin(), second.end());
  }
  return cal;
}

DtmScorer::DtmScorer(const Dataset& train, AnomalyCalibration calibration) : calibration_(std::move(calibration)) {
  const auto groups = train.rows_by_class();
  if (groups.size() != calibration_.thresholds.size()) {
    throw UsageError("DtmScorer: calibration does not match the training classes");
  }
  for (std::size_t l = 0; l < groups.size(); ++l) {
    if (groups[l].empty()) throw DataError("DtmScorer: class '" + train.label_names()[l] + "' has no rows");
    classes_.push_back(train.subset(groups[l]));
  }
}

std::vector<double> DtmScorer::scores(std::span<const double> x) const {
  std::vector<double> out;
  out.reserve(classes_.size());
  for (const auto& c : classes_) out.push_back(dtm_hat(x, c, calibration_.config.k, calibration_.config.metric));
  return out;
}

int DtmScorer::statistic(std::span<const double> x) const {
  const auto s = scores(x);
  for (std::size_t l = 0; l < s.size(); ++l) {
    if (!(s[l] > calibration_.thresholds[l])) return 0;
  }
  return 1;
}

int test_statistic(std::span<const double> x, const Dataset& train, const AnomalyCalibration& cal) {
  return DtmScorer(train, cal).statistic(x);
}

AnomalyPartition filter_anomalies(const Matrix& test, const Dataset& train, const AnomalyCalibration& cal) {
  AnomalyPartition out;
  if (test.rows() == 0) return out;
  if (static_cast<std::size_t>(test.cols()) != train.dim()) throw DataError("filter_anomalies: dimension mismatch");
  const DtmScorer scorer(train, cal);
  const std::size_t p = train.dim();
  for (std::size_t i = 0; i < static_cast<std::size_t>(test.rows()); ++i) {
    const std::span<const double> x(test.data() + i * p, p);
    auto s = scorer.scores(x);
    bool flagged = true;
    for (std::size_t l = 0; l < s.size(); ++l) flagged = flagged && s[l] > cal.thresholds[l];
    (flagged ? out.anomalies : out.inliers).push_back(i);
    out.scores.push_back(std::move(s));
  }
  return out;
}

}  // namespace dabag
