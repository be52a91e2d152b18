#include "dabag/metric.hpp"

#include <cmath>

#include "dabag/error.hpp"

namespace dabag {

Metric Metric::standardized(const Dataset& train) {
  Metric m;
  const auto& x = train.features();
  const double n = static_cast<double>(x.rows());
  m.inv_scale_.resize(train.dim());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    const double var = (x.col(j).array() - mean).square().sum() / std::max(1.0, n - 1.0);
    const double sd = std::sqrt(var);
    m.inv_scale_[static_cast<std::size_t>(j)] = sd > 0.0 ? 1.0 / sd : 1.0;
  }
  return m;
}

double squared_distance(std::span<const double> a, std::span<const double> b, const Metric& m) {
  if (a.size() != b.size()) {
    throw DataError("distance: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  }
  if (m.is_standardized() && m.inverse_scale().size() != a.size()) {
    throw DataError("distance: metric was standardized for a different dimension");
  }
  return m.squared_unchecked(a.data(), b.data(), a.size());
}

double distance(std::span<const double> a, std::span<const double> b, const Metric& m) {
  return std::sqrt(squared_distance(a, b, m));
}

}  // namespace dabag
