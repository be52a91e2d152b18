#include "dabag/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dabag/error.hpp"

namespace dabag {

namespace {

// Keeps `need` of the rows tied at the cut-off distance, chosen uniformly.
void take_tied(std::vector<std::size_t>& tied, std::size_t need, const RngStream& tie_rng) {
  if (tied.size() > need) {
    auto gen = tie_rng.generator();
    gen.shuffle(std::span<std::size_t>(tied));
    tied.resize(need);
  }
}

}  // namespace

NeighborSet k_nearest(std::span<const double> query, const Dataset& ref, std::size_t k,
                      const Metric& metric, const RngStream& tie_rng) {
  if (k == 0) throw UsageError("k_nearest: k must be at least 1");
  const std::size_t n = ref.rows();
  const std::size_t p = ref.dim();
  if (query.size() != p) {
    throw DataError("k_nearest: query has dimension " + std::to_string(query.size()) + ", reference has " +
                    std::to_string(p));
  }
  if (metric.is_standardized() && metric.inverse_scale().size() != p) {
    throw DataError("k_nearest: metric was standardized for a different dimension");
  }

  NeighborSet out;
  if (k > n) {
    k = n;
    out.k_clamped = true;
  }

  const double* base = ref.features().data();
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = metric.squared_unchecked(query.data(), base + i * p, p);

  double cutoff = 0.0;
  if (k == 1) {
    cutoff = *std::min_element(sq.begin(), sq.end());
  } else if (k == n) {
    cutoff = *std::max_element(sq.begin(), sq.end());
  } else {
    std::vector<double> scratch = sq;
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1), scratch.end());
    cutoff = scratch[k - 1];
  }

  std::vector<std::size_t> closer;
  std::vector<std::size_t> tied;
  closer.reserve(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (sq[i] < cutoff) {
      closer.push_back(i);
    } else if (sq[i] == cutoff) {
      tied.push_back(i);
    }
  }
  if (closer.size() >= k || closer.size() + tied.size() < k) {
    throw InvariantError("k_nearest: selection count inconsistent with cut-off distance");
  }
  std::stable_sort(closer.begin(), closer.end(),
                   [&](std::size_t a, std::size_t b) { return sq[a] < sq[b]; });
  take_tied(tied, k - closer.size(), tie_rng);

  out.indices = std::move(closer);
  out.indices.insert(out.indices.end(), tied.begin(), tied.end());
  out.distances.reserve(k);
  for (std::size_t i : out.indices) out.distances.push_back(std::sqrt(sq[i]));
  return out;
}

ClassWeights class_weights_from(const NeighborSet& neighbors, const Dataset& ref) {
  const auto& ys = ref.labels();
  ClassWeights cw;
  cw.weights.assign(static_cast<std::size_t>(ref.n_classes()), 0.0);
  if (neighbors.indices.empty()) throw InvariantError("class weights from an empty neighbor set");
  for (std::size_t i : neighbors.indices) cw.weights[static_cast<std::size_t>(ys[i] - 1)] += 1.0;
  const double k = static_cast<double>(neighbors.indices.size());
  for (double& w : cw.weights) w /= k;
  return cw;
}

ClassWeights class_weights(std::span<const double> query, const Dataset& ref, std::size_t k,
                           const Metric& metric, const RngStream& tie_rng) {
  if (!ref.has_labels()) throw UsageError("class_weights requires a labeled reference dataset");
  return class_weights_from(k_nearest(query, ref, k, metric, tie_rng), ref);
}

}  // namespace dabag
