#pragma once

#include <span>
#include <vector>

#include "dabag/dataset.hpp"
#include "dabag/metric.hpp"
#include "dabag/rng.hpp"

namespace dabag {

// Exact k nearest rows of a reference dataset, nearest first.
struct NeighborSet {
  std::vector<std::size_t> indices;
  std::vector<double> distances;
  // Set when k exceeded the reference size and was reduced to it.
  bool k_clamped = false;
};

// Per-query class weights: entry l - 1 is the fraction of the k neighbors with
// label l. Always a multiple of 1/k.
struct ClassWeights {
  std::vector<double> weights;
};

// Brute-force search over every reference row. When several rows tie at the
// k-th distance, the ones kept are chosen by a uniform shuffle drawn from
// `tie_rng`; rows strictly closer are always kept. The generator is only
// consulted when such a tie actually occurs.
NeighborSet k_nearest(std::span<const double> query, const Dataset& ref, std::size_t k,
                      const Metric& metric, const RngStream& tie_rng);

ClassWeights class_weights(std::span<const double> query, const Dataset& ref, std::size_t k,
                           const Metric& metric, const RngStream& tie_rng);

// Tally of neighbor labels scaled by 1/|neighbors|.
ClassWeights class_weights_from(const NeighborSet& neighbors, const Dataset& ref);

}  // namespace dabag
