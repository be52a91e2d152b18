#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace dabag {

// Purpose tags appended to a stream path so that draws made for different
// reasons at the same (replicate, iteration, point) never share a stream.
enum class Purpose : std::uint64_t {
  kResample = 1,
  kNeighborTie = 2,
  kMultinomial = 3,
  kWithinClass = 4,
  kFit = 5,
  kPredict = 6,
  kBootstrap = 7,
  kSplit = 8,
  kData = 9,
  kVoteTie = 10,
  kEvaluation = 11,
};

// xoshiro256** seeded through splitmix64. Satisfies
// UniformRandomBitGenerator, but the helpers below are what the library uses
// so that draws are identical across standard library implementations.
class Generator {
 public:
  using result_type = std::uint64_t;

  explicit Generator(std::uint64_t key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t index(std::uint64_t n);
  // Standard normal (Marsaglia polar method).
  double normal();
  // Category index drawn from non-negative weights (need not be normalized).
  std::size_t categorical(std::span<const double> weights);
  // Multinomial(trials, weights) counts.
  std::vector<std::size_t> multinomial(std::size_t trials, std::span<const double> weights);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// A position in a tree of independent random streams. The stream identity is
// (master seed, path); deriving is pure, so any task can reconstruct its
// stream without coordination and results do not depend on scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  [[nodiscard]] RngStream derive(std::uint64_t index) const;
  [[nodiscard]] RngStream derive(Purpose purpose) const {
    return derive(static_cast<std::uint64_t>(purpose) | kPurposeBit);
  }

  [[nodiscard]] Generator generator() const { return Generator(key_); }
  [[nodiscard]] std::uint64_t key() const { return key_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  static constexpr std::uint64_t kPurposeBit = std::uint64_t{1} << 63;
  struct FromKey {};
  RngStream(FromKey, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace dabag
