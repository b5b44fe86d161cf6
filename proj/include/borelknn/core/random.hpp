#pragma once

// Deterministic randomness.
//
// Every stochastic routine in the library takes an explicit Seed. The
// generator is SplitMix64 (Steele, Lea & Flood 2014), which is counter-based:
// output i of stream s is mix(s + (i + 1) * golden). That makes it cheap to
// derive independent sub-streams from (master seed, tag, ordinal) tuples and
// to evaluate random ranks lazily, without materializing permutations.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace borelknn {

struct Seed {
  std::uint64_t value = 0;

  friend bool operator==(Seed, Seed) = default;
};

namespace rng {

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for the sub-stream identified by (tag, ordinal).
constexpr Seed derive(Seed parent, std::uint64_t tag, std::uint64_t ordinal = 0) {
  std::uint64_t s = mix64(parent.value ^ mix64(tag + golden_gamma));
  return Seed{mix64(s + (ordinal + 1) * golden_gamma)};
}

/// Random 64-bit rank of `item` under the permutation keyed by `seed`.
/// Sorting items by (rank, item) yields a uniformly random order.
constexpr std::uint64_t rank(Seed seed, std::uint64_t item) {
  return mix64(seed.value + (item + 1) * golden_gamma);
}

// Stream tags used across modules.
inline constexpr std::uint64_t tag_neighbor_ties = 1;
inline constexpr std::uint64_t tag_label_ties = 2;
inline constexpr std::uint64_t tag_folds = 3;
inline constexpr std::uint64_t tag_projection = 4;
inline constexpr std::uint64_t tag_sample_x = 5;
inline constexpr std::uint64_t tag_sample_y = 6;
inline constexpr std::uint64_t tag_query = 7;
inline constexpr std::uint64_t tag_trial = 8;

}  // namespace rng

/// SplitMix64 stream. Satisfies UniformRandomBitGenerator, but the helpers
/// below are used instead of <random> distributions, whose output differs
/// across standard library implementations.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(Seed seed) : state_(seed.value) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    state_ += rng::golden_gamma;
    return rng::mix64(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1].
  double uniform_open_left() { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) return 0;
    for (;;) {
      unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
      auto low = static_cast<std::uint64_t>(m);
      if (low >= bound || low >= (-bound) % bound) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal by the Box-Muller transform, cached in pairs.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform_open_left();
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Number of failures before the first success of Bernoulli(p) trials.
  std::uint64_t geometric(double p) {
    if (p >= 1.0) return 0;
    double g = std::floor(std::log(uniform_open_left()) / std::log1p(-p));
    return g >= 1.8e19 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(g);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Fisher-Yates permutation of 0..n-1.
inline std::vector<std::size_t> random_permutation(std::size_t n, Seed seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  SplitMix64 gen(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = gen.below(i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace borelknn
