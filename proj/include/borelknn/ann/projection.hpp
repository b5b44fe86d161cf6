#pragma once

// Random Bernoulli matrices over GF(2) mapping the Hamming cube {0,1}^D to a
// cube of dimension k' = ceil(C eps^-2 log2 n).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "borelknn/core/bitstring.hpp"
#include "borelknn/core/error.hpp"
#include "borelknn/core/random.hpp"

namespace borelknn {

struct AnnParams {
  /// Approximation factor of the (k, c) query.
  double c = 0.5;
  /// Projection distortion; 0 selects c / 4.
  double epsilon = 0.0;
  double delta = 0.1;
  /// Independent draws per range; 0 selects ceil(log2(1/delta)).
  std::size_t repeats = 0;
  /// Constant of the target dimension k' = ceil(C eps^-2 log2 n).
  double const_c = 4.0;

  /// Copy with the defaults filled in and ranges checked.
  AnnParams resolved() const {
    AnnParams p = *this;
    detail::require(p.c > 0.0, "ann: c must be positive");
    if (p.epsilon == 0.0) p.epsilon = p.c / 4.0;
    detail::require(p.epsilon > 0.0 && p.epsilon < 1.0, "ann: epsilon must lie in (0,1)");
    detail::require(p.delta > 0.0 && p.delta < 1.0, "ann: delta must lie in (0,1)");
    detail::require(p.const_c > 0.0, "ann: constant C must be positive");
    if (p.repeats == 0)
      p.repeats = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log2(1.0 / p.delta))));
    return p;
  }
};

/// Target dimension ceil(C eps^-2 log2 n), at least 1.
inline std::size_t projected_dimension(std::size_t n, const AnnParams& params) {
  detail::require(n >= 1, "ann: n must be positive");
  AnnParams p = params.resolved();
  double cols = std::ceil(p.const_c / (p.epsilon * p.epsilon) * std::log2(static_cast<double>(n)));
  return std::max<std::size_t>(1, static_cast<std::size_t>(cols));
}

/// D x k' matrix over GF(2), stored row by row.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols, std::size_t range = 0, Seed seed = {})
      : rows_(rows), cols_(cols), row_words_((cols + 63) / 64), range_(range), seed_(seed),
        bits_(rows * row_words_, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t row_words() const { return row_words_; }
  std::size_t range() const { return range_; }
  Seed seed() const { return seed_; }

  bool get(std::size_t r, std::size_t c) const { return (bits_[r * row_words_ + (c >> 6)] >> (c & 63)) & 1U; }
  void set(std::size_t r, std::size_t c) { bits_[r * row_words_ + (c >> 6)] |= std::uint64_t{1} << (c & 63); }

  std::span<const std::uint64_t> row(std::size_t r) const { return {bits_.data() + r * row_words_, row_words_}; }
  const std::vector<std::uint64_t>& raw() const { return bits_; }
  std::vector<std::uint64_t>& raw() { return bits_; }

  std::size_t ones() const {
    std::size_t total = 0;
    for (auto w : bits_) total += static_cast<std::size_t>(std::popcount(w));
    return total;
  }

  static BinaryMatrix identity(std::size_t n) {
    BinaryMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i);
    return m;
  }

  friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t row_words_ = 0;
  std::size_t range_ = 0;
  Seed seed_{};
  std::vector<std::uint64_t> bits_;
};

/// Matrix for range `range` with i.i.d. Bernoulli(1/range) entries. Ones are
/// placed by geometric gap sampling in row-major order.
inline BinaryMatrix sample_projection(std::size_t source_dim, std::size_t n, std::size_t range,
                                      const AnnParams& params, Seed seed) {
  detail::require(source_dim >= 1, "ann: source dimension must be positive");
  detail::require(range >= 1 && range <= source_dim,
                  "ann: range " + std::to_string(range) + " outside [1, " + std::to_string(source_dim) + "]");
  const std::size_t cols = projected_dimension(n, params);
  BinaryMatrix m(source_dim, cols, range, seed);
  const double p = 1.0 / static_cast<double>(range);
  const std::size_t total = source_dim * cols;
  SplitMix64 gen(seed);
  std::size_t pos = 0;
  for (;;) {
    std::uint64_t gap = gen.geometric(p);
    if (gap >= total - pos) break;
    pos += gap;
    m.set(pos / cols, pos % cols);
    if (++pos >= total) break;
  }
  return m;
}

/// x * M over GF(2): the XOR of the rows selected by the set bits of x.
inline BitString project(const BinaryMatrix& m, const BitString& x) {
  detail::require(x.size() == m.rows(), "project: vector length " + std::to_string(x.size()) +
                                            " does not match matrix rows " + std::to_string(m.rows()));
  BitString out(m.cols());
  auto& acc = out.words();
  const auto& xw = x.words();
  for (std::size_t w = 0; w < xw.size(); ++w) {
    std::uint64_t bits = xw[w];
    while (bits) {
      const std::size_t r = w * 64 + static_cast<std::size_t>(std::countr_zero(bits));
      bits &= bits - 1;
      auto row = m.row(r);
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] ^= row[j];
    }
  }
  return out;
}

/// Projects many vectors at once with the method of four Russians: for each
/// block of 8 rows, all 256 row combinations are tabulated and each input
/// byte selects one.
inline std::vector<BitString> project_all(const BinaryMatrix& m, std::span<const BitString> xs) {
  const std::size_t rw = m.row_words();
  std::vector<BitString> out(xs.size(), BitString(m.cols()));
  for (const auto& x : xs)
    detail::require(x.size() == m.rows(), "project: vector length does not match matrix rows");
  std::vector<std::uint64_t> table(256 * rw);
  for (std::size_t block = 0; block * 8 < m.rows(); ++block) {
    const std::size_t base = block * 8;
    const std::size_t height = std::min<std::size_t>(8, m.rows() - base);
    std::fill(table.begin(), table.begin() + static_cast<std::ptrdiff_t>(rw), 0);
    for (std::size_t combo = 1; combo < (std::size_t{1} << height); ++combo) {
      const auto low = static_cast<std::size_t>(std::countr_zero(combo));
      const std::size_t prev = combo & (combo - 1);
      auto row = m.row(base + low);
      for (std::size_t j = 0; j < rw; ++j) table[combo * rw + j] = table[prev * rw + j] ^ row[j];
    }
    const std::size_t word = base / 64;
    const unsigned shift = static_cast<unsigned>(base % 64);
    const std::uint64_t mask = (std::uint64_t{1} << height) - 1;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const std::size_t combo = (xs[i].words()[word] >> shift) & mask;
      if (combo == 0) continue;
      auto& acc = out[i].words();
      const std::uint64_t* src = table.data() + combo * rw;
      for (std::size_t j = 0; j < rw; ++j) acc[j] ^= src[j];
    }
  }
  return out;
}

/// Probability that one projected bit differs for a pair at Hamming distance
/// h under Bernoulli(1/range) entries: (1 - (1 - 2/range)^h) / 2.
inline double projected_flip_probability(double h, std::size_t range) {
  if (h <= 0.0) return 0.0;
  const double base = 1.0 - 2.0 / static_cast<double>(range);
  if (base <= 0.0) {
    if (range == 2) return 0.5;
    // range 1: every entry is 1, so the bit is the parity of h.
    return std::fmod(std::round(h), 2.0) == 1.0 ? 1.0 : 0.0;
  }
  return (1.0 - std::pow(base, h)) / 2.0;
}

/// Image-space radius separating pairs at distance range/2 from pairs at
/// distance (1 + eps) range/2: the midpoint of their expected projected
/// distances.
///
/// Ranges 1 and 2 cannot tell scales apart: the all-ones matrix only sees the
/// parity of h, and at range 2 every h >= 1 flips a bit with probability 1/2.
/// Range 2 is therefore the exact-match scale (radius 0) and the ball of range
/// 1 is empty, so the range search never settles on a parity class.
inline double image_radius(std::size_t range, std::size_t cols, double eps) {
  const double r = static_cast<double>(range);
  if (range == 1) return -1.0;
  if (range == 2) return 0.0;
  const double near = projected_flip_probability(r / 2.0, range);
  const double far = projected_flip_probability((1.0 + eps) * r / 2.0, range);
  return static_cast<double>(cols) * (near + far) / 2.0;
}

}  // namespace borelknn
