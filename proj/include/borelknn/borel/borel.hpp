#pragma once

// Borel isomorphic reduction [0,1]^d -> [0,1] by bit interleaving.
//
// A point is quantized to B bits per coordinate and the bits are dealt
// round-robin, most significant first: the code is 0.a1 b1 c1 a2 b2 c2 ...
// for coordinates (a, b, c). Codes are exact unsigned integers of d*B bits,
// read as the dyadic fraction value / 2^(d*B). Truncating at B bits gives
// every lattice point a unique terminating expansion, so the map is a
// bijection between the B-bit lattice of [0,1]^d and the (d*B)-bit lattice
// of [0,1].

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "borelknn/core/dataset.hpp"
#include "borelknn/core/error.hpp"

namespace borelknn {

using BigUint = boost::multiprecision::cpp_int;

inline constexpr unsigned max_bits_per_coordinate = 62;

struct ReductionConfig {
  unsigned bits = 16;
  /// Coordinates per code; 0 means all of them (a single code per point).
  std::size_t group_size = 0;

  std::size_t effective_group(std::size_t dim) const { return group_size == 0 ? dim : group_size; }
};

struct BorelCode {
  BigUint value;
  std::uint32_t dim = 0;
  std::uint32_t bits = 0;

  std::size_t width() const { return std::size_t{dim} * bits; }

  friend bool operator==(const BorelCode&, const BorelCode&) = default;
  friend bool operator<(const BorelCode& a, const BorelCode& b) { return a.value < b.value; }
};

namespace detail {

inline void check_bits(unsigned bits) {
  require(bits >= 1 && bits <= max_bits_per_coordinate,
          "borel: bits per coordinate must be in [1, " + std::to_string(max_bits_per_coordinate) + "]");
}

inline void check_unit(double v, std::size_t i) {
  require(v >= 0.0 && v <= 1.0, "borel: coordinate " + std::to_string(i) + " = " + std::to_string(v) +
                                    " lies outside [0,1]");
}

inline bool fits_width(const BigUint& value, std::size_t width) {
  return value == 0 || boost::multiprecision::msb(value) < width;
}

}  // namespace detail

/// floor(x * 2^B), with x = 1 sent to the top level 2^B - 1.
inline std::uint64_t quantize_coordinate(double x, unsigned bits) {
  const std::uint64_t top = (std::uint64_t{1} << bits) - 1;
  auto q = static_cast<std::uint64_t>(std::floor(std::ldexp(x, static_cast<int>(bits))));
  return q > top ? top : q;
}

/// The lattice representative q / 2^B of every coordinate.
inline Point quantize(const Point& x, unsigned bits) {
  detail::check_bits(bits);
  Point out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    detail::check_unit(x[i], i);
    out[i] = std::ldexp(static_cast<double>(quantize_coordinate(x[i], bits)), -static_cast<int>(bits));
  }
  return out;
}

/// Interleaves already-quantized levels. Bit j of coordinate i (j = 0 is the
/// most significant) lands at position j*d + i counted from the top.
inline BorelCode interleave_levels(const std::vector<std::uint64_t>& levels, unsigned bits) {
  detail::check_bits(bits);
  const std::size_t d = levels.size();
  detail::require(d >= 1, "borel: empty point");
  const std::size_t width = d * bits;
  std::vector<std::uint64_t> limbs((width + 63) / 64, 0);  // least significant limb first
  for (unsigned j = 0; j < bits; ++j)
    for (std::size_t i = 0; i < d; ++i) {
      if (!((levels[i] >> (bits - 1 - j)) & 1U)) continue;
      std::size_t from_top = std::size_t{j} * d + i;
      std::size_t pos = width - 1 - from_top;
      limbs[pos / 64] |= std::uint64_t{1} << (pos % 64);
    }
  BorelCode code{0, static_cast<std::uint32_t>(d), bits};
  boost::multiprecision::import_bits(code.value, limbs.rbegin(), limbs.rend(), 64);
  return code;
}

inline std::vector<std::uint64_t> deinterleave_levels(const BorelCode& code) {
  detail::check_bits(code.bits);
  const std::size_t d = code.dim;
  const std::size_t width = code.width();
  detail::require(d >= 1, "borel: code without dimension");
  detail::require(detail::fits_width(code.value, width), "borel: code value exceeds 2^(d*B)");
  std::vector<std::uint64_t> levels(d, 0);
  for (unsigned j = 0; j < code.bits; ++j)
    for (std::size_t i = 0; i < d; ++i) {
      std::size_t pos = width - 1 - (std::size_t{j} * d + i);
      if (boost::multiprecision::bit_test(code.value, static_cast<unsigned>(pos)))
        levels[i] |= std::uint64_t{1} << (code.bits - 1 - j);
    }
  return levels;
}

inline BorelCode borel_map(const Point& x, unsigned bits) {
  detail::check_bits(bits);
  std::vector<std::uint64_t> levels(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    detail::check_unit(x[i], i);
    levels[i] = quantize_coordinate(x[i], bits);
  }
  return interleave_levels(levels, bits);
}

/// Single-code form of the map; the config must not split coordinates.
inline BorelCode borel_map(const Point& x, const ReductionConfig& cfg) {
  detail::require(cfg.effective_group(x.size()) == x.size(),
                  "borel_map: group size must equal the dimension; use grouped_reduce");
  return borel_map(x, cfg.bits);
}

/// Lattice point whose code this is: coordinate i = level_i / 2^B.
inline Point borel_inverse(const BorelCode& code) {
  auto levels = deinterleave_levels(code);
  Point out(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i)
    out[i] = std::ldexp(static_cast<double>(levels[i]), -static_cast<int>(code.bits));
  return out;
}

/// Consecutive blocks of `group_size` coordinates, each reduced separately.
inline std::vector<BorelCode> grouped_reduce(const Point& x, const ReductionConfig& cfg) {
  const std::size_t d = x.size();
  detail::require(d >= 1, "grouped_reduce: empty point");
  const std::size_t g = cfg.effective_group(d);
  detail::require(g >= 1 && g <= d, "grouped_reduce: group size must lie in [1, d]");
  std::vector<BorelCode> codes;
  codes.reserve((d + g - 1) / g);
  for (std::size_t start = 0; start < d; start += g) {
    Point block(x.begin() + static_cast<std::ptrdiff_t>(start),
                x.begin() + static_cast<std::ptrdiff_t>(std::min(d, start + g)));
    codes.push_back(borel_map(block, cfg.bits));
  }
  return codes;
}

/// |a - b| as an exact integer in units of 2^-(d*B).
inline BigUint reduced_gap(const BorelCode& a, const BorelCode& b) {
  detail::require(a.dim == b.dim && a.bits == b.bits,
                  "reduced_distance: codes differ in (d, B): (" + std::to_string(a.dim) + ", " +
                      std::to_string(a.bits) + ") vs (" + std::to_string(b.dim) + ", " +
                      std::to_string(b.bits) + ")");
  return a.value >= b.value ? BigUint(a.value - b.value) : BigUint(b.value - a.value);
}

/// Real-line distance between the dyadic values of two codes.
inline double reduced_distance(const BorelCode& a, const BorelCode& b) {
  BigUint gap = reduced_gap(a, b);
  return std::ldexp(gap.convert_to<double>(), -static_cast<int>(a.width()));
}

/// Euclidean combination of per-group distances.
inline double reduced_distance(const std::vector<BorelCode>& a, const std::vector<BorelCode>& b) {
  detail::require(a.size() == b.size(), "reduced_distance: group counts differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double g = reduced_distance(a[i], b[i]);
    sum += g * g;
  }
  return std::sqrt(sum);
}

/// The code as a double in [0,1), rounded.
inline double code_fraction(const BorelCode& c) {
  return std::ldexp(c.value.convert_to<double>(), -static_cast<int>(c.width()));
}

/// Decimal rendering of the integer value.
inline std::string to_decimal(const BorelCode& c) { return c.value.str(); }

inline BorelCode from_decimal(const std::string& text, std::uint32_t dim, std::uint32_t bits) {
  detail::require(!text.empty() && text.find_first_not_of("0123456789") == std::string::npos,
                  "borel: '" + text + "' is not a decimal integer");
  BorelCode c{BigUint(text), dim, bits};
  detail::require(detail::fits_width(c.value, c.width()), "borel: code value exceeds 2^(d*B)");
  return c;
}

}  // namespace borelknn
