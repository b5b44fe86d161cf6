#pragma once

#include <cmath>
#include <string>

#include "borelknn/core/bitstring.hpp"
#include "borelknn/core/dataset.hpp"

namespace borelknn {

/// Level v in {0..levels} nearest to x * levels.
inline unsigned thermometer_level(double x, unsigned levels) {
  auto v = static_cast<unsigned>(std::floor(x * levels + 0.5));
  return v > levels ? levels : v;
}

/// Unary code of [0,1]^d into {0,1}^(d*levels): coordinate i contributes
/// v_i ones followed by levels - v_i zeros, so the Hamming distance between
/// two codes is the l1 distance between their level vectors.
inline BitString thermometer_encode(const Point& x, unsigned levels) {
  detail::require(levels >= 1, "thermometer: levels must be positive");
  BitString out(x.size() * levels);
  for (std::size_t i = 0; i < x.size(); ++i) {
    detail::require(x[i] >= 0.0 && x[i] <= 1.0,
                    "thermometer: coordinate " + std::to_string(i) + " lies outside [0,1]");
    const unsigned v = thermometer_level(x[i], levels);
    for (unsigned b = 0; b < v; ++b) out.set(i * levels + b);
  }
  return out;
}

}  // namespace borelknn
