#pragma once

// Metrics over the three carriers: real points, Hamming-cube strings, and
// Borel codes. Each metric exposes an order-preserving `key` used for exact
// neighbour ranking (squared distance, bit count, integer gap) and `value`
// turning a key into the real distance.

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "borelknn/borel/borel.hpp"
#include "borelknn/core/bitstring.hpp"
#include "borelknn/core/dataset.hpp"

namespace borelknn {

struct EuclideanMetric {
  using sample_type = Point;
  using key_type = double;

  static key_type key(const Point& a, const Point& b) {
    detail::require(a.size() == b.size(), "euclidean: dimension mismatch (" + std::to_string(a.size()) +
                                              " vs " + std::to_string(b.size()) + ")");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double diff = a[i] - b[i];
      sum += diff * diff;
    }
    return sum;
  }
  static double value(key_type k) { return std::sqrt(k); }
  static double distance(const Point& a, const Point& b) { return value(key(a, b)); }
};

struct HammingMetric {
  using sample_type = BitString;
  using key_type = std::size_t;

  static key_type key(const BitString& a, const BitString& b) { return hamming_distance(a, b); }
  static double value(key_type k) { return static_cast<double>(k); }
  static double distance(const BitString& a, const BitString& b) { return value(key(a, b)); }
};

/// rho(x, y) = |phi(x) - phi(y)| on the real line, compared exactly.
struct ReducedMetric {
  using sample_type = BorelCode;

  struct key_type {
    BigUint gap;
    std::size_t width = 0;
    friend bool operator==(const key_type& a, const key_type& b) { return a.gap == b.gap; }
    friend bool operator<(const key_type& a, const key_type& b) { return a.gap < b.gap; }
  };

  static key_type key(const BorelCode& a, const BorelCode& b) { return {reduced_gap(a, b), a.width()}; }
  static double value(const key_type& k) {
    return std::ldexp(k.gap.convert_to<double>(), -static_cast<int>(k.width));
  }
  static double distance(const BorelCode& a, const BorelCode& b) { return reduced_distance(a, b); }
};

/// Euclidean combination of per-group reduced distances.
struct GroupedReducedMetric {
  using sample_type = std::vector<BorelCode>;
  using key_type = double;

  static key_type key(const sample_type& a, const sample_type& b) {
    double d = reduced_distance(a, b);
    return d * d;
  }
  static double value(key_type k) { return std::sqrt(k); }
  static double distance(const sample_type& a, const sample_type& b) { return reduced_distance(a, b); }
};

enum class MetricKind { euclidean, hamming, reduced };

using Carrier = std::variant<Point, BitString, BorelCode>;

inline const char* to_string(MetricKind m) {
  switch (m) {
    case MetricKind::euclidean: return "euclidean";
    case MetricKind::hamming: return "hamming";
    case MetricKind::reduced: return "reduced";
  }
  return "?";
}

inline MetricKind parse_metric(const std::string& text) {
  if (text == "euclidean") return MetricKind::euclidean;
  if (text == "hamming") return MetricKind::hamming;
  if (text == "reduced") return MetricKind::reduced;
  detail::fail("unknown metric '" + text + "'");
}

/// Distance under `metric`; operands must both hold that metric's carrier.
inline double distance(MetricKind metric, const Carrier& a, const Carrier& b) {
  auto expect = [&](auto* tag) {
    using T = std::remove_pointer_t<decltype(tag)>;
    const T* pa = std::get_if<T>(&a);
    const T* pb = std::get_if<T>(&b);
    detail::require(pa && pb, std::string("distance: operands do not match the ") + to_string(metric) +
                                  " metric's carrier");
    return std::pair{pa, pb};
  };
  switch (metric) {
    case MetricKind::euclidean: {
      auto [pa, pb] = expect(static_cast<Point*>(nullptr));
      return EuclideanMetric::distance(*pa, *pb);
    }
    case MetricKind::hamming: {
      auto [pa, pb] = expect(static_cast<BitString*>(nullptr));
      return HammingMetric::distance(*pa, *pb);
    }
    case MetricKind::reduced: {
      auto [pa, pb] = expect(static_cast<BorelCode*>(nullptr));
      return ReducedMetric::distance(*pa, *pb);
    }
  }
  detail::fail("distance: unknown metric");
}

}  // namespace borelknn
