#pragma once

// Query-instability diagnostics: nearest-neighbour radii, ball counts around
// queries, the c-unstable predicate, and the averaged distance -> count curve.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "borelknn/core/error.hpp"
#include "borelknn/core/metric.hpp"
#include "borelknn/core/parallel.hpp"

namespace borelknn {

/// Smallest radius of a closed ball around q holding k datapoints.
template <class Metric>
double eps_knn(std::span<const typename Metric::sample_type> data, const typename Metric::sample_type& q,
               std::size_t k) {
  detail::require(k >= 1 && k <= data.size(), "eps_knn: k must lie in [1, n]");
  std::vector<typename Metric::key_type> keys;
  keys.reserve(data.size());
  for (const auto& x : data) keys.push_back(Metric::key(q, x));
  std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k - 1), keys.end());
  return Metric::value(keys[k - 1]);
}

template <class Metric>
double eps_knn(const std::vector<typename Metric::sample_type>& data, const typename Metric::sample_type& q,
               std::size_t k) {
  return eps_knn<Metric>(std::span<const typename Metric::sample_type>(data), q, k);
}

/// Datapoints at distance <= radius from q.
template <class Metric>
std::size_t ball_count(std::span<const typename Metric::sample_type> data, const typename Metric::sample_type& q,
                       double radius) {
  std::size_t count = 0;
  for (const auto& x : data)
    if (Metric::distance(q, x) <= radius) ++count;
  return count;
}

/// True iff the (1+c) eps_NN(q)-ball holds at least half of the datapoints.
template <class Metric>
bool is_c_unstable(std::span<const typename Metric::sample_type> data, const typename Metric::sample_type& q,
                   double c) {
  detail::require(!data.empty(), "is_c_unstable: empty dataset");
  detail::require(c >= 0.0, "is_c_unstable: c must be nonnegative");
  double radius = (1.0 + c) * eps_knn<Metric>(data, q, 1);
  return 2 * ball_count<Metric>(data, q, radius) >= data.size();
}

template <class Metric>
bool is_c_unstable(const std::vector<typename Metric::sample_type>& data, const typename Metric::sample_type& q,
                   double c) {
  return is_c_unstable<Metric>(std::span<const typename Metric::sample_type>(data), q, c);
}

struct QueryInstability {
  double eps_nn = 0.0;
  double eps_knn = 0.0;
  /// Datapoints within (1 + c) * eps_knn.
  std::size_t inflated_count = 0;
  bool unstable = false;
};

struct InstabilityProfile {
  std::size_t k = 0;
  double c = 0.0;
  std::vector<QueryInstability> queries;
  double mean_eps_knn = 0.0;
  double mean_inflated_radius = 0.0;
  double mean_inflated_count = 0.0;
  double unstable_fraction = 0.0;
  /// Average number of datapoints within each grid radius.
  std::vector<double> radius_grid;
  std::vector<double> mean_count;
};

inline constexpr std::size_t default_radius_grid = 200;

namespace detail {

inline InstabilityProfile summarize_profile(std::vector<std::vector<double>> sorted, std::size_t k, double c,
                                            std::size_t grid_points) {
  InstabilityProfile p;
  p.k = k;
  p.c = c;
  p.queries.resize(sorted.size());
  double max_radius = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& dist = sorted[i];
    require(k >= 1 && k <= dist.size(), "instability_profile: k must lie in [1, n]");
    QueryInstability& r = p.queries[i];
    r.eps_nn = dist.front();
    r.eps_knn = dist[k - 1];
    auto upto = [&](double radius) {
      return static_cast<std::size_t>(std::upper_bound(dist.begin(), dist.end(), radius) - dist.begin());
    };
    r.inflated_count = upto((1.0 + c) * r.eps_knn);
    r.unstable = 2 * upto((1.0 + c) * r.eps_nn) >= dist.size();
    max_radius = std::max(max_radius, dist.back());
    p.mean_eps_knn += r.eps_knn;
    p.mean_inflated_count += static_cast<double>(r.inflated_count);
    p.unstable_fraction += r.unstable ? 1.0 : 0.0;
  }
  const auto m = static_cast<double>(sorted.size());
  p.mean_eps_knn /= m;
  p.mean_inflated_radius = (1.0 + c) * p.mean_eps_knn;
  p.mean_inflated_count /= m;
  p.unstable_fraction /= m;

  if (grid_points >= 2) {
    p.radius_grid.resize(grid_points);
    p.mean_count.assign(grid_points, 0.0);
    for (std::size_t g = 0; g < grid_points; ++g)
      p.radius_grid[g] = g + 1 == grid_points ? max_radius
                                              : max_radius * static_cast<double>(g) / static_cast<double>(grid_points - 1);
    for (const auto& dist : sorted)
      for (std::size_t g = 0; g < grid_points; ++g)
        p.mean_count[g] += static_cast<double>(std::upper_bound(dist.begin(), dist.end(), p.radius_grid[g]) - dist.begin());
    for (double& v : p.mean_count) v /= m;
  }
  return p;
}

}  // namespace detail

/// Per-query and averaged instability statistics for queries drawn apart from
/// the data. `grid_points` radii are spaced evenly from 0 to the largest
/// query-datapoint distance.
template <class Metric>
InstabilityProfile instability_profile(std::span<const typename Metric::sample_type> data,
                                       std::span<const typename Metric::sample_type> queries, std::size_t k, double c,
                                       std::size_t grid_points = default_radius_grid, std::size_t threads = 1) {
  detail::require(!queries.empty(), "instability_profile: no queries");
  detail::require(k >= 1 && k <= data.size(), "instability_profile: k must lie in [1, n]");
  detail::require(c >= 0.0, "instability_profile: c must be nonnegative");
  std::vector<std::vector<double>> sorted(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t i) {
    auto& dist = sorted[i];
    dist.reserve(data.size());
    for (const auto& x : data) dist.push_back(Metric::distance(queries[i], x));
    std::sort(dist.begin(), dist.end());
  });
  return detail::summarize_profile(std::move(sorted), k, c, grid_points);
}

/// Leave-one-out form for real datasets: each datapoint queries the others.
template <class Metric>
InstabilityProfile instability_profile_loo(std::span<const typename Metric::sample_type> data, std::size_t k, double c,
                                           std::size_t grid_points = default_radius_grid, std::size_t threads = 1) {
  detail::require(data.size() >= 2, "instability_profile: leave-one-out needs n >= 2");
  detail::require(k >= 1 && k < data.size(), "instability_profile: k must lie in [1, n-1]");
  std::vector<std::vector<double>> sorted(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) {
    auto& dist = sorted[i];
    dist.reserve(data.size() - 1);
    for (std::size_t j = 0; j < data.size(); ++j)
      if (j != i) dist.push_back(Metric::distance(data[i], data[j]));
    std::sort(dist.begin(), dist.end());
  });
  return detail::summarize_profile(std::move(sorted), k, c, grid_points);
}

/// Sample size after which empirical measures of all Euclidean balls in R^d
/// (VC dimension d + 1) are eps-close to the true ones with confidence
/// 1 - delta: ceil(max{8(d+1)/eps lg(8e/eps), 4/eps lg(2/delta)}).
inline std::uint64_t vc_sample_bound(std::size_t d, double eps, double delta) {
  detail::require(eps > 0.0 && eps < 1.0, "vc_sample_bound: eps must lie in (0,1)");
  detail::require(delta > 0.0 && delta < 1.0, "vc_sample_bound: delta must lie in (0,1)");
  const double vc = static_cast<double>(d) + 1.0;
  const double shatter = 8.0 * vc / eps * std::log2(8.0 * std::numbers::e / eps);
  const double confidence = 4.0 / eps * std::log2(2.0 / delta);
  return static_cast<std::uint64_t>(std::ceil(std::max(shatter, confidence)));
}

}  // namespace borelknn
