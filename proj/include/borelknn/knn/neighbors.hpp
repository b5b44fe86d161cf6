#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "borelknn/core/error.hpp"
#include "borelknn/core/metric.hpp"
#include "borelknn/core/random.hpp"

namespace borelknn {

/// The k nearest dataset indices with nondecreasing distances.
struct NeighborSet {
  std::vector<std::size_t> indices;
  std::vector<double> distances;

  std::size_t size() const { return indices.size(); }
  double radius() const { return distances.empty() ? 0.0 : distances.back(); }
};

/// Seed owning all randomness of one query: derived from the classifier's
/// master seed and the query's ordinal, so results do not depend on the
/// order in which queries are scheduled.
inline Seed query_seed(Seed master, std::uint64_t ordinal) {
  return rng::derive(master, rng::tag_query, ordinal);
}

/// Random order among dataset indices used to break distance ties.
class TieOrder {
 public:
  explicit TieOrder(Seed query) : seed_(rng::derive(query, rng::tag_neighbor_ties)) {}

  bool less(std::size_t a, std::size_t b) const {
    auto ra = rng::rank(seed_, a);
    auto rb = rng::rank(seed_, b);
    return ra != rb ? ra < rb : a < b;
  }

 private:
  Seed seed_;
};

namespace detail {

inline void check_k(std::size_t k, std::size_t n) {
  require(k >= 1, "k must be at least 1");
  require(k <= n, "k (" + std::to_string(k) + ") exceeds the number of datapoints (" + std::to_string(n) + ")");
}

/// Sorts (key, index) candidates by key then tie order and keeps the first k.
template <class Metric>
NeighborSet select_k(std::vector<std::pair<typename Metric::key_type, std::size_t>> cand, std::size_t k,
                     const TieOrder& ties) {
  auto cmp = [&](const auto& a, const auto& b) {
    if (a.first < b.first) return true;
    if (b.first < a.first) return false;
    return ties.less(a.second, b.second);
  };
  k = std::min(k, cand.size());
  if (k < cand.size())
    std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(), cmp);
  cand.resize(k);
  std::sort(cand.begin(), cand.end(), cmp);
  NeighborSet out;
  out.indices.reserve(k);
  out.distances.reserve(k);
  for (const auto& [key, idx] : cand) {
    out.indices.push_back(idx);
    out.distances.push_back(Metric::value(key));
  }
  return out;
}

}  // namespace detail

/// Exact k-NN by exhaustive scan. Equidistant candidates are ordered by the
/// query's random permutation of dataset indices.
template <class Metric>
NeighborSet brute_knn(std::span<const typename Metric::sample_type> data, const typename Metric::sample_type& q,
                      std::size_t k, Seed query) {
  detail::check_k(k, data.size());
  std::vector<std::pair<typename Metric::key_type, std::size_t>> cand;
  cand.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) cand.emplace_back(Metric::key(q, data[i]), i);
  return detail::select_k<Metric>(std::move(cand), k, TieOrder(query));
}

template <class Metric>
NeighborSet brute_knn(const std::vector<typename Metric::sample_type>& data,
                      const typename Metric::sample_type& q, std::size_t k, Seed query) {
  return brute_knn<Metric>(std::span<const typename Metric::sample_type>(data), q, k, query);
}

}  // namespace borelknn
