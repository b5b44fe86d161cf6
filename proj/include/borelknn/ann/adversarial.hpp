#pragma once

// A worst-case but legal answer to the (k, c)-ANN query: among all datapoints
// within (1 + c) eps_kNN(q), the k that favour one label as much as possible.

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "borelknn/core/dataset.hpp"
#include "borelknn/core/error.hpp"
#include "borelknn/knn/neighbors.hpp"

namespace borelknn {

template <class Metric>
NeighborSet adversarial_kann(std::span<const typename Metric::sample_type> data, std::span<const Label> labels,
                             const typename Metric::sample_type& q, std::size_t k, double c, Label bias, Seed query) {
  detail::check_k(k, data.size());
  detail::require(labels.size() == data.size(), "adversarial_kann: labels and data differ in length");
  detail::require(c >= 0.0, "adversarial_kann: c must be nonnegative");
  using Key = typename Metric::key_type;
  std::vector<std::pair<Key, std::size_t>> cand;
  cand.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) cand.emplace_back(Metric::key(q, data[i]), i);

  const TieOrder ties(query);
  auto nearer = [&](const auto& a, const auto& b) {
    if (a.first < b.first) return true;
    if (b.first < a.first) return false;
    return ties.less(a.second, b.second);
  };
  const auto kth = cand.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(cand.begin(), kth, cand.end(), nearer);
  const double radius = (1.0 + c) * Metric::value(kth->first);
  // The first k always qualify, even if rounding puts value() a hair above radius.
  cand.erase(std::partition(kth + 1, cand.end(), [&](const auto& p) { return Metric::value(p.first) <= radius; }),
             cand.end());
  std::sort(cand.begin(), cand.end(), nearer);

  // Bias-labelled points first, each group by distance.
  std::stable_partition(cand.begin(), cand.end(), [&](const auto& p) { return labels[p.second] == bias; });
  cand.resize(k);
  std::sort(cand.begin(), cand.end(), nearer);

  NeighborSet out;
  for (const auto& [key, idx] : cand) {
    out.indices.push_back(idx);
    out.distances.push_back(Metric::value(key));
  }
  return out;
}

template <class Metric>
NeighborSet adversarial_kann(const std::vector<typename Metric::sample_type>& data, const std::vector<Label>& labels,
                             const typename Metric::sample_type& q, std::size_t k, double c, Label bias, Seed query) {
  return adversarial_kann<Metric>(std::span<const typename Metric::sample_type>(data), std::span<const Label>(labels),
                                  q, k, c, bias, query);
}

}  // namespace borelknn
