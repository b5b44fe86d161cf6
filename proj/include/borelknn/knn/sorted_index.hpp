#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "borelknn/borel/borel.hpp"
#include "borelknn/knn/neighbors.hpp"

namespace borelknn {

/// Borel codes kept in ascending order, answering exact k-NN under the
/// reduced metric by binary search and outward expansion.
class Sorted1DIndex {
 public:
  explicit Sorted1DIndex(std::vector<BorelCode> codes) {
    detail::require(!codes.empty(), "sorted index: no codes");
    dim_ = codes.front().dim;
    bits_ = codes.front().bits;
    for (const auto& c : codes)
      detail::require(c.dim == dim_ && c.bits == bits_, "sorted index: codes differ in (d, B)");
    order_.resize(codes.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return codes[a].value < codes[b].value; });
    sorted_.reserve(codes.size());
    for (std::size_t i : order_) sorted_.push_back(std::move(codes[i].value));
  }

  std::size_t size() const { return sorted_.size(); }
  std::uint32_t dim() const { return dim_; }
  std::uint32_t bits() const { return bits_; }

  /// Code values in ascending order, and the original index of each.
  const std::vector<BigUint>& sorted_values() const { return sorted_; }
  const std::vector<std::size_t>& original_indices() const { return order_; }

  NeighborSet knn(const BorelCode& q, std::size_t k, Seed query) const {
    detail::check_k(k, size());
    detail::require(q.dim == dim_ && q.bits == bits_, "sorted index: query differs in (d, B)");
    using Key = ReducedMetric::key_type;
    const std::size_t width = std::size_t{dim_} * bits_;

    const auto pos = static_cast<std::size_t>(std::lower_bound(sorted_.begin(), sorted_.end(), q.value) -
                                              sorted_.begin());
    // Left walks down from pos-1 (codes < q), right walks up from pos (codes >= q).
    std::size_t left = pos, right = pos;
    auto left_gap = [&] { return BigUint(q.value - sorted_[left - 1]); };
    auto right_gap = [&] { return BigUint(sorted_[right] - q.value); };

    std::vector<std::pair<Key, std::size_t>> cand;
    cand.reserve(k + 4);
    BigUint worst = 0;
    while (cand.size() < k) {
      bool take_left;
      if (left == 0)
        take_left = false;
      else if (right == sorted_.size())
        take_left = true;
      else
        take_left = left_gap() <= right_gap();
      if (take_left) {
        --left;
        cand.emplace_back(Key{q.value - sorted_[left], width}, order_[left]);
      } else {
        cand.emplace_back(Key{sorted_[right] - q.value, width}, order_[right]);
        ++right;
      }
      worst = cand.back().first.gap;
    }
    // Everything tied with the k-th gap competes through the tie order.
    while (left > 0 && left_gap() == worst) {
      --left;
      cand.emplace_back(Key{worst, width}, order_[left]);
    }
    while (right < sorted_.size() && right_gap() == worst) {
      cand.emplace_back(Key{worst, width}, order_[right]);
      ++right;
    }
    return detail::select_k<ReducedMetric>(std::move(cand), k, TieOrder(query));
  }

 private:
  std::vector<BigUint> sorted_;
  std::vector<std::size_t> order_;
  std::uint32_t dim_ = 0;
  std::uint32_t bits_ = 0;
};

inline Sorted1DIndex sorted_index_build(std::vector<BorelCode> codes) { return Sorted1DIndex(std::move(codes)); }

inline NeighborSet sorted_knn(const Sorted1DIndex& index, const BorelCode& q, std::size_t k, Seed query) {
  return index.knn(q, k, query);
}

}  // namespace borelknn
