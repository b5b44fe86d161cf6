#pragma once

#include <algorithm>
#include <vector>

#include "borelknn/core/dataset.hpp"
#include "borelknn/core/random.hpp"

namespace borelknn {

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// K-fold partition of 0..n-1. Indices are shuffled with `seed`, grouped by
/// class when every class has at least `folds` members, and dealt round-robin
/// so fold sizes differ by at most one.
inline std::vector<FoldSplit> split_folds(const LabeledDataset& ds, std::size_t folds, Seed seed) {
  const std::size_t n = ds.size();
  detail::require(folds >= 2, "split_folds: need at least 2 folds for a non-empty train set");
  detail::require(folds <= n, "split_folds: folds (" + std::to_string(folds) + ") exceeds n (" +
                                  std::to_string(n) + ")");

  std::vector<std::size_t> class_size(ds.class_count(), 0);
  for (Label y : ds.labels()) ++class_size[y];
  bool stratify = std::all_of(class_size.begin(), class_size.end(),
                              [&](std::size_t c) { return c == 0 || c >= folds; });

  auto perm = random_permutation(n, rng::derive(seed, rng::tag_folds));
  if (stratify)
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t a, std::size_t b) { return ds.label(a) < ds.label(b); });

  std::vector<std::size_t> fold_of(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold_of[perm[pos]] = pos % folds;

  std::vector<FoldSplit> out(folds);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < folds; ++f) (fold_of[i] == f ? out[f].test : out[f].train).push_back(i);
  return out;
}

}  // namespace borelknn
