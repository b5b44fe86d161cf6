#pragma once

// K-fold cross-validation of k-NN over k = 1..k_max, in the original space
// or after Borel reduction.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "borelknn/borel/borel.hpp"
#include "borelknn/core/folds.hpp"
#include "borelknn/core/metric.hpp"
#include "borelknn/core/parallel.hpp"
#include "borelknn/knn/neighbors.hpp"
#include "borelknn/knn/sorted_index.hpp"
#include "borelknn/knn/vote.hpp"

namespace borelknn {

enum class CvVariant { original, reduced };

inline const char* to_string(CvVariant v) { return v == CvVariant::original ? "original" : "reduced"; }

inline CvVariant parse_cv_variant(const std::string& text) {
  if (text == "original") return CvVariant::original;
  if (text == "reduced") return CvVariant::reduced;
  detail::fail("unknown cv variant '" + text + "'");
}

struct CvOptions {
  std::size_t k_max = 20;
  std::size_t folds = 10;
  CvVariant variant = CvVariant::original;
  ReductionConfig reduction;
  /// Fit min-max scaling on each training fold instead of the whole dataset.
  bool strict = false;
  /// False when the points already lie on the B-bit lattice of [0,1]^d (for
  /// instance decoded from stored Borel codes) and must not be rescaled.
  bool rescale = true;
  std::size_t threads = 1;
};

struct CvReport {
  CvVariant variant = CvVariant::original;
  std::size_t n = 0;
  std::size_t folds = 0;
  std::size_t k_max = 0;
  unsigned bits = 0;
  std::size_t group_size = 0;
  bool strict = false;
  /// correct[k-1]: test points classified correctly with k neighbours.
  std::vector<std::size_t> correct;
  std::vector<double> accuracy;
  std::size_t best_k = 0;

  double best_accuracy() const { return accuracy[best_k - 1]; }
  std::size_t best_correct() const { return correct[best_k - 1]; }
  std::size_t best_incorrect() const { return n - best_correct(); }
};

namespace detail {

// Neighbour lists (up to k_max, nearest first) for each test point of one fold.
inline std::vector<NeighborSet> fold_neighbors(const std::vector<Point>& train, const std::vector<Point>& test,
                                               const std::vector<std::size_t>& test_ids, const CvOptions& opt,
                                               Seed seed) {
  std::vector<NeighborSet> out;
  out.reserve(test.size());
  if (opt.variant == CvVariant::original) {
    for (std::size_t j = 0; j < test.size(); ++j)
      out.push_back(brute_knn<EuclideanMetric>(train, test[j], opt.k_max, query_seed(seed, test_ids[j])));
    return out;
  }
  const std::size_t g = opt.reduction.effective_group(train.front().size());
  if (g == train.front().size()) {
    std::vector<BorelCode> codes;
    codes.reserve(train.size());
    for (const auto& x : train) codes.push_back(borel_map(x, opt.reduction.bits));
    Sorted1DIndex index(std::move(codes));
    for (std::size_t j = 0; j < test.size(); ++j)
      out.push_back(index.knn(borel_map(test[j], opt.reduction.bits), opt.k_max, query_seed(seed, test_ids[j])));
    return out;
  }
  std::vector<std::vector<BorelCode>> codes;
  codes.reserve(train.size());
  for (const auto& x : train) codes.push_back(grouped_reduce(x, opt.reduction));
  for (std::size_t j = 0; j < test.size(); ++j)
    out.push_back(brute_knn<GroupedReducedMetric>(codes, grouped_reduce(test[j], opt.reduction), opt.k_max,
                                                  query_seed(seed, test_ids[j])));
  return out;
}

}  // namespace detail

/// Every point is tested once, in the fold that holds it out. Neighbour ties
/// and vote ties use the point's row index as query ordinal, so the k-NN set
/// for k is the first k of the k_max list.
inline CvReport run_cv(const LabeledDataset& ds, const CvOptions& opt, Seed seed) {
  detail::require(opt.k_max >= 1, "run_cv: k_max must be at least 1");
  auto splits = split_folds(ds, opt.folds, seed);
  std::size_t min_train = ds.size();
  for (const auto& s : splits) min_train = std::min(min_train, s.train.size());
  detail::require(opt.k_max <= min_train, "run_cv: k_max (" + std::to_string(opt.k_max) +
                                              ") exceeds the smallest training fold (" + std::to_string(min_train) +
                                              ")");
  if (opt.variant == CvVariant::reduced) {
    detail::check_bits(opt.reduction.bits);
    detail::require(opt.reduction.group_size <= ds.dim(), "run_cv: group size exceeds dimension");
  }

  std::optional<MinMaxParams> global;
  if (!opt.strict) global = fit_min_max(ds);
  auto place = [&](const Point& x, const MinMaxParams& scale) {
    return opt.rescale ? clamp_unit_cube(apply_min_max(x, scale)) : x;
  };

  std::vector<std::vector<std::size_t>> fold_correct(splits.size(), std::vector<std::size_t>(opt.k_max, 0));
  parallel_for(splits.size(), opt.threads, [&](std::size_t f) {
    const auto& split = splits[f];
    const MinMaxParams scale = global ? *global : fit_min_max(ds.subset(split.train));
    std::vector<Point> train, test;
    for (std::size_t i : split.train) train.push_back(place(ds.point(i), scale));
    for (std::size_t i : split.test) test.push_back(place(ds.point(i), scale));

    auto lists = detail::fold_neighbors(train, test, split.test, opt, seed);
    std::vector<Label> votes;
    for (std::size_t j = 0; j < lists.size(); ++j) {
      const Seed qs = query_seed(seed, split.test[j]);
      votes.clear();
      for (std::size_t k = 1; k <= opt.k_max; ++k) {
        votes.push_back(ds.label(split.train[lists[j].indices[k - 1]]));
        if (majority_vote(votes, ds.class_count(), qs) == ds.label(split.test[j])) ++fold_correct[f][k - 1];
      }
    }
  });

  CvReport r;
  r.variant = opt.variant;
  r.n = ds.size();
  r.folds = opt.folds;
  r.k_max = opt.k_max;
  r.strict = opt.strict;
  if (opt.variant == CvVariant::reduced) {
    r.bits = opt.reduction.bits;
    r.group_size = opt.reduction.effective_group(ds.dim());
  }
  r.correct.assign(opt.k_max, 0);
  for (const auto& fc : fold_correct)
    for (std::size_t k = 0; k < opt.k_max; ++k) r.correct[k] += fc[k];
  r.best_k = 1;
  for (std::size_t k = 1; k <= opt.k_max; ++k) {
    r.accuracy.push_back(static_cast<double>(r.correct[k - 1]) / static_cast<double>(r.n));
    if (r.correct[k - 1] > r.correct[r.best_k - 1]) r.best_k = k;
  }
  return r;
}

}  // namespace borelknn
