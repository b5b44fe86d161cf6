#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "borelknn/core/dataset.hpp"
#include "borelknn/core/random.hpp"

namespace borelknn {

inline constexpr double weight_tolerance = 1e-12;

namespace detail {

/// Class with the largest score; scores within `tol` of the best are tied and
/// the tie goes to the class ranked first by the query's class permutation.
inline Label argmax_with_ties(const std::vector<double>& score, double tol, Seed query) {
  double best = score[0];
  for (double s : score) best = std::max(best, s);
  const Seed order = rng::derive(query, rng::tag_label_ties);
  Label winner = 0;
  bool found = false;
  std::uint64_t winner_rank = 0;
  for (Label c = 0; c < score.size(); ++c) {
    if (best - score[c] > tol) continue;
    std::uint64_t r = rng::rank(order, c);
    if (!found || r < winner_rank) {
      winner = c;
      winner_rank = r;
      found = true;
    }
  }
  return winner;
}

}  // namespace detail

/// Plurality label; ties broken by a seeded permutation of class ids.
inline Label majority_vote(std::span<const Label> labels, std::size_t class_count, Seed query) {
  detail::require(!labels.empty(), "majority_vote: no labels");
  detail::require(class_count >= 1, "majority_vote: class_count must be positive");
  std::vector<double> count(class_count, 0.0);
  for (Label y : labels) {
    detail::require(y < class_count, "majority_vote: label exceeds class_count");
    count[y] += 1.0;
  }
  return detail::argmax_with_ties(count, 0.0, query);
}

inline Label majority_vote(const std::vector<Label>& labels, std::size_t class_count, Seed query) {
  return majority_vote(std::span<const Label>(labels), class_count, query);
}

/// Label maximizing summed weight. `weights[i]` is the share of `labels[i]`.
inline Label weighted_vote(std::span<const double> weights, std::span<const Label> labels, std::size_t class_count,
                           Seed query) {
  detail::require(!weights.empty(), "weighted_vote: no weights");
  detail::require(weights.size() == labels.size(), "weighted_vote: weights and labels differ in length");
  std::vector<double> score(class_count, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    detail::require(weights[i] >= 0.0, "weighted_vote: negative weight");
    detail::require(labels[i] < class_count, "weighted_vote: label exceeds class_count");
    score[labels[i]] += weights[i];
    total += weights[i];
  }
  detail::require(std::abs(total - 1.0) <= weight_tolerance,
                  "weighted_vote: weights must sum to 1");
  return detail::argmax_with_ties(score, weight_tolerance, query);
}

inline Label weighted_vote(const std::vector<double>& weights, const std::vector<Label>& labels,
                           std::size_t class_count, Seed query) {
  return weighted_vote(std::span<const double>(weights), std::span<const Label>(labels), class_count, query);
}

}  // namespace borelknn
