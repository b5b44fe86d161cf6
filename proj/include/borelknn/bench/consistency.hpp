#pragma once

// Error of a rule against the Bayes error as the sample size grows.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "borelknn/bench/mm2.hpp"
#include "borelknn/core/parallel.hpp"
#include "borelknn/knn/rule.hpp"

namespace borelknn {

struct ConsistencyCurve {
  std::vector<std::size_t> n_grid;
  std::size_t trials = 0;
  std::size_t test_size = 0;
  double bayes = 0.0;
  /// errors[g][t]: empirical error at n_grid[g] in trial t.
  std::vector<std::vector<double>> errors;
  std::vector<double> mean_error;
  std::vector<double> stddev_error;
  std::vector<double> mean_excess;
};

inline constexpr std::size_t default_test_size = 10000;

/// Trains on a fresh sample of each size in `n_grid`, `trials` times, and
/// scores on a fresh test sample of `test_size` points.
inline ConsistencyCurve run_consistency(const Mm2Spec& spec, const LearningRule<Point>& rule,
                                        const std::vector<std::size_t>& n_grid, std::size_t trials, Seed seed,
                                        std::size_t test_size = default_test_size, std::size_t threads = 1) {
  detail::require(!n_grid.empty(), "run_consistency: empty n grid");
  detail::require(std::is_sorted(n_grid.begin(), n_grid.end()) &&
                      std::adjacent_find(n_grid.begin(), n_grid.end()) == n_grid.end(),
                  "run_consistency: n grid must be strictly increasing");
  detail::require(n_grid.front() >= 1, "run_consistency: n must be positive");
  detail::require(trials >= 1, "run_consistency: trials must be at least 1");
  detail::require(test_size >= 1, "run_consistency: test size must be positive");

  ConsistencyCurve curve;
  curve.n_grid = n_grid;
  curve.trials = trials;
  curve.test_size = test_size;
  curve.bayes = bayes_error(spec);
  curve.errors.assign(n_grid.size(), std::vector<double>(trials, 0.0));

  parallel_for(n_grid.size() * trials, threads, [&](std::size_t slot) {
    const std::size_t g = slot / trials;
    const std::size_t t = slot % trials;
    const Seed cell = rng::derive(rng::derive(seed, rng::tag_trial, n_grid[g]), rng::tag_trial, t);
    try {
      auto train = synth_mm2(spec, n_grid[g], rng::derive(cell, rng::tag_sample_x));
      auto test = synth_mm2(spec, test_size, rng::derive(cell, rng::tag_sample_y));
      auto clf = rule(as_training_set(train));
      curve.errors[g][t] = empirical_error(clf, test);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_consistency: n = " + std::to_string(n_grid[g]) + ", trial " + std::to_string(t) +
                               ": " + e.what());
    }
  });

  for (const auto& row : curve.errors) {
    double mean = 0.0;
    for (double e : row) mean += e;
    mean /= static_cast<double>(trials);
    double var = 0.0;
    for (double e : row) var += (e - mean) * (e - mean);
    curve.mean_error.push_back(mean);
    curve.stddev_error.push_back(trials > 1 ? std::sqrt(var / static_cast<double>(trials - 1)) : 0.0);
    curve.mean_excess.push_back(mean - curve.bayes);
  }
  return curve;
}

}  // namespace borelknn
