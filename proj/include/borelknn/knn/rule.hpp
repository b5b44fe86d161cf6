#pragma once

// Learning rules: a rule turns a labelled sample into a classifier. Rules are
// generic in the sample carrier, so one rule can be transported along a map
// between carriers (e.g. from [0,1]^d to Borel codes).

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "borelknn/core/dataset.hpp"
#include "borelknn/core/metric.hpp"
#include "borelknn/knn/neighbors.hpp"
#include "borelknn/knn/sorted_index.hpp"
#include "borelknn/knn/vote.hpp"

namespace borelknn {

template <class Sample>
struct TrainingSet {
  std::vector<Sample> samples;
  std::vector<Label> labels;
  std::size_t class_count = 0;

  std::size_t size() const { return samples.size(); }
};

inline TrainingSet<Point> as_training_set(const LabeledDataset& ds) {
  return {ds.points(), ds.labels(), ds.class_count()};
}

/// Maps a query (and its ordinal, which seeds per-query tie breaking) to a label.
template <class Sample>
class Classifier {
 public:
  using Fn = std::function<Label(const Sample&, std::uint64_t)>;

  explicit Classifier(Fn fn) : fn_(std::move(fn)) {}

  Label predict(const Sample& q, std::uint64_t ordinal = 0) const { return fn_(q, ordinal); }

 private:
  Fn fn_;
};

template <class Sample>
using LearningRule = std::function<Classifier<Sample>(const TrainingSet<Sample>&)>;

/// Sample size -> number of neighbours.
using KSchedule = std::function<std::size_t(std::size_t)>;

/// k = ceil(sqrt(n)), which lies in omega(log n) and o(n).
inline KSchedule sqrt_schedule() {
  return [](std::size_t n) { return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)))); };
}

inline KSchedule constant_schedule(std::size_t k) {
  return [k](std::size_t) { return k; };
}

namespace detail {

inline std::size_t scheduled_k(const KSchedule& schedule, std::size_t n) {
  std::size_t k = schedule(n);
  require(k >= 1 && k <= n, "k schedule returned " + std::to_string(k) + " for n = " + std::to_string(n) +
                                "; must lie in [1, n]");
  return k;
}

template <class Sample>
void check_training_set(const TrainingSet<Sample>& s) {
  require(s.size() >= 1, "training set is empty");
  require(s.samples.size() == s.labels.size(), "training set: samples and labels differ in length");
  require(s.class_count >= 1, "training set: class_count must be positive");
}

template <class Sample>
Label vote_over(const NeighborSet& nn, const TrainingSet<Sample>& s, Seed query) {
  std::vector<Label> labels;
  labels.reserve(nn.size());
  for (std::size_t i : nn.indices) labels.push_back(s.labels[i]);
  return majority_vote(labels, s.class_count, query);
}

}  // namespace detail

/// k-NN by exhaustive search under `Metric`.
template <class Metric>
LearningRule<typename Metric::sample_type> make_brute_rule(KSchedule schedule, Seed seed) {
  using Sample = typename Metric::sample_type;
  return [schedule = std::move(schedule), seed](const TrainingSet<Sample>& train) {
    detail::check_training_set(train);
    const std::size_t k = detail::scheduled_k(schedule, train.size());
    auto data = std::make_shared<const TrainingSet<Sample>>(train);
    return Classifier<Sample>([data, k, seed](const Sample& q, std::uint64_t ordinal) {
      Seed qs = query_seed(seed, ordinal);
      return detail::vote_over(brute_knn<Metric>(data->samples, q, k, qs), *data, qs);
    });
  };
}

/// k-NN on Borel codes through the sorted one-dimensional index.
inline LearningRule<BorelCode> make_sorted1d_rule(KSchedule schedule, Seed seed) {
  return [schedule = std::move(schedule), seed](const TrainingSet<BorelCode>& train) {
    detail::check_training_set(train);
    const std::size_t k = detail::scheduled_k(schedule, train.size());
    auto index = std::make_shared<const Sorted1DIndex>(train.samples);
    auto labels = std::make_shared<const TrainingSet<BorelCode>>(TrainingSet<BorelCode>{{}, train.labels, train.class_count});
    return Classifier<BorelCode>([index, labels, k, seed](const BorelCode& q, std::uint64_t ordinal) {
      Seed qs = query_seed(seed, ordinal);
      return detail::vote_over(index->knn(q, k, qs), *labels, qs);
    });
  };
}

/// The rule L^phi: train on phi(sample), classify q by the base classifier at phi(q).
template <class Omega, class X>
LearningRule<Omega> transport_rule(LearningRule<X> base, std::function<X(const Omega&)> phi) {
  return [base = std::move(base), phi = std::move(phi)](const TrainingSet<Omega>& train) {
    detail::check_training_set(train);
    TrainingSet<X> mapped{{}, train.labels, train.class_count};
    mapped.samples.reserve(train.size());
    for (const auto& x : train.samples) mapped.samples.push_back(phi(x));
    Classifier<X> inner = base(mapped);
    return Classifier<Omega>([inner, phi](const Omega& q, std::uint64_t ordinal) {
      return inner.predict(phi(q), ordinal);
    });
  };
}

/// Fraction of test samples whose prediction differs from the label. Query
/// ordinals are the test positions.
template <class Sample>
double empirical_error(const Classifier<Sample>& clf, const TrainingSet<Sample>& test) {
  detail::require(test.size() >= 1, "empirical_error: empty test set");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < test.size(); ++i)
    if (clf.predict(test.samples[i], i) != test.labels[i]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

inline double empirical_error(const Classifier<Point>& clf, const LabeledDataset& test) {
  return empirical_error(clf, as_training_set(test));
}

}  // namespace borelknn
