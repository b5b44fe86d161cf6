#pragma once

// Rules over points of the unit cube, selected by neighbour source.

#include <memory>
#include <string>

#include "borelknn/ann/adversarial.hpp"
#include "borelknn/ann/index.hpp"
#include "borelknn/ann/thermometer.hpp"
#include "borelknn/borel/borel.hpp"
#include "borelknn/knn/rule.hpp"

namespace borelknn {

/// Rule voting over the adversarial (k, c)-ANN answer.
template <class Metric>
LearningRule<typename Metric::sample_type> make_adversarial_rule(KSchedule schedule, double c, Label bias, Seed seed) {
  using Sample = typename Metric::sample_type;
  return [schedule = std::move(schedule), c, bias, seed](const TrainingSet<Sample>& train) {
    detail::check_training_set(train);
    const std::size_t k = detail::scheduled_k(schedule, train.size());
    auto data = std::make_shared<const TrainingSet<Sample>>(train);
    return Classifier<Sample>([data, k, c, bias, seed](const Sample& q, std::uint64_t ordinal) {
      Seed qs = query_seed(seed, ordinal);
      return detail::vote_over(adversarial_kann<Metric>(data->samples, data->labels, q, k, c, bias, qs), *data, qs);
    });
  };
}

/// Rule voting over (k, c)-ANN answers from a freshly built index.
inline LearningRule<BitString> make_kann_rule(KSchedule schedule, AnnParams params, Seed seed, std::size_t threads = 1) {
  return [schedule = std::move(schedule), params, seed, threads](const TrainingSet<BitString>& train) {
    detail::check_training_set(train);
    const std::size_t k = detail::scheduled_k(schedule, train.size());
    auto index = std::make_shared<const AnnIndex>(
        build_ann_index(train.samples, params, k, rng::derive(seed, rng::tag_projection), threads));
    auto labels = std::make_shared<const TrainingSet<BitString>>(TrainingSet<BitString>{{}, train.labels, train.class_count});
    return Classifier<BitString>([index, labels, k, seed](const BitString& q, std::uint64_t ordinal) {
      Seed qs = query_seed(seed, ordinal);
      return detail::vote_over(kann_query(*index, q, k, qs), *labels, qs);
    });
  };
}

enum class NeighborSource { brute, sorted1d, kann, adversarial };

inline NeighborSource parse_neighbor_source(const std::string& text) {
  if (text == "brute" || text == "knn") return NeighborSource::brute;
  if (text == "sorted1d" || text == "reduced") return NeighborSource::sorted1d;
  if (text == "kann") return NeighborSource::kann;
  if (text == "adversarial") return NeighborSource::adversarial;
  detail::fail("unknown neighbour source '" + text + "'");
}

struct RuleOptions {
  NeighborSource source = NeighborSource::brute;
  /// Bits per coordinate of the Borel code (sorted1d).
  unsigned bits = 16;
  /// Thermometer levels per coordinate (kann).
  unsigned levels = 16;
  AnnParams ann;
  /// Slack and favoured label of the adversarial oracle.
  double adversary_c = 0.2;
  Label bias = 1;
  std::size_t threads = 1;
};

/// k-NN rule on points of [0,1]^d. sorted1d and kann reach their carriers by
/// transport along the Borel map and the thermometer code respectively.
inline LearningRule<Point> make_knn_rule(const RuleOptions& opt, KSchedule schedule, Seed seed) {
  switch (opt.source) {
    case NeighborSource::brute:
      return make_brute_rule<EuclideanMetric>(std::move(schedule), seed);
    case NeighborSource::sorted1d: {
      const unsigned bits = opt.bits;
      return transport_rule<Point, BorelCode>(make_sorted1d_rule(std::move(schedule), seed),
                                              [bits](const Point& x) { return borel_map(clamp_unit_cube(x), bits); });
    }
    case NeighborSource::kann: {
      const unsigned levels = opt.levels;
      return transport_rule<Point, BitString>(make_kann_rule(std::move(schedule), opt.ann, seed, opt.threads),
                                              [levels](const Point& x) { return thermometer_encode(clamp_unit_cube(x), levels); });
    }
    case NeighborSource::adversarial:
      return make_adversarial_rule<EuclideanMetric>(std::move(schedule), opt.adversary_c, opt.bias, seed);
  }
  detail::fail("make_knn_rule: bad source");
}

}  // namespace borelknn
