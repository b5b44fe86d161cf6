#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "borelknn/knn/neighbors.hpp"
#include "borelknn/knn/rule.hpp"
#include "borelknn/knn/rules.hpp"
#include "borelknn/knn/sorted_index.hpp"
#include "borelknn/knn/vote.hpp"

using namespace borelknn;

namespace {

std::vector<BorelCode> random_codes(SplitMix64& gen, std::size_t n, std::size_t d, unsigned bits) {
  std::vector<BorelCode> out;
  for (std::size_t i = 0; i < n; ++i) {
    Point x(d);
    for (double& v : x) v = gen.uniform();
    out.push_back(borel_map(x, bits));
  }
  return out;
}

}  // namespace

TEST(BruteKnn, NearestOnLine) {
  std::vector<Point> ds{{0.0}, {1.0}, {2.0}};
  auto nn = brute_knn<EuclideanMetric>(ds, Point{0.9}, 1, Seed{1});
  ASSERT_EQ(nn.size(), 1u);
  EXPECT_EQ(nn.indices[0], 1u);
  EXPECT_NEAR(nn.distances[0], 0.1, 1e-15);
}

TEST(BruteKnn, FullSetSorted) {
  std::vector<Point> ds{{5.0}, {1.0}, {3.0}, {0.0}};
  auto nn = brute_knn<EuclideanMetric>(ds, Point{0.0}, 4, Seed{1});
  EXPECT_EQ(nn.indices, (std::vector<std::size_t>{3, 1, 2, 0}));
  EXPECT_TRUE(std::is_sorted(nn.distances.begin(), nn.distances.end()));
}

TEST(BruteKnn, TiesFollowSeededPermutation) {
  std::vector<Point> ds{{-1.0}, {1.0}};
  std::set<std::size_t> picked;
  for (std::uint64_t s = 0; s < 64; ++s) {
    auto a = brute_knn<EuclideanMetric>(ds, Point{0.0}, 1, Seed{s});
    auto b = brute_knn<EuclideanMetric>(ds, Point{0.0}, 1, Seed{s});
    EXPECT_EQ(a.indices, b.indices);
    EXPECT_EQ(a.distances[0], 1.0);
    picked.insert(a.indices[0]);
  }
  EXPECT_EQ(picked.size(), 2u);
}

TEST(BruteKnn, Errors) {
  std::vector<Point> ds{{0.0}};
  EXPECT_THROW(brute_knn<EuclideanMetric>(ds, Point{0.0}, 2, Seed{1}), invalid_argument);
  EXPECT_THROW(brute_knn<EuclideanMetric>(ds, Point{0.0}, 0, Seed{1}), invalid_argument);
  EXPECT_THROW(brute_knn<EuclideanMetric>(ds, Point{0.0, 1.0}, 1, Seed{1}), invalid_argument);
}

TEST(SortedIndex, BuildKeepsOrderAndDuplicates) {
  std::vector<BorelCode> codes{{5, 1, 4}, {3, 1, 4}, {5, 1, 4}, {0, 1, 4}};
  auto index = sorted_index_build(codes);
  EXPECT_TRUE(std::is_sorted(index.sorted_values().begin(), index.sorted_values().end()));
  EXPECT_EQ(index.size(), 4u);
  std::set<std::size_t> ids(index.original_indices().begin(), index.original_indices().end());
  EXPECT_EQ(ids.size(), 4u);
}

TEST(SortedIndex, Errors) {
  EXPECT_THROW(sorted_index_build({}), invalid_argument);
  EXPECT_THROW(sorted_index_build({{1, 1, 4}, {1, 2, 4}}), invalid_argument);
  auto index = sorted_index_build({{1, 1, 4}});
  EXPECT_THROW(sorted_knn(index, BorelCode{1, 1, 4}, 2, Seed{1}), invalid_argument);
  EXPECT_THROW(sorted_knn(index, BorelCode{1, 1, 5}, 1, Seed{1}), invalid_argument);
}

TEST(SortedIndex, StoredQueryAtZero) {
  std::vector<BorelCode> codes{{5, 1, 4}, {9, 1, 4}, {9, 1, 4}, {0, 1, 4}};
  auto nn = sorted_knn(sorted_index_build(codes), BorelCode{9, 1, 4}, 1, Seed{3});
  EXPECT_EQ(nn.distances[0], 0.0);
  EXPECT_TRUE(nn.indices[0] == 1 || nn.indices[0] == 2);
}

TEST(SortedIndex, QueryBeyondAllCodes) {
  std::vector<BorelCode> codes{{5, 1, 4}, {9, 1, 4}, {2, 1, 4}, {0, 1, 4}};
  auto nn = sorted_knn(sorted_index_build(codes), BorelCode{15, 1, 4}, 2, Seed{3});
  EXPECT_EQ(nn.indices, (std::vector<std::size_t>{1, 0}));
}

TEST(SortedIndex, MatchesBruteForce) {
  SplitMix64 gen(Seed{31});
  auto codes = random_codes(gen, 500, 3, 16);
  auto index = sorted_index_build(codes);
  for (int t = 0; t < 1000; ++t) {
    Point x{gen.uniform(), gen.uniform(), gen.uniform()};
    auto q = borel_map(x, 16);
    const std::size_t k = 1 + gen.below(40);
    const Seed s{gen()};
    auto a = sorted_knn(index, q, k, s);
    auto b = brute_knn<ReducedMetric>(codes, q, k, s);
    ASSERT_EQ(a.distances, b.distances);
    ASSERT_EQ(a.indices, b.indices);
  }
}

TEST(SortedIndex, MatchesBruteForceUnderHeavyTies) {
  // Coarse codes make many gaps equal; index sets must still agree.
  SplitMix64 gen(Seed{32});
  for (int t = 0; t < 1000; ++t) {
    auto codes = random_codes(gen, 1 + gen.below(60), 1, 3);
    auto q = borel_map(Point{gen.uniform()}, 3);
    const std::size_t k = 1 + gen.below(codes.size());
    const Seed s{gen()};
    auto a = sorted_knn(sorted_index_build(codes), q, k, s);
    auto b = brute_knn<ReducedMetric>(codes, q, k, s);
    ASSERT_EQ(a.distances, b.distances);
    ASSERT_EQ(a.indices, b.indices);
  }
}

TEST(MajorityVote, Examples) {
  EXPECT_EQ(majority_vote(std::vector<Label>{1, 1, 0}, 2, Seed{1}), 1u);
  EXPECT_EQ(majority_vote(std::vector<Label>{2, 2, 1, 0}, 3, Seed{1}), 2u);
  EXPECT_THROW(majority_vote(std::vector<Label>{}, 2, Seed{1}), invalid_argument);
  EXPECT_THROW(majority_vote(std::vector<Label>{3}, 2, Seed{1}), invalid_argument);
}

TEST(MajorityVote, TieResolvedPerSeed) {
  std::set<Label> seen;
  for (std::uint64_t s = 0; s < 64; ++s) {
    Label a = majority_vote(std::vector<Label>{0, 1}, 2, Seed{s});
    EXPECT_EQ(a, majority_vote(std::vector<Label>{0, 1}, 2, Seed{s}));
    seen.insert(a);
  }
  EXPECT_EQ(seen, (std::set<Label>{0, 1}));
}

TEST(WeightedVote, Examples) {
  EXPECT_EQ(weighted_vote(std::vector<double>{0.6, 0.4}, std::vector<Label>{0, 1}, 2, Seed{1}), 0u);
  std::set<Label> seen;
  for (std::uint64_t s = 0; s < 64; ++s) seen.insert(weighted_vote(std::vector<double>{0.5, 0.5}, std::vector<Label>{0, 1}, 2, Seed{s}));
  EXPECT_EQ(seen.size(), 2u);
}

TEST(WeightedVote, Errors) {
  EXPECT_THROW(weighted_vote(std::vector<double>{0.6, 0.6}, std::vector<Label>{0, 1}, 2, Seed{1}), invalid_argument);
  EXPECT_THROW(weighted_vote(std::vector<double>{1.5, -0.5}, std::vector<Label>{0, 1}, 2, Seed{1}), invalid_argument);
  EXPECT_THROW(weighted_vote(std::vector<double>{1.0}, std::vector<Label>{0, 1}, 2, Seed{1}), invalid_argument);
}

TEST(WeightedVote, UniformWeightsAgreeWithMajority) {
  SplitMix64 gen(Seed{41});
  for (int t = 0; t < 10000; ++t) {
    const std::size_t k = 1 + gen.below(30), classes = 2 + gen.below(5);
    std::vector<Label> labels(k);
    for (auto& y : labels) y = static_cast<Label>(gen.below(classes));
    const Seed s{gen()};
    ASSERT_EQ(weighted_vote(std::vector<double>(k, 1.0 / static_cast<double>(k)), labels, classes, s),
              majority_vote(labels, classes, s));
  }
}

TEST(Rules, SqrtSchedule) {
  EXPECT_EQ(sqrt_schedule()(100), 10u);
  EXPECT_EQ(sqrt_schedule()(101), 11u);
  EXPECT_EQ(sqrt_schedule()(1), 1u);
}

TEST(Rules, SingleTrainingPoint) {
  for (auto src : {NeighborSource::brute, NeighborSource::sorted1d, NeighborSource::kann, NeighborSource::adversarial}) {
    RuleOptions opt;
    opt.source = src;
    auto clf = make_knn_rule(opt, constant_schedule(1), Seed{1})(TrainingSet<Point>{{{0.3, 0.3}}, {1}, 2});
    for (double v : {0.0, 0.5, 1.0}) EXPECT_EQ(clf.predict(Point{v, v}), 1u);
  }
}

TEST(Rules, InvalidSchedule) {
  auto rule = make_brute_rule<EuclideanMetric>(constant_schedule(5), Seed{1});
  EXPECT_THROW(rule(TrainingSet<Point>{{{0.0}, {1.0}}, {0, 1}, 2}), invalid_argument);
  EXPECT_THROW(rule(TrainingSet<Point>{{}, {}, 2}), invalid_argument);
  EXPECT_THROW(parse_neighbor_source("lsh"), invalid_argument);
}

TEST(Rules, BruteAndSortedAgreeOnReducedData) {
  SplitMix64 gen(Seed{51});
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 5 + gen.below(100);
    TrainingSet<BorelCode> train{random_codes(gen, n, 2, 16), {}, 2};
    for (std::size_t i = 0; i < n; ++i) train.labels.push_back(static_cast<Label>(gen.below(2)));
    const std::size_t k = 1 + gen.below(n);
    const Seed s{gen()};
    auto a = make_brute_rule<ReducedMetric>(constant_schedule(k), s)(train);
    auto b = make_sorted1d_rule(constant_schedule(k), s)(train);
    auto queries = random_codes(gen, 50, 2, 16);
    for (std::size_t i = 0; i < queries.size(); ++i) ASSERT_EQ(a.predict(queries[i], i), b.predict(queries[i], i));
  }
}

TEST(Transport, IdentityMapChangesNothing) {
  SplitMix64 gen(Seed{61});
  TrainingSet<Point> train{{}, {}, 3};
  for (int i = 0; i < 50; ++i) {
    train.samples.push_back({gen.uniform(), gen.uniform()});
    train.labels.push_back(static_cast<Label>(gen.below(3)));
  }
  auto base = make_brute_rule<EuclideanMetric>(constant_schedule(5), Seed{2});
  auto lifted = transport_rule<Point, Point>(base, [](const Point& x) { return x; });
  auto a = base(train), b = lifted(train);
  for (int i = 0; i < 200; ++i) {
    Point q{gen.uniform(), gen.uniform()};
    ASSERT_EQ(a.predict(q, i), b.predict(q, i));
  }
}

TEST(Transport, SameLearningErrorThroughBorelMap) {
  SplitMix64 gen(Seed{62});
  const std::function<BorelCode(const Point&)> phi = [](const Point& x) { return borel_map(x, 16); };
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + gen.below(5), n = 1 + gen.below(200);
    auto draw = [&](std::size_t m) {
      TrainingSet<Point> s{{}, {}, 2};
      for (std::size_t i = 0; i < m; ++i) {
        Point x(d);
        for (double& v : x) v = gen.uniform();
        s.samples.push_back(x);
        s.labels.push_back(static_cast<Label>(gen.below(2)));
      }
      return s;
    };
    auto train = draw(n), test = draw(40);
    auto base = make_sorted1d_rule(constant_schedule(1 + gen.below(n)), Seed{gen()});
    auto lifted = transport_rule<Point, BorelCode>(base, phi);
    TrainingSet<BorelCode> mtrain{{}, train.labels, 2}, mtest{{}, test.labels, 2};
    for (auto& x : train.samples) mtrain.samples.push_back(phi(x));
    for (auto& x : test.samples) mtest.samples.push_back(phi(x));
    ASSERT_EQ(empirical_error(lifted(train), test), empirical_error(base(mtrain), mtest));
  }
}

TEST(EmpiricalError, Examples) {
  TrainingSet<Point> test{{{0.0}, {1.0}, {2.0}, {3.0}}, {0, 1, 0, 1}, 2};
  Classifier<Point> perfect([&](const Point& x, std::uint64_t) { return static_cast<Label>(x[0]) % 2; });
  Classifier<Point> zero([](const Point&, std::uint64_t) { return Label{0}; });
  EXPECT_EQ(empirical_error(perfect, test), 0.0);
  EXPECT_EQ(empirical_error(zero, test), 0.5);
  EXPECT_THROW(empirical_error(zero, TrainingSet<Point>{}), invalid_argument);
}
