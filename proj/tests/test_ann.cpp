#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "borelknn/ann/adversarial.hpp"
#include "borelknn/ann/index.hpp"
#include "borelknn/ann/projection.hpp"
#include "borelknn/ann/thermometer.hpp"
#include "borelknn/instability/instability.hpp"

using namespace borelknn;

namespace {

BitString random_bits(SplitMix64& gen, std::size_t len, double p = 0.5) {
  BitString b(len);
  for (std::size_t i = 0; i < len; ++i) b.set(i, gen.bernoulli(p));
  return b;
}

// Flips exactly h distinct positions of x.
BitString flip(SplitMix64& gen, BitString x, std::size_t h) {
  auto perm = random_permutation(x.size(), Seed{gen()});
  for (std::size_t i = 0; i < h; ++i) x.set(perm[i], !x.test(perm[i]));
  return x;
}

std::vector<BitString> encoded_gaussian(std::size_t n, std::size_t d, unsigned levels, Seed seed) {
  SplitMix64 gen(seed);
  std::vector<BitString> out;
  for (std::size_t i = 0; i < n; ++i) {
    Point x(d);
    for (double& v : x) v = std::clamp(0.5 + 0.15 * gen.normal(), 0.0, 1.0);
    out.push_back(thermometer_encode(x, levels));
  }
  return out;
}

}  // namespace

TEST(Thermometer, Examples) {
  EXPECT_EQ(thermometer_encode(Point{0.5}, 4).to_string(), "1100");
  EXPECT_EQ(hamming_distance(thermometer_encode(Point{0.5}, 4), thermometer_encode(Point{0.75}, 4)), 1u);
  EXPECT_EQ(thermometer_encode(Point{0.0, 0.0, 0.0}, 5).popcount(), 0u);
  EXPECT_EQ(thermometer_encode(Point{1.0, 0.0}, 3).to_string(), "111000");
  EXPECT_THROW(thermometer_encode(Point{1.2}, 4), invalid_argument);
}

TEST(Thermometer, L1Identity) {
  SplitMix64 gen(Seed{4});
  for (int t = 0; t < 100000; ++t) {
    const std::size_t d = 1 + gen.below(6);
    const unsigned levels = 1 + static_cast<unsigned>(gen.below(20));
    Point x(d), y(d);
    std::size_t l1 = 0;
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = gen.uniform();
      y[i] = gen.uniform();
      auto a = thermometer_level(x[i], levels), b = thermometer_level(y[i], levels);
      l1 += a > b ? a - b : b - a;
    }
    ASSERT_EQ(hamming_distance(thermometer_encode(x, levels), thermometer_encode(y, levels)), l1);
  }
}

TEST(Projection, TargetDimension) {
  AnnParams p;
  p.epsilon = 0.125;
  EXPECT_EQ(projected_dimension(1024, p), 2560u);
  AnnParams q;  // c = 0.5 gives epsilon = c / 4 = 0.125
  EXPECT_EQ(projected_dimension(1024, q), 2560u);
  EXPECT_EQ(projected_dimension(1, q), 1u);
  EXPECT_EQ(q.resolved().repeats, 4u);
}

TEST(Projection, RangeOneIsAllOnes) {
  auto m = sample_projection(7, 100, 1, AnnParams{}, Seed{1});
  EXPECT_EQ(m.ones(), m.rows() * m.cols());
}

TEST(Projection, BernoulliRate) {
  // 25 x 4000 = 1e5 entries at range 4.
  AnnParams p;
  p.epsilon = 0.5;
  p.const_c = 250.0;  // k' = 250 / 0.25 * log2 16 = 4000
  auto m = sample_projection(25, 16, 4, p, Seed{8});
  ASSERT_EQ(m.cols(), 4000u);
  const double rate = static_cast<double>(m.ones()) / 1e5;
  EXPECT_NEAR(rate, 0.25, 0.01);
}

TEST(Projection, Errors) {
  EXPECT_THROW(sample_projection(4, 10, 0, AnnParams{}, Seed{1}), invalid_argument);
  EXPECT_THROW(sample_projection(4, 10, 5, AnnParams{}, Seed{1}), invalid_argument);
  auto m = sample_projection(4, 10, 2, AnnParams{}, Seed{1});
  EXPECT_THROW(project(m, BitString(5)), invalid_argument);
  AnnParams bad;
  bad.delta = 1.0;
  EXPECT_THROW(bad.resolved(), invalid_argument);
}

TEST(Projection, Deterministic) {
  EXPECT_EQ(sample_projection(50, 100, 7, AnnParams{}, Seed{3}), sample_projection(50, 100, 7, AnnParams{}, Seed{3}));
  EXPECT_FALSE(sample_projection(50, 100, 7, AnnParams{}, Seed{3}) ==
               sample_projection(50, 100, 7, AnnParams{}, Seed{4}));
}

TEST(Projection, ZeroAndIdentity) {
  SplitMix64 gen(Seed{2});
  auto m = sample_projection(70, 100, 9, AnnParams{}, Seed{5});
  EXPECT_EQ(project(m, BitString(70)).popcount(), 0u);
  auto id = BinaryMatrix::identity(130);
  for (int t = 0; t < 100; ++t) {
    auto x = random_bits(gen, 130);
    EXPECT_EQ(project(id, x), x);
  }
}

TEST(Projection, Linearity) {
  SplitMix64 gen(Seed{6});
  for (int t = 0; t < 10000; ++t) {
    const std::size_t rows = 1 + gen.below(150);
    auto m = sample_projection(rows, 2 + gen.below(40), 1 + gen.below(rows), AnnParams{}, Seed{gen()});
    auto x = random_bits(gen, rows), y = random_bits(gen, rows);
    ASSERT_EQ(project(m, x ^ y), project(m, x) ^ project(m, y));
  }
}

TEST(Projection, BulkMatchesSingle) {
  SplitMix64 gen(Seed{7});
  for (std::size_t rows : {1, 7, 8, 9, 63, 64, 65, 200}) {
    auto m = sample_projection(rows, 500, 1 + gen.below(rows), AnnParams{}, Seed{gen()});
    std::vector<BitString> xs;
    for (int i = 0; i < 40; ++i) xs.push_back(random_bits(gen, rows));
    auto bulk = project_all(m, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) ASSERT_EQ(bulk[i], project(m, xs[i]));
  }
}

TEST(Projection, FlipProbabilityMatchesSimulation) {
  SplitMix64 gen(Seed{9});
  const std::size_t rows = 120, range = 10, h = 7;
  AnnParams p;
  auto m = sample_projection(rows, 1u << 20, range, p, Seed{10});
  auto x = random_bits(gen, rows);
  auto y = flip(gen, x, h);
  const double observed = static_cast<double>(hamming_distance(project(m, x), project(m, y))) / m.cols();
  EXPECT_NEAR(observed, projected_flip_probability(h, range), 0.015);
}

TEST(Projection, DistancePreservationSeparatesScales) {
  // Pairs at distance <= l/2 versus >= (1 + 4 eps) l/2 on either side of one threshold.
  SplitMix64 gen(Seed{11});
  const std::size_t dim = 256, range = 64, n = 1000;
  AnnParams p;  // eps = 0.125
  const double eps = p.resolved().epsilon;
  const auto near = static_cast<std::size_t>(range / 2);
  const auto far = static_cast<std::size_t>(std::ceil((1.0 + 4.0 * eps) * range / 2.0));
  const std::size_t cols = projected_dimension(n, p);
  const double threshold =
      cols * (projected_flip_probability(near, range) + projected_flip_probability(far, range)) / 2.0;
  int errors = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    auto m = sample_projection(dim, n, range, p, Seed{gen()});
    auto x = random_bits(gen, dim);
    auto pn = project(m, flip(gen, x, near)), pf = project(m, flip(gen, x, far)), px = project(m, x);
    if (static_cast<double>(hamming_distance(px, pn)) > threshold) ++errors;
    if (static_cast<double>(hamming_distance(px, pf)) <= threshold) ++errors;
  }
  EXPECT_LE(static_cast<double>(errors) / (2.0 * trials), p.delta);
}

TEST(AnnIndex, StructureSmall) {
  std::vector<BitString> data{BitString::from_string("0000"), BitString::from_string("0110"),
                              BitString::from_string("1111")};
  auto index = build_ann_index(data, AnnParams{}, 1, Seed{1});
  EXPECT_EQ(index.range_count(), 4u);
  for (std::size_t l = 1; l <= 4; ++l)
    for (std::size_t r = 0; r < index.repeats(); ++r) {
      const auto& t = index.table(l, r);
      std::multiset<std::uint32_t> all;
      for (std::size_t s = 0; s < t.distinct(); ++s)
        for (auto i : t.members(s)) all.insert(i);
      EXPECT_EQ(all, (std::multiset<std::uint32_t>{0, 1, 2}));
      for (std::size_t i = 0; i < data.size(); ++i) {
        auto bucket = t.lookup(project(t.matrix(), data[i]));
        EXPECT_NE(std::find(bucket.begin(), bucket.end(), i), bucket.end());
      }
    }
}

TEST(AnnIndex, Errors) {
  std::vector<BitString> data{BitString(4), BitString(4)};
  EXPECT_THROW(build_ann_index(data, AnnParams{}, 3, Seed{1}), invalid_argument);
  EXPECT_THROW(build_ann_index({BitString(4), BitString(5)}, AnnParams{}, 1, Seed{1}), invalid_argument);
  auto index = build_ann_index(data, AnnParams{}, 1, Seed{1});
  EXPECT_THROW(kann_query(index, BitString(4), 3, Seed{1}), invalid_argument);
  EXPECT_THROW(kann_query(index, BitString(6), 1, Seed{1}), invalid_argument);
}

TEST(AnnIndex, DeterministicDigestAndRoundTrip) {
  auto data = encoded_gaussian(300, 4, 8, Seed{5});
  auto a = build_ann_index(data, AnnParams{}, 5, Seed{9}, 1);
  auto b = build_ann_index(data, AnnParams{}, 5, Seed{9}, 3);
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_TRUE(a == b);
  auto c = build_ann_index(data, AnnParams{}, 5, Seed{10});
  EXPECT_NE(a.digest(), c.digest());

  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  a.write(buf);
  auto back = AnnIndex::read(buf);
  EXPECT_TRUE(back == a);
  EXPECT_EQ(back.digest(), a.digest());
  for (std::size_t i = 0; i < 20; ++i)
    EXPECT_EQ(kann_query(back, data[i], 5, Seed{i}).indices, kann_query(a, data[i], 5, Seed{i}).indices);
}

TEST(AnnIndex, RejectsCorruptFiles) {
  auto a = build_ann_index(encoded_gaussian(50, 2, 4, Seed{1}), AnnParams{}, 2, Seed{2});
  std::ostringstream out(std::ios::binary);
  a.write(out);
  const std::string bytes = out.str();

  std::istringstream bad_magic("NOTANIDX" + bytes.substr(8), std::ios::binary);
  EXPECT_THROW(AnnIndex::read(bad_magic), format_error);

  std::string wrong_version = bytes;
  wrong_version[8] = 9;
  std::istringstream v(wrong_version, std::ios::binary);
  EXPECT_THROW(AnnIndex::read(v), format_error);

  std::istringstream truncated(bytes.substr(0, bytes.size() / 2), std::ios::binary);
  EXPECT_THROW(AnnIndex::read(truncated), format_error);

  EXPECT_THROW(AnnIndex::load("/nonexistent/index.bin"), format_error);
}

TEST(AnnIndex, SaveLoadFile) {
  auto a = build_ann_index(encoded_gaussian(40, 2, 4, Seed{1}), AnnParams{}, 2, Seed{2});
  const std::string path = ::testing::TempDir() + "/ann_index.bin";
  a.save(path);
  EXPECT_TRUE(AnnIndex::load(path) == a);
  std::remove(path.c_str());
}

TEST(KannQuery, SinglePoint) {
  std::vector<BitString> data{BitString::from_string("10110")};
  auto index = build_ann_index(data, AnnParams{}, 1, Seed{1});
  auto nn = kann_query(index, BitString::from_string("00001"), 1, Seed{2});
  EXPECT_EQ(nn.indices, (std::vector<std::size_t>{0}));
}

TEST(KannQuery, StoredPointFoundAtDistanceZero) {
  auto data = encoded_gaussian(500, 5, 8, Seed{3});
  auto index = build_ann_index(data, AnnParams{}, 1, Seed{4});
  for (std::size_t i = 0; i < 50; ++i) {
    auto nn = kann_query(index, data[i], 1, Seed{i});
    ASSERT_EQ(nn.distances[0], 0.0);
    EXPECT_EQ(data[nn.indices[0]], data[i]);
  }
}

TEST(KannQuery, DistinctSortedTrueDistances) {
  auto data = encoded_gaussian(400, 6, 8, Seed{5});
  auto queries = encoded_gaussian(40, 6, 8, Seed{6});
  auto index = build_ann_index(data, AnnParams{}, 7, Seed{7});
  for (std::size_t i = 0; i < queries.size(); ++i) {
    auto nn = kann_query(index, queries[i], 7, Seed{i});
    ASSERT_EQ(nn.size(), 7u);
    EXPECT_EQ(std::set<std::size_t>(nn.indices.begin(), nn.indices.end()).size(), 7u);
    EXPECT_TRUE(std::is_sorted(nn.distances.begin(), nn.distances.end()));
    for (std::size_t j = 0; j < nn.size(); ++j)
      EXPECT_EQ(nn.distances[j], static_cast<double>(hamming_distance(queries[i], data[nn.indices[j]])));
    // Never better than exact search.
    EXPECT_GE(nn.distances.back(), eps_knn<HammingMetric>(data, queries[i], 7));
  }
}

TEST(KannQuery, RangeSearchPredicateIsMonotone) {
  auto data = encoded_gaussian(400, 8, 8, Seed{8});
  auto queries = encoded_gaussian(20, 8, 8, Seed{9});
  const std::size_t k = 5;
  auto index = build_ann_index(data, AnnParams{}, k, Seed{10});
  for (const auto& q : queries)
    for (std::size_t rep = 0; rep < index.repeats(); ++rep) {
      bool reached = false;
      for (std::size_t l = 1; l <= index.dim(); ++l) {
        const bool holds = index.image_ball_count(q, l, rep) >= k;
        ASSERT_FALSE(reached && !holds) << "range " << l;
        reached = reached || holds;
      }
    }
}

TEST(Adversarial, UniformLabelsMatchExactSearch) {
  SplitMix64 gen(Seed{12});
  std::vector<Point> data;
  for (int i = 0; i < 200; ++i) data.push_back({gen.uniform(), gen.uniform()});
  std::vector<Label> labels(200, 1);
  for (int t = 0; t < 50; ++t) {
    Point q{gen.uniform(), gen.uniform()};
    const Seed s{gen()};
    auto adv = adversarial_kann<EuclideanMetric>(data, labels, q, 10, 0.5, 1, s);
    auto exact = brute_knn<EuclideanMetric>(data, q, 10, s);
    EXPECT_EQ(adv.indices, exact.indices);
  }
}

TEST(Adversarial, ZeroSlackIsExactKnn) {
  SplitMix64 gen(Seed{13});
  std::vector<Point> data;
  std::vector<Label> labels;
  for (int i = 0; i < 200; ++i) {
    data.push_back({gen.uniform(), gen.uniform()});
    labels.push_back(static_cast<Label>(gen.below(2)));
  }
  for (int t = 0; t < 50; ++t) {
    Point q{gen.uniform(), gen.uniform()};
    auto adv = adversarial_kann<EuclideanMetric>(data, labels, q, 8, 0.0, 1, Seed{1});
    auto exact = brute_knn<EuclideanMetric>(data, q, 8, Seed{1});
    EXPECT_EQ(std::set<std::size_t>(adv.indices.begin(), adv.indices.end()),
              std::set<std::size_t>(exact.indices.begin(), exact.indices.end()));
  }
}

TEST(Adversarial, ConstructedBallAllBiased) {
  // k = 4 nearest are label 0 at distance 1..4 (eps_kNN = 4); the 1.5 * 4 = 6
  // ball adds 8 more points, 4 of them label 1 at distances 5 and 6.
  const std::size_t k = 4;
  std::vector<Point> data;
  std::vector<Label> labels;
  for (int i = 1; i <= 4; ++i) data.push_back({static_cast<double>(i)}), labels.push_back(0);
  for (int i = 0; i < 4; ++i) data.push_back({i % 2 == 0 ? 5.0 : 6.0}), labels.push_back(1);
  for (int i = 0; i < 4; ++i) data.push_back({-5.5}), labels.push_back(0);
  data.push_back({50.0}), labels.push_back(1);
  auto adv = adversarial_kann<EuclideanMetric>(data, labels, Point{0.0}, k, 0.5, 1, Seed{3});
  ASSERT_EQ(adv.size(), k);
  for (auto i : adv.indices) EXPECT_EQ(labels[i], 1u);
}

TEST(Adversarial, AlwaysLegal) {
  SplitMix64 gen(Seed{14});
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + gen.below(150);
    std::vector<Point> data;
    std::vector<Label> labels;
    for (std::size_t i = 0; i < n; ++i) {
      data.push_back({std::floor(gen.uniform() * 10), std::floor(gen.uniform() * 10)});
      labels.push_back(static_cast<Label>(gen.below(3)));
    }
    Point q{gen.uniform() * 10, gen.uniform() * 10};
    const std::size_t k = 1 + gen.below(n);
    const double c = gen.uniform();
    auto adv = adversarial_kann<EuclideanMetric>(data, labels, q, k, c, 2, Seed{gen()});
    const double bound = (1.0 + c) * eps_knn<EuclideanMetric>(data, q, k);
    ASSERT_EQ(adv.size(), k);
    EXPECT_EQ(std::set<std::size_t>(adv.indices.begin(), adv.indices.end()).size(), k);
    for (double dist : adv.distances) EXPECT_LE(dist, bound);
  }
}
