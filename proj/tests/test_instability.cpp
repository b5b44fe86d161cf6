#include <gtest/gtest.h>

#include "borelknn/core/random.hpp"
#include "borelknn/instability/instability.hpp"

using namespace borelknn;

namespace {

std::vector<Point> gaussian(std::size_t n, std::size_t d, Seed seed) {
  SplitMix64 gen(seed);
  std::vector<Point> out(n, Point(d));
  for (auto& x : out)
    for (double& v : x) v = gen.normal();
  return out;
}

}  // namespace

TEST(EpsKnn, Examples) {
  std::vector<Point> ds{{0.0}, {1.0}, {2.0}};
  EXPECT_EQ(eps_knn<EuclideanMetric>(ds, Point{1.0}, 1), 0.0);
  EXPECT_EQ(eps_knn<EuclideanMetric>(ds, Point{0.0}, 2), 1.0);
  EXPECT_THROW(eps_knn<EuclideanMetric>(ds, Point{0.0}, 4), invalid_argument);
}

TEST(EpsKnn, NondecreasingInK) {
  SplitMix64 gen(Seed{1});
  for (int t = 0; t < 1000; ++t) {
    auto ds = gaussian(1 + gen.below(40), 1 + gen.below(5), Seed{gen()});
    auto q = gaussian(1, ds[0].size(), Seed{gen()})[0];
    double prev = 0.0;
    for (std::size_t k = 1; k <= ds.size(); ++k) {
      double e = eps_knn<EuclideanMetric>(ds, q, k);
      ASSERT_GE(e, prev);
      prev = e;
      ASSERT_GE(ball_count<EuclideanMetric>(ds, q, e), k);
    }
  }
}

TEST(CUnstable, Examples) {
  EXPECT_TRUE(is_c_unstable<EuclideanMetric>(std::vector<Point>{{3.0}}, Point{0.0}, 0.5));
  EXPECT_FALSE(is_c_unstable<EuclideanMetric>(std::vector<Point>{{0.0}, {10.0}, {20.0}}, Point{0.1}, 0.5));
  std::vector<Point> ring{{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  for (double c : {0.0, 0.3, 2.0}) EXPECT_TRUE(is_c_unstable<EuclideanMetric>(ring, Point{0.0, 0.0}, c));
}

TEST(Profile, ZeroSlackCountsExactlyK) {
  SplitMix64 gen(Seed{2});
  auto data = gaussian(300, 3, Seed{3});
  auto queries = gaussian(50, 3, Seed{4});
  auto p = instability_profile<EuclideanMetric>(data, queries, 7, 0.0);
  for (const auto& r : p.queries) EXPECT_EQ(r.inflated_count, 7u);
  EXPECT_EQ(p.mean_inflated_count, 7.0);
}

TEST(Profile, Invariants) {
  auto data = gaussian(400, 6, Seed{5});
  auto queries = gaussian(60, 6, Seed{6});
  auto p = instability_profile<EuclideanMetric>(data, queries, 10, 0.5, 100, 3);
  for (const auto& r : p.queries) {
    EXPECT_GE(r.inflated_count, 10u);
    EXPECT_LE(r.eps_nn, r.eps_knn);
  }
  EXPECT_GE(p.unstable_fraction, 0.0);
  EXPECT_LE(p.unstable_fraction, 1.0);
  ASSERT_EQ(p.radius_grid.size(), 100u);
  EXPECT_TRUE(std::is_sorted(p.mean_count.begin(), p.mean_count.end()));
  EXPECT_EQ(p.mean_count.back(), 400.0);
  EXPECT_EQ(p.mean_inflated_radius, 1.5 * p.mean_eps_knn);
}

TEST(Profile, ThreadCountDoesNotChangeResult) {
  auto data = gaussian(300, 4, Seed{7});
  auto queries = gaussian(40, 4, Seed{8});
  auto a = instability_profile<EuclideanMetric>(data, queries, 5, 0.5, 50, 1);
  auto b = instability_profile<EuclideanMetric>(data, queries, 5, 0.5, 50, 4);
  EXPECT_EQ(a.mean_count, b.mean_count);
  EXPECT_EQ(a.mean_inflated_count, b.mean_inflated_count);
}

TEST(Profile, UnstableFractionMonotoneInC) {
  auto data = gaussian(300, 30, Seed{9});
  auto queries = gaussian(50, 30, Seed{10});
  double prev = 0.0;
  for (double c : {0.0, 0.1, 0.2, 0.3, 0.5, 0.8, 1.2}) {
    auto p = instability_profile<EuclideanMetric>(data, queries, 5, c, 0);
    EXPECT_GE(p.unstable_fraction, prev);
    prev = p.unstable_fraction;
  }
}

TEST(Profile, LowDimensionModestCount) {
  auto data = gaussian(2000, 2, Seed{11});
  auto queries = gaussian(300, 2, Seed{12});
  auto p = instability_profile<EuclideanMetric>(data, queries, 20, 0.5, 0);
  EXPECT_GE(p.mean_inflated_count, 20.0);
  EXPECT_LE(p.mean_inflated_count, 60.0);
}

TEST(Profile, LeaveOneOut) {
  auto data = gaussian(100, 3, Seed{13});
  auto p = instability_profile_loo<EuclideanMetric>(data, 4, 0.0, 10);
  EXPECT_EQ(p.queries.size(), 100u);
  EXPECT_EQ(p.mean_count.back(), 99.0);
  EXPECT_THROW(instability_profile_loo<EuclideanMetric>(data, 100, 0.5), invalid_argument);
}

TEST(Profile, Errors) {
  auto data = gaussian(10, 2, Seed{1});
  EXPECT_THROW(instability_profile<EuclideanMetric>(data, {}, 1, 0.5), invalid_argument);
  EXPECT_THROW(instability_profile<EuclideanMetric>(data, data, 11, 0.5), invalid_argument);
}

TEST(VcBound, OracleValue) {
  // ceil(max{24/0.1 lg(80e), 40 lg 40}), evaluated at 50 digits before the build.
  EXPECT_EQ(vc_sample_bound(2, 0.1, 0.05), 1864u);
}

TEST(VcBound, MonotoneAndStructure) {
  for (double eps : {0.05, 0.1, 0.2, 0.4})
    for (double delta : {0.01, 0.05, 0.2}) {
      EXPECT_GE(vc_sample_bound(3, eps, delta), vc_sample_bound(3, eps * 1.5, delta));
      EXPECT_GE(vc_sample_bound(3, eps, delta), vc_sample_bound(3, eps, delta * 2.0));
    }
  // With the first term dominant, d -> d+1 adds 8/eps lg(8e/eps).
  const double step = 8.0 / 0.1 * std::log2(8.0 * std::numbers::e / 0.1);
  const double diff = static_cast<double>(vc_sample_bound(5, 0.1, 0.05)) - static_cast<double>(vc_sample_bound(4, 0.1, 0.05));
  EXPECT_NEAR(diff, step, 1.0);
  // Tiny delta makes the second term dominant, so d no longer matters.
  EXPECT_EQ(vc_sample_bound(0, 0.5, 1e-300), vc_sample_bound(1, 0.5, 1e-300));
  EXPECT_THROW(vc_sample_bound(2, 0.0, 0.5), invalid_argument);
  EXPECT_THROW(vc_sample_bound(2, 0.5, 1.0), invalid_argument);
}
