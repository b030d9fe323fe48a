#include <gtest/gtest.h>

#include "p2pq/errors.hpp"
#include "p2pq/random.hpp"
#include "p2pq/workload.hpp"

using namespace p2pq;

TEST(Workload, TagsFollowShape) {
  EXPECT_EQ(WorkloadDist::exponential(2).tag(), ProcessTag::M);
  EXPECT_EQ(WorkloadDist::deterministic(0.5).tag(), ProcessTag::D);
  EXPECT_EQ(WorkloadDist::discrete({{0.5, 0.5}, {1.5, 0.5}}).tag(), ProcessTag::G);
  EXPECT_EQ(WorkloadDist::hyperexponential({{1, 0.5}, {3, 0.5}}).tag(), ProcessTag::G);
}

TEST(Workload, ProbabilitiesMustSumToOne) {
  EXPECT_THROW(WorkloadDist::discrete({{1, 0.5}, {2, 0.4}}), InvalidParams);
  EXPECT_THROW(WorkloadDist::hyperexponential({{1, 0.7}, {2, 0.4}}), InvalidParams);
  EXPECT_NO_THROW(WorkloadDist::discrete({{1, 0.3}, {2, 0.7 + 5e-13}}));
}

TEST(Workload, ValuesMustBePositive) {
  EXPECT_THROW(WorkloadDist::exponential(0), InvalidParams);
  EXPECT_THROW(WorkloadDist::deterministic(-1), InvalidParams);
  EXPECT_THROW(WorkloadDist::discrete({{0, 1}}), InvalidParams);
  EXPECT_THROW(WorkloadDist::discrete({}), InvalidParams);
  EXPECT_THROW(WorkloadDist::hyperexponential({{-2, 1}}), InvalidParams);
}

TEST(Workload, MomentsByHand) {
  const auto d = WorkloadDist::discrete({{0.5, 0.25}, {1.5, 0.75}});
  EXPECT_DOUBLE_EQ(d.mean(), 0.125 + 1.125);
  EXPECT_DOUBLE_EQ(d.second_moment(), 0.25 * 0.25 + 0.75 * 2.25);
  const auto e = WorkloadDist::exponential(4);
  EXPECT_DOUBLE_EQ(e.mean(), 0.25);
  EXPECT_DOUBLE_EQ(e.scv(), 1.0);
  EXPECT_DOUBLE_EQ(WorkloadDist::deterministic(3).scv(), 0.0);
}

TEST(Workload, FromParamsHasMeanOneOverMuC) {
  const ModelParams p(5, 10, 10, 1);
  EXPECT_DOUBLE_EQ(WorkloadDist::from_params(p).mean(), 0.1);
}

TEST(Workload, BalancedHyperexponentialMatchesMeanAndScv) {
  const auto h = WorkloadDist::balanced_hyperexponential(0.1, 4.0);
  EXPECT_NEAR(h.mean(), 0.1, 1e-14);
  EXPECT_NEAR(h.scv(), 4.0, 1e-12);
  EXPECT_THROW(WorkloadDist::balanced_hyperexponential(1.0, 0.5), InvalidParams);
}

TEST(Workload, SampleMeanConverges) {
  const auto h = WorkloadDist::balanced_hyperexponential(2.0, 4.0);
  Rng rng(11);
  const int n = 400000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = h.sample(rng);
    ASSERT_GT(x, 0.0);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  EXPECT_NEAR(mean, 2.0, 4 * sd / std::sqrt(n));
}

TEST(Workload, DiscreteSamplesOnlyAtoms) {
  const auto d = WorkloadDist::discrete({{0.5, 0.2}, {1.5, 0.8}});
  Rng rng(3);
  int low = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = d.sample(rng);
    ASSERT_TRUE(x == 0.5 || x == 1.5);
    low += x == 0.5;
  }
  EXPECT_NEAR(low / double(n), 0.2, 4 * std::sqrt(0.16 / n));
}
