#include <gtest/gtest.h>

#include <random>

#include "p2pq/bounds.hpp"
#include "p2pq/errors.hpp"
#include "p2pq/qbd.hpp"

using namespace p2pq;

TEST(Bounds, Examples) {
  const auto a = bounds::queue_length_bounds(ModelParams::from_loads(5, 10, 10, 1));
  EXPECT_DOUBLE_EQ(a.lower, 1);
  EXPECT_DOUBLE_EQ(a.upper, 11);
  const auto b = bounds::queue_length_bounds(ModelParams::from_loads(9, 10, 10, 1));
  EXPECT_NEAR(b.lower, 9, 1e-12);
  EXPECT_NEAR(b.upper, 99, 1e-11);
}

TEST(Bounds, RatioIsServiceOverLifetimePlusOne) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.01, 50);
  for (int i = 0; i < 200; ++i) {
    const double rho_s = u(gen), mu_c = u(gen), mu_s = u(gen);
    const double rho_c = rho_s * std::uniform_real_distribution<double>(0.01, 0.99)(gen);
    const auto b = bounds::queue_length_bounds(ModelParams::from_loads(rho_c, mu_c, rho_s, mu_s));
    EXPECT_NEAR(b.upper / b.lower, mu_c / mu_s + 1, 1e-9 * (mu_c / mu_s + 1));
  }
}

TEST(Bounds, UnstableInputThrows) {
  EXPECT_THROW(bounds::queue_length_bounds(ModelParams(10, 1, 10, 1)), NotStrictlyStable);
  EXPECT_THROW(bounds::queue_length_bounds(ModelParams(12, 1, 10, 1)), NotStrictlyStable);
}

TEST(Bounds, LowerIncreasesWithLoad) {
  double prev = 0;
  for (double rho_c = 0.1; rho_c < 9.9; rho_c += 0.1) {
    const double lower = bounds::queue_length_bounds(ModelParams::from_loads(rho_c, 10, 10, 1)).lower;
    EXPECT_GT(lower, prev);
    prev = lower;
  }
}

TEST(Sojourn, LittlesLaw) {
  EXPECT_DOUBLE_EQ(bounds::sojourn_from_queue_length(1, 0.5), 2);
  EXPECT_THROW(bounds::sojourn_from_queue_length(1, 0), InvalidParams);
  EXPECT_THROW(bounds::sojourn_from_queue_length(-1, 1), InvalidParams);
}

TEST(Sojourn, LowerBoundSimplifies) {
  const ModelParams p = ModelParams::from_loads(5, 10, 10, 1);
  EXPECT_NEAR(bounds::sojourn_bounds(p).lower, 1.0 / (10 * (10 - 5)), 1e-15);
}

TEST(StaticBaseline, EqualsLowerBoundAndVanishesWithLoad) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.1, 20);
  for (int i = 0; i < 100; ++i) {
    const double rho_s = u(gen);
    const auto p = ModelParams::from_loads(rho_s * 0.5, u(gen), rho_s, u(gen));
    EXPECT_DOUBLE_EQ(bounds::static_baseline(p), bounds::queue_length_bounds(p).lower);
  }
  EXPECT_LT(bounds::static_baseline(ModelParams::from_loads(1e-9, 1, 10, 1)), 1e-9);
}

TEST(StaticBaseline, DominatedBySolvedQueueLength) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.2, 5);
  for (int i = 0; i < 20; ++i) {
    const double rho_s = 2 * u(gen);
    const auto p = ModelParams::from_loads(rho_s * std::uniform_real_distribution<double>(0.05, 0.9)(gen),
                                           u(gen), rho_s, u(gen));
    const double E = qbd::solve(p).moments.E_nc;
    EXPECT_GT(E, bounds::static_baseline(p));
    EXPECT_TRUE(bounds::check_bounds(p, E).inside);
  }
}

TEST(Identities, EmptyQueueServerRatio) {
  const auto m = qbd::solve(ModelParams(8, 1, 10, 1)).moments;
  EXPECT_NEAR(bounds::empty_queue_server_ratio(m), m.G0_2 / m.G0_1, 1e-15);
}
