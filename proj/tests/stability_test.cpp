#include <gtest/gtest.h>

#include "oracles.hpp"
#include "p2pq/errors.hpp"
#include "p2pq/stability.hpp"

using namespace p2pq;
using namespace p2pq::stability;

namespace {

const ModelParams kFast = ModelParams::from_loads(5, 10, 10, 1);
const ModelParams kFig3(8, 1, 10, 1);

WorkloadDist two_atoms(double mean) {
  return WorkloadDist::discrete({{0.5 * mean, 0.5}, {1.5 * mean, 0.5}});
}

}  // namespace

TEST(Constants, Examples) {
  const auto a = default_constants(kFig3);
  EXPECT_NEAR(a.k, 15, 1e-12);
  EXPECT_NEAR(a.m, -6, 1e-12);
  const auto b = default_constants(kFast);
  EXPECT_NEAR(b.k, 1.5, 1e-12);
  EXPECT_NEAR(b.m, 6, 1e-12);
  EXPECT_THROW(default_constants(ModelParams(10, 1, 10, 1)), NotStrictlyStable);
}

TEST(Constants, DefaultServerCapExceedsThreshold) {
  for (const auto& p : {kFast, kFig3}) {
    EXPECT_GT(default_server_cap(p), server_cap_threshold(p));
  }
}

TEST(Lyapunov, Values) {
  auto config = make_lyapunov_config(kFig3, WorkloadDist::deterministic(1));
  EXPECT_NEAR(lyapunov_value({1.0, 0}, config), 115, 1e-12);
  config.m = 0;
  EXPECT_EQ(lyapunov_value({0.0, 10}, config), 0);
  double prev = -1e300;
  for (double x = 0; x < 5; x += 0.25) {
    const double v = lyapunov_value({x, 4}, config);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Kernel, ProbabilitiesSumToOne) {
  const auto config = make_lyapunov_config(kFast, two_atoms(0.1));
  for (std::int64_t n_s : {0L, 1L, 7L, static_cast<std::int64_t>(config.server_cap)}) {
    for (double x : {0.0, config.dt * 0.5, 0.3}) {
      double total = 0;
      for (const auto& t : transition_kernel({x, n_s}, config)) {
        EXPECT_GE(t.probability, 0);
        EXPECT_GE(t.next.X, 0);
        EXPECT_LE(t.next.n_s, config.server_cap);
        total += t.probability;
      }
      EXPECT_NEAR(total, 1.0, 1e-14);
    }
  }
}

TEST(Kernel, RejectsOversizedSlot) {
  EXPECT_THROW(make_lyapunov_config(kFast, WorkloadDist::deterministic(0.1), {.dt = 0.05}),
               InvalidConfig);
}

TEST(Kernel, RejectsContinuousWorkload) {
  EXPECT_THROW(make_lyapunov_config(kFast, WorkloadDist::exponential(10)), InvalidConfig);
}

TEST(Drift, InteriorMatchesClosedFormLinearlyInDt) {
  const auto workload = WorkloadDist::deterministic(0.1);
  const std::int64_t n_s = 5;
  std::vector<double> errors;
  for (double dt : {1e-4, 5e-5, 2.5e-5}) {
    const auto config = make_lyapunov_config(kFast, workload, {.dt = dt});
    const double x = 1.0;
    ASSERT_EQ(classify({x, n_s}, config), DriftRegime::Interior);
    const double rate = expected_drift({x, n_s}, config) / dt;
    errors.push_back(std::abs(rate - oracle::interior_drift(n_s, kFast)));
  }
  EXPECT_NEAR(errors[0] / errors[1], 2.0, 0.4);
  EXPECT_NEAR(errors[1] / errors[2], 2.0, 0.4);
  EXPECT_DOUBLE_EQ(interior_drift_rate(n_s, kFast), oracle::interior_drift(n_s, kFast));
}

TEST(Drift, InteriorAtRoundedJobLoadIsNegative) {
  const auto config = make_lyapunov_config(kFig3, WorkloadDist::deterministic(1), {.dt = 1e-4});
  const double rate = expected_drift({5.0, 8}, config) / config.dt;
  EXPECT_NEAR(rate, kFig3.mu_s() * (8 - 10), 0.05);
  EXPECT_LT(rate, 0);
}

TEST(Drift, ServerCapBoundaryIsNegative) {
  const auto config = make_lyapunov_config(kFig3, WorkloadDist::deterministic(1));
  ASSERT_GT(config.server_cap, server_cap_threshold(kFig3));
  const WorkloadState s{5.0, config.server_cap};
  EXPECT_EQ(classify(s, config), DriftRegime::ServerCap);
  EXPECT_LT(expected_drift(s, config), 0);
}

TEST(Drift, DrainWithoutArrivalsReducesWorkload) {
  const ModelParams p(1e-12, 1, 10, 1);
  const auto config =
      make_lyapunov_config(p, WorkloadDist::deterministic(1), {.dt = 1e-3, .server_cap = 30,
                                                              .constants = LyapunovConstants{2, 0}});
  for (std::int64_t n_s : {1L, 4L, 12L}) {
    const WorkloadState s{2.0, n_s};
    double dx = 0;
    for (const auto& t : transition_kernel(s, config)) dx += t.probability * (t.next.X - s.X);
    const double x_term = config.k * p.mu_c() * dx;
    EXPECT_LT(x_term, 0);
    EXPECT_NEAR(x_term, -config.k * p.mu_c() * n_s * config.dt,
                config.k * p.mu_c() * n_s * p.mu_s() * config.dt * config.dt * 1.01);
  }
}

TEST(Drift, CertifiesStableModelsForBothWorkloadShapes) {
  for (const auto& p : {kFast, kFig3}) {
    const double mean = 1.0 / p.mu_c();
    for (const auto& w : {WorkloadDist::deterministic(mean), two_atoms(mean)}) {
      const auto config = make_lyapunov_config(p, w);
      const auto report = check_drift(config);
      EXPECT_EQ(report.hard_violations(), 0u) << w.describe();
      EXPECT_TRUE(report.grid_covers_invariant_band);
      EXPECT_TRUE(report.certified());
      EXPECT_LT(report.regime_max_drift[static_cast<std::size_t>(DriftRegime::Interior)], 0);
    }
  }
}

TEST(Drift, OverloadHasNoCertificateOnCoarseGrid) {
  const ModelParams p(12, 1, 10, 1);
  const auto base = make_lyapunov_config(
      p, WorkloadDist::deterministic(1),
      {.dt = 1e-3, .server_cap = 25, .constants = LyapunovConstants{1, 0}});
  const auto search = search_constants(base, {0.5, 5, 50}, {-10, 0, 10});
  EXPECT_FALSE(search.found);
  EXPECT_GE(search.best_report.max_drift, 0);
}
