#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "p2pq/errors.hpp"
#include "p2pq/qbd.hpp"
#include "p2pq/sim.hpp"

using namespace p2pq;

namespace {

sim::SimConfig make(const ModelParams& p, const char* notation, double horizon, int reps,
                    std::uint64_t seed) {
  return sim::SimConfig{.spec = {parse_notation(notation), p},
                        .horizon = horizon,
                        .replications = reps,
                        .seed = seed};
}

void expect_within(const sim::Estimate& e, double truth, double k = 3.0) {
  ASSERT_TRUE(std::isfinite(e.half_width));
  EXPECT_LE(std::abs(e.mean - truth), k * e.half_width)
      << "mean " << e.mean << " half-width " << e.half_width << " truth " << truth;
}

const ModelParams kSmall(2, 1, 4, 1);

}  // namespace

TEST(Config, Validation) {
  auto c = make(kSmall, "M/M/(M/M)", 100, 2, 1);
  c.warmup = 200;
  EXPECT_THROW(sim::simulate_mm(c), InvalidConfig);
  c = make(kSmall, "M/M/(M/M)", 100, 0, 1);
  EXPECT_THROW(sim::simulate_mm(c), InvalidConfig);
  c = make(kSmall, "M/G/(M/M)", 100, 2, 1);
  EXPECT_THROW(sim::simulate_mg(c), InvalidConfig);
  c.workload = WorkloadDist::deterministic(0.5);
  EXPECT_THROW(sim::simulate_mg(c), InvalidConfig);
  c = make(kSmall, "D/M/(M/M)", 100, 2, 1);
  EXPECT_THROW(sim::simulate_mm(c), InvalidConfig);
}

TEST(Simulate, ReproducibleFromSeed) {
  const auto a = sim::simulate_mm(make(kSmall, "M/M/(M/M)", 2000, 3, 42));
  const auto b = sim::simulate_mm(make(kSmall, "M/M/(M/M)", 2000, 3, 42));
  const auto c = sim::simulate_mm(make(kSmall, "M/M/(M/M)", 2000, 3, 43));
  EXPECT_EQ(a.mean_nc.mean, b.mean_nc.mean);
  EXPECT_EQ(a.cov_nc_ns.mean, b.cov_nc_ns.mean);
  EXPECT_EQ(a.ns_snapshots, b.ns_snapshots);
  EXPECT_NE(a.mean_nc.mean, c.mean_nc.mean);
}

TEST(Simulate, SingleReplicationHasInfiniteHalfWidth) {
  const auto s = sim::simulate_mm(make(kSmall, "M/M/(M/M)", 500, 1, 1));
  EXPECT_TRUE(std::isinf(s.mean_nc.half_width));
}

TEST(Simulate, AgreesWithMatrixGeometricSolution) {
  const auto truth = qbd::solve(kSmall).moments;
  const auto s = sim::simulate_mm(make(kSmall, "M/M/(M/M)", 20000, 10, 7));
  expect_within(s.mean_nc, truth.E_nc);
  expect_within(s.mean_ns, 4.0);
  expect_within(s.cov_nc_ns, truth.cov_nc_ns);
  expect_within(s.empty_fraction, truth.P_nc0);
  ASSERT_TRUE(s.mean_sojourn);
  expect_within(*s.mean_sojourn, truth.E_nc / kSmall.lambda_c());
}

TEST(Simulate, ServerOccupancyIsPoisson) {
  const auto s = sim::simulate_mm(make(ModelParams(8, 1, 10, 1), "M/M/(M/M)", 20000, 10, 3));
  std::uint64_t total = 0;
  for (const auto& [n, count] : s.ns_snapshots) total += count;
  ASSERT_GT(total, 10000u);
  const boost::math::poisson_distribution<> poisson(10.0);
  // Pool states into cells with expected count >= 5; the two ends absorb the tails.
  std::vector<double> observed, expected;
  double obs = 0, exp = 0;
  const std::int64_t top = s.ns_snapshots.rbegin()->first;
  for (std::int64_t n = 0; n <= top; ++n) {
    const auto it = s.ns_snapshots.find(n);
    obs += it == s.ns_snapshots.end() ? 0.0 : static_cast<double>(it->second);
    exp += total * (n == top ? boost::math::cdf(boost::math::complement(poisson, n - 1))
                             : boost::math::pdf(poisson, n));
    if (exp >= 5 && (n == top || total * boost::math::cdf(boost::math::complement(poisson, n)) >= 5)) {
      observed.push_back(obs);
      expected.push_back(exp);
      obs = exp = 0;
    }
  }
  if (exp > 0) {
    observed.back() += obs;
    expected.back() += exp;
  }
  double chi2 = 0;
  for (std::size_t i = 0; i < observed.size(); ++i)
    chi2 += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
  const boost::math::chi_squared_distribution<> dist(static_cast<double>(observed.size() - 1));
  EXPECT_LT(chi2, boost::math::quantile(dist, 0.99)) << observed.size() << " cells";
}

TEST(Simulate, NoJobsMeansEmptyQueue) {
  const auto s = sim::simulate_mm(make(ModelParams(1e-6, 1, 1, 1), "M/M/(M/M)", 5000, 4, 9));
  EXPECT_LT(s.mean_nc.mean, 1e-3);
}

TEST(Simulate, GuardStopsDivergence) {
  auto c = make(ModelParams(12, 1, 10, 1), "M/M/(M/M)", 1e5, 1, 5);
  c.guard_nc = 500;
  EXPECT_THROW(sim::simulate_mm(c), UnstableDivergence);
}

TEST(SimulateMg, ExponentialWorkloadMatchesQueueLength) {
  auto c = make(kSmall, "M/M/(M/M)", 20000, 10, 17);
  c.workload = WorkloadDist::exponential(kSmall.mu_c());
  const auto s = sim::simulate_mg(c);
  const auto truth = qbd::solve(kSmall).moments;
  expect_within(s.mean_X, truth.E_nc / kSmall.mu_c());
  expect_within(s.mean_nc, truth.E_nc);
}

TEST(SimulateMg, DeterministicWorkloadRegenerates) {
  auto c = make(ModelParams::from_loads(5, 10, 10, 1), "M/D/(M/M)", 2000, 2, 4);
  const auto s = sim::simulate_mg(c);
  EXPECT_GT(s.regeneration_count, 0u);
  for (auto r : s.regenerations_per_replication) EXPECT_GT(r, 0u);
}

TEST(SimulateMg, OverloadGrowsAcrossWindows) {
  auto c = make(ModelParams::from_loads(12, 10, 10, 1), "M/D/(M/M)", 20000, 2, 8);
  const auto s = sim::simulate_mg(c);
  ASSERT_EQ(s.window_mean_X.size(), 10u);
  for (std::size_t i = 1; i < s.window_mean_X.size(); ++i)
    EXPECT_GT(s.window_mean_X[i].mean, s.window_mean_X[i - 1].mean);
}

TEST(SimulateMg, WorkloadGuard) {
  auto c = make(ModelParams::from_loads(12, 10, 10, 1), "M/D/(M/M)", 1e5, 1, 8);
  c.guard_workload = 20.0;
  EXPECT_THROW(sim::simulate_mg(c), UnstableDivergence);
}
