#include <benchmark/benchmark.h>

#include "p2pq/qbd.hpp"
#include "p2pq/sim.hpp"
#include "p2pq/stability.hpp"

using namespace p2pq;

namespace {

ModelParams fig1(double rho_c) { return ModelParams::from_loads(rho_c, 10, 10, 1); }

// range(0): rho_c * 10
void BM_SolveR_LogReduction(benchmark::State& state) {
  const auto blocks = qbd::build_blocks(fig1(state.range(0) / 10.0), 40);
  for (auto _ : state) benchmark::DoNotOptimize(qbd::solve_R(blocks));
}
BENCHMARK(BM_SolveR_LogReduction)->Arg(10)->Arg(50)->Arg(90)->Unit(benchmark::kMillisecond);

void BM_SolveR_FixedPoint(benchmark::State& state) {
  const auto blocks = qbd::build_blocks(fig1(state.range(0) / 10.0), 40);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        qbd::solve_R(blocks, 1e-12, 1000000, qbd::RAlgorithm::FixedPoint));
}
BENCHMARK(BM_SolveR_FixedPoint)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_SolveEquilibrium(benchmark::State& state) {
  const auto p = fig1(state.range(0) / 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(qbd::solve(p).moments.E_nc);
}
BENCHMARK(BM_SolveEquilibrium)->Arg(50)->Arg(95)->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& state) {
  const auto p = fig1(5);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        qbd::brute_force_truncated(p, 40, static_cast<int>(state.range(0))).moments.E_nc);
}
BENCHMARK(BM_BruteForce)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_SimulateMM(benchmark::State& state) {
  sim::SimConfig config{.spec = {parse_notation("M/M/(M/M)"), fig1(5)},
                        .horizon = 1e4,
                        .replications = 1,
                        .seed = 1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim::simulate_mm(config).mean_nc.mean);
    ++config.seed;
  }
  state.counters["sim_time_per_s"] =
      benchmark::Counter(state.iterations() * 1e4, benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateMM)->Unit(benchmark::kMillisecond);

void BM_SimulateMG(benchmark::State& state) {
  sim::SimConfig config{.spec = {parse_notation("M/D/(M/M)"), fig1(5)},
                        .horizon = 1e4,
                        .replications = 1,
                        .seed = 1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim::simulate_mg(config).mean_X.mean);
    ++config.seed;
  }
  state.counters["sim_time_per_s"] =
      benchmark::Counter(state.iterations() * 1e4, benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateMG)->Unit(benchmark::kMillisecond);

void BM_DriftGrid(benchmark::State& state) {
  const auto config =
      stability::make_lyapunov_config(ModelParams(8, 1, 10, 1), WorkloadDist::deterministic(1));
  std::size_t states = 0;
  for (auto _ : state) {
    const auto report = stability::check_drift(config);
    states = report.states_checked;
    benchmark::DoNotOptimize(report.max_drift);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * states));
}
BENCHMARK(BM_DriftGrid)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
