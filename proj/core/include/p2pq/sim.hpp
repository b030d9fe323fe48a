#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "p2pq/model.hpp"
#include "p2pq/workload.hpp"

namespace p2pq::sim {

struct SimConfig {
  ModelSpec spec;
  /// Job size law for simulate_mg. Absent: exponential(mu_c) for tag M,
  /// deterministic(1 / mu_c) for tag D; tag G requires it.
  std::optional<WorkloadDist> workload = std::nullopt;
  double horizon = 1e5;
  /// Statistics discard [0, warmup). Absent: 10% of the horizon.
  std::optional<double> warmup = std::nullopt;
  int replications = 1;
  std::uint64_t seed = 1;
  /// M_s: server arrivals are blocked at this count. Absent: unbounded.
  std::optional<std::int64_t> max_servers = std::nullopt;
  /// The post-warmup interval is split into this many equal windows.
  int windows = 10;
  /// Spacing of n_s snapshots for the occupancy histogram. Absent: 10 / mu_s,
  /// far beyond the server process correlation time 1 / mu_s.
  std::optional<double> snapshot_interval = std::nullopt;
  /// Divergence guards. Absent: n_c <= 1e7 and X <= 1e7 / mu_c.
  std::optional<std::int64_t> guard_nc = std::nullopt;
  std::optional<double> guard_workload = std::nullopt;

  double effective_warmup() const noexcept;
  /// Throws InvalidConfig on warmup >= horizon, replications < 1, and similar.
  void validate() const;
};

/// Mean across replications with a 95% normal confidence half-width.
struct Estimate {
  double mean = 0.0;
  double half_width = 0.0;
};

struct ConditionalEstimate {
  Estimate value;        ///< across replications that visited the key
  int replications = 0;  ///< replications that visited the key
  double occupancy = 0.0;   ///< pooled time fraction spent at the key
  std::uint64_t visits = 0; ///< pooled number of entries into the key
};

struct SimStats {
  int replications = 0;
  double horizon = 0.0;
  double warmup = 0.0;
  /// False for non-exponential workloads: n_c then depends on the service
  /// discipline and is reported for reference only.
  bool nc_discipline_free = true;

  Estimate mean_nc;
  Estimate mean_ns;
  Estimate mean_X;
  Estimate cov_nc_ns;
  Estimate empty_fraction;
  /// FCFS per-job sojourn of jobs departing after warmup (M/M runs only).
  std::optional<Estimate> mean_sojourn;

  std::map<std::int64_t, ConditionalEstimate> cond_mean_nc_given_ns;
  std::map<std::int64_t, ConditionalEstimate> cond_mean_ns_given_nc;

  /// Entries into the empty state (n_c = 0, equivalently X = 0) after warmup.
  std::uint64_t regeneration_count = 0;
  std::vector<std::uint64_t> regenerations_per_replication;

  std::vector<Estimate> window_mean_X;
  std::vector<Estimate> window_mean_nc;

  /// Pooled n_s snapshot counts.
  std::map<std::int64_t, std::uint64_t> ns_snapshots;
};

/// Event-driven simulation of the M/M job-server chain:
///   n_c + 1 at lambda_c; n_c - 1 at n_s mu_c (n_c >= 1);
///   n_s + 1 at lambda_s (n_s < M_s); n_s - 1 at n_s mu_s (n_s >= 1).
/// Start state (0, round(rho_s)). mean_X is reported through E[X | n_c] = n_c / mu_c.
/// Throws InvalidConfig unless the notation is M/M/(M/M) and
/// UnstableDivergence when a guard is crossed.
SimStats simulate_mm(const SimConfig& config);

/// Simulation of (X, n_s): arrivals add a workload draw, X drains at rate
/// n_s, and jobs leave FCFS with all servers pooled on the head-of-line job.
/// Throws InvalidConfig for non-M arrivals or server processes or a workload
/// whose mean is not 1 / mu_c, InfiniteMeanWorkload for a non-finite mean,
/// and UnstableDivergence when a guard is crossed.
SimStats simulate_mg(const SimConfig& config);

/// 97.5% standard normal quantile used for the half-widths.
double normal_critical_95();

}  // namespace p2pq::sim
