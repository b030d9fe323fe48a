#pragma once

#include <string>

#include "p2pq/qbd.hpp"
#include "p2pq/sim.hpp"
#include "p2pq/stability.hpp"

namespace p2pq {

// JSON documents use snake_case field names mirroring the C++ members.
// Non-finite numbers (e.g. the half-width of a single replication) are
// written as null.

/// {"replications", "horizon", "warmup", "nc_discipline_free",
///  "mean_nc": {"mean", "half_width"}, "mean_ns", "mean_X", "cov_nc_ns",
///  "empty_fraction", "mean_sojourn" (optional), "regeneration_count",
///  "regenerations_per_replication", "window_mean_X", "window_mean_nc",
///  "cond_mean_nc_given_ns": [{"key", "mean", "half_width", "replications",
///  "occupancy", "visits"}], "cond_mean_ns_given_nc", "ns_snapshots": [{"n_s", "count"}]}
std::string to_json(const sim::SimStats& stats, int indent = 2);

/// Header matching sim_stats_csv_row.
std::string sim_stats_csv_header();
/// One CSV row of the scalar estimates (no trailing newline).
std::string sim_stats_csv_row(const sim::SimStats& stats);

/// {"certified", "max_drift", "argmax_state": {"X", "n_s"}, "grid": {...},
///  "regime_max_drift": {...}, "hard_violations", "boundary_violations",
///  "violations": [{"X", "n_s", "drift", "regime"}], "constants": {"k", "m"}}
std::string to_json(const stability::DriftReport& report, const stability::LyapunovConfig& config,
                    int indent = 2);

/// Moments plus tail masses: {"params", "phase_cap", "levels_stored",
///  "tail_mass", "phase_tail_bound", "spectral_radius" (null for brute force),
///  "moments": {...}}
std::string to_json(const qbd::EquilibriumSolution& sol, int indent = 2);

/// Columns n_s,n_c,probability over n_s in [0, M_s] and stored n_c <= max_level
/// (all stored levels when max_level < 0).
std::string pi_csv(const qbd::EquilibriumSolution& sol, int max_level = -1);

}  // namespace p2pq
