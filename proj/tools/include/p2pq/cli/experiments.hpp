#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "p2pq/model.hpp"
#include "p2pq/qbd.hpp"
#include "p2pq/sim.hpp"
#include "p2pq/workload.hpp"

namespace p2pq::cli {

/// `points` log-spaced values from `lo` to `hi` inclusive.
std::vector<double> log_grid(double lo, double hi, int points);

/// 40 log-spaced rho_c values in [0.05, 0.98 rho_s].
std::vector<double> default_rho_grid(double rho_s);

/// Throws InvalidConfig on an empty grid or a point outside (0, 0.98 rho_s].
void check_rho_grid(const std::vector<double>& grid, double rho_s);

struct SweepConfig {
  double mu_c = 10.0;
  double rho_s = 10.0;
  double mu_s = 1.0;
  std::vector<double> rho_c;  ///< empty: default_rho_grid
  int phase_cap = 0;          ///< 0: qbd default
};

struct SweepRow {
  double rho_c;
  double E_nc;
  double lower;
  double upper;
  double E_T;
};

/// Solved E[n_c] against the bounds at each rho_c, with Little's-law sojourn.
std::vector<SweepRow> run_sweep(const SweepConfig& config);
/// Columns rho_c,E_nc_solved,lower,upper,E_T.
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Average queue length against its bounds (rho_s = 10, mu_s = 1, mu_c = 10).
using Figure1Config = SweepConfig;
std::vector<SweepRow> run_figure1(const Figure1Config& config);
/// Columns rho_c,E_nc,lower,upper.
std::string figure1_csv(const std::vector<SweepRow>& rows);

/// Systems with equal rho_s and different server dynamics mu_c / mu_s.
struct Figure2Config {
  double rho_s = 10.0;
  double mu_s = 1.0;
  std::vector<double> ratios{1.0, 3.0, 10.0, 30.0};
  std::vector<double> rho_c;  ///< empty: default_rho_grid
  int phase_cap = 0;
};

struct Figure2Result {
  std::vector<double> ratios;
  std::vector<double> rho_c;
  /// E_nc[point][ratio]
  std::vector<std::vector<double>> E_nc;
};

Figure2Result run_figure2(const Figure2Config& config);
/// Columns rho_c,E_nc_ratio_<r>... in ratio order.
std::string figure2_csv(const Figure2Result& result);

/// Conditional expectations at lambda_c = 8, mu_c = 1, lambda_s = 10, mu_s = 1,
/// cross-checked by simulation.
struct Figure3Config {
  double lambda_c = 8.0;
  double mu_c = 1.0;
  double lambda_s = 10.0;
  double mu_s = 1.0;
  int phase_cap = 0;
  bool simulate = true;
  int replications = 20;
  double horizon = 1e5;
  std::uint64_t seed = 2010;
};

struct ProfilePoint {
  int key;
  double solved;
  std::optional<sim::ConditionalEstimate> simulated;
};

struct Figure3Result {
  ModelParams params;
  qbd::Moments moments;
  std::vector<ProfilePoint> nc_given_ns;
  std::vector<ProfilePoint> ns_given_nc;
  std::optional<sim::SimStats> sim;
};

Figure3Result run_figure3(const Figure3Config& config);
/// Columns n_s,E_nc_given_ns,sim_mean,sim_half_width,sim_occupancy.
std::string figure3_nc_given_ns_csv(const Figure3Result& result);
/// Columns n_c,E_ns_given_nc,sim_mean,sim_half_width,sim_occupancy.
std::string figure3_ns_given_nc_csv(const Figure3Result& result);

/// Writes figure1.csv, figure2.csv, figure3_nc_given_ns.csv and
/// figure3_ns_given_nc.csv into `dir`, creating it if needed.
void write_figures(const std::string& dir, const Figure1Config& f1, const Figure2Config& f2,
                   const Figure3Config& f3);


/// Workload flag syntax:
///   exp                          exponential with mean 1 / mu_c
///   deterministic:<v>
///   discrete:<L1>:<p1>,<L2>:<p2>,...
///   hyperexp:<p1>:<r1>,<p2>:<r2>,...   (weight:rate pairs)
///   hyperexp-scv:<c2>            balanced two-branch, mean 1 / mu_c
/// Throws InvalidConfig on malformed text.
WorkloadDist parse_workload(std::string_view text, double mu_c);

}  // namespace p2pq::cli
