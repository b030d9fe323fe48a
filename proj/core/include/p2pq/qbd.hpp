#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <utility>
#include <vector>

#include "p2pq/model.hpp"

namespace p2pq::qbd {

/// Level-independent QBD blocks of the M/M job-server chain. Level = n_c,
/// phase = n_s in [0, M_s].
struct QbdBlocks {
  explicit QbdBlocks(const ModelParams& p) : params(p) {}

  ModelParams params;
  Eigen::MatrixXd A0;  ///< level up: lambda_c * I
  Eigen::MatrixXd A1;  ///< within level, levels >= 1
  Eigen::MatrixXd A2;  ///< level down: diag(n_s * mu_c)
  Eigen::MatrixXd B1;  ///< within level 0 (no departures from an empty queue)
  int phase_cap = 0;   ///< M_s

  int phases() const noexcept { return phase_cap + 1; }
};

/// Default phase truncation ceil(rho_s + 10 sqrt(rho_s)).
int default_phase_cap(const ModelParams& params);

/// Throws InvalidConfig when M_s < 1.
QbdBlocks build_blocks(const ModelParams& params, int phase_cap);

enum class RAlgorithm {
  LogarithmicReduction,  ///< quadratically convergent, the default
  FixedPoint,            ///< R <- -(A0 + R^2 A2) A1^{-1}; linear, kept as a cross-check
};

/// Minimal nonnegative solution of A0 + R A1 + R^2 A2 = 0.
///
/// Throws UnstableModel when the mean-drift condition fails (the chain is not
/// positive recurrent, so sp(R) would be 1) or the converged R has spectral
/// radius >= 1. Throws NoConvergence when `max_iter` iterations do not bring
/// the residual below `tol`.
Eigen::MatrixXd solve_R(const QbdBlocks& blocks, double tol = 1e-12, int max_iter = 200,
                        RAlgorithm algorithm = RAlgorithm::LogarithmicReduction);

/// Infinity norm of A0 + R A1 + R^2 A2.
double r_residual(const QbdBlocks& blocks, const Eigen::MatrixXd& R);

double spectral_radius(const Eigen::MatrixXd& M);

/// Moments of the joint stationary law of (n_c, n_s).
struct Moments {
  double E_nc = 0.0;
  double E_ns = 0.0;
  double E_ns_ns1 = 0.0;  ///< E[n_s (n_s - 1)]
  double E_nc_ns = 0.0;
  double cov_nc_ns = 0.0;
  double P_nc0 = 0.0;
  double G0_1 = 0.0;  ///< E[n_s 1{n_c = 0}]
  double G0_2 = 0.0;  ///< E[n_s (n_s - 1) 1{n_c = 0}]
};

struct EquilibriumSolution {
  explicit EquilibriumSolution(const ModelParams& p) : params(p) {}

  ModelParams params;
  int phase_cap = 0;
  /// Rate matrix; empty for the brute-force solver.
  Eigen::MatrixXd R;
  /// pi_levels[k](i) = P(n_c = k, n_s = i) for the stored levels.
  std::vector<Eigen::VectorXd> pi_levels;
  /// Probability of levels beyond pi_levels.back().
  double tail_mass = 0.0;
  /// P(n_s > M_s) of the untruncated server process, Poisson(rho_s).
  double phase_tail_bound = 0.0;
  /// Sum over all levels of pi_k, per phase.
  Eigen::VectorXd phase_marginal;
  /// Sum over all levels of k * pi_k, per phase.
  Eigen::VectorXd phase_level_moment;
  Moments moments;
};

struct EquilibriumOptions {
  /// Levels are stored until the remaining tail falls below this.
  double tail_target = 1e-13;
  int max_levels = 200000;
};

/// pi_0 from pi_0 (B1 + R A2) = 0 with pi_0 (I - R)^{-1} 1 = 1, pi_k = pi_0 R^k.
/// Moments use the closed forms (I - R)^{-1}, R (I - R)^{-2} rather than
/// level summation. Throws UnstableModel if sp(R) >= 1 and SingularBoundary
/// if the boundary system has nullity other than 1.
EquilibriumSolution solve_equilibrium(const QbdBlocks& blocks, const Eigen::MatrixXd& R,
                                      const EquilibriumOptions& options = {});

/// Convenience: build_blocks + solve_R + solve_equilibrium. A phase cap of 0
/// selects default_phase_cap.
EquilibriumSolution solve(const ModelParams& params, int phase_cap = 0,
                          const EquilibriumOptions& options = {});

/// Generator of the chain truncated to n_c <= N_c_max (arrivals blocked at the
/// top level) and n_s <= M_s. State index: n_c * (M_s + 1) + n_s.
Eigen::SparseMatrix<double> truncated_generator(const ModelParams& params, int phase_cap,
                                                int level_cap);

/// Stationary law of truncated_generator by sparse LU, with moments by direct
/// summation. Independent of the matrix-geometric route. Requires
/// (M_s + 1)(N_c_max + 1) <= 2e5; M_s = 0 is allowed.
EquilibriumSolution brute_force_truncated(const ModelParams& params, int phase_cap,
                                          int level_cap);

/// Total-variation distance between two solutions on the same phase range.
/// Levels present in only one solution count against the other as zero mass,
/// and the difference of the unstored tails is added.
double total_variation(const EquilibriumSolution& a, const EquilibriumSolution& b);

struct ConditionalProfiles {
  /// (n_s, E[n_c | n_s]) for phases with marginal mass >= cutoff.
  std::vector<std::pair<int, double>> nc_given_ns;
  /// (n_c, E[n_s | n_c]) for stored levels with marginal mass >= cutoff.
  std::vector<std::pair<int, double>> ns_given_nc;
};

ConditionalProfiles conditional_profiles(const EquilibriumSolution& sol,
                                         double mass_cutoff = 1e-9);

}  // namespace p2pq::qbd
