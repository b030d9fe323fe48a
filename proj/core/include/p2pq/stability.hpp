#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "p2pq/model.hpp"
#include "p2pq/workload.hpp"

namespace p2pq::stability {

// Discrete-time job-server chain on (X, n_s) with slot length dt and
// n_s <= M_s. Per slot exactly one of: a job arrival of size L_i (prob
// p_i lambda_c dt), a server arrival (lambda_s dt, blocked at M_s), a server
// death (n_s mu_s dt), or nothing. Each slot serves the minimal number of
// servers present during the slot, capped by the work available:
// X' = max(0, X + arrival - n_eff dt).

struct LyapunovConstants {
  double k;
  double m;
};

/// Default certificate constants for rho_c < rho_s:
///   k = (mu_s / mu_c)(2 rho_s - 2 rho_c + 2 rho_s / (rho_s - rho_c) + 1)
///   m = 2 (rho_s - rho_c) - 2 rho_s / (rho_s - rho_c)
/// Throws NotStrictlyStable otherwise.
LyapunovConstants default_constants(const ModelParams& params);

/// Strict lower bound on M_s for negative drift at n_s = M_s under the
/// default constants: rho_c + rho_s / (rho_s - rho_c) - 1/2.
double server_cap_threshold(const ModelParams& params);

/// ceil(threshold) + max(10, ceil(3 sqrt(rho_s))).
int default_server_cap(const ModelParams& params);

struct LyapunovConfig {
  ModelParams params;
  /// Job sizes L_i with probabilities p_i; each L_i is a multiple of dt.
  std::vector<WorkloadDist::Atom> atoms;
  double dt;
  int server_cap;
  double k;
  double m;

  double max_atom() const noexcept;
  double mean_atom() const noexcept;
};

struct LyapunovOverrides {
  std::optional<double> dt = std::nullopt;
  std::optional<int> server_cap = std::nullopt;
  std::optional<LyapunovConstants> constants = std::nullopt;
};

/// Fills defaults and validates. The workload must be Deterministic or
/// DiscreteFinite. Default dt is 1e-3 min(1/lambda_c, 1/lambda_s, 1/(M_s mu_s)),
/// shrunk so that every atom is a whole number of slots. Throws InvalidConfig
/// on an invalid kernel or misaligned atoms and NotStrictlyStable when a
/// default that needs rho_c < rho_s is requested for an unstable model.
LyapunovConfig make_lyapunov_config(const ModelParams& params, const WorkloadDist& workload,
                                    const LyapunovOverrides& overrides = {});

/// Throws InvalidConfig unless the kernel is a probability distribution,
/// atoms sit on the dt lattice, k > 0 and M_s >= 1.
void validate(const LyapunovConfig& config);

struct Transition {
  double probability;
  WorkloadState next;
};

/// One-slot transition kernel from `state`, including the boundary rules.
/// The stay probability is 1 minus the others, so the entries sum to 1.
std::vector<Transition> transition_kernel(const WorkloadState& state,
                                          const LyapunovConfig& config);

/// V = k mu_c X + (n_s - rho_s)^2 + m n_s.
double lyapunov_value(const WorkloadState& state, const LyapunovConfig& config);

/// E[V(next) - V(state)] by exact expectation over transition_kernel, with
/// compensated summation.
double expected_drift(const WorkloadState& state, const LyapunovConfig& config);

/// Interior drift per unit time for the default constants as dt -> 0:
/// -2 mu_s (n_s - rho_c)^2 + mu_s (rho_c - rho_s).
double interior_drift_rate(double n_s, const ModelParams& params);

enum class DriftRegime : std::size_t {
  Interior = 0,
  WorkloadBoundary = 1,  ///< X < n_s dt: service in the slot is capped by X
  NoServers = 2,         ///< n_s = 0
  ServerCap = 3,         ///< n_s = M_s
};
inline constexpr std::size_t kRegimeCount = 4;

const char* regime_name(DriftRegime regime) noexcept;

/// Workload boundary takes precedence, then n_s = 0, then n_s = M_s.
DriftRegime classify(const WorkloadState& state, const LyapunovConfig& config);

struct DriftViolation {
  WorkloadState state;
  double drift;
  DriftRegime regime;
};

struct DriftReport {
  int server_cap = 0;
  double dt = 0.0;
  double x_grid_max = 0.0;
  std::size_t x_points = 0;
  std::size_t states_checked = 0;

  double max_drift = 0.0;
  WorkloadState argmax_state;
  /// Every grid state with drift >= 0, in (n_s, X) order.
  std::vector<DriftViolation> violations;
  /// Largest drift seen in each regime; -inf when the regime had no states.
  std::array<double, kRegimeCount> regime_max_drift{};

  /// Drift is X-invariant from here on; a grid reaching it covers all X.
  double x_invariant_from = 0.0;
  bool grid_covers_invariant_band = false;

  /// Violations outside the X < n_s dt regime.
  std::size_t hard_violations() const noexcept;
  std::size_t boundary_violations() const noexcept;
  /// No hard violations and the grid covers the invariant band, so the
  /// nonnegative-drift set is finite (it lies inside X < n_s dt).
  bool certified() const noexcept;
  /// Human-readable grid and extension statement.
  std::string grid_description() const;
};

/// Evaluates expected_drift on n_s in [0, M_s] and X in {0, dt, 2 dt, ...}
/// up to `x_grid_max` (default max L_i + (M_s + 1) dt). Violations are data.
DriftReport check_drift(const LyapunovConfig& config,
                        std::optional<double> x_grid_max = std::nullopt);

struct ConstantSearch {
  bool found = false;
  LyapunovConstants best{};
  DriftReport best_report;
};

/// Tries every (k, m) pair; returns the first certified pair, or the pair
/// with the smallest largest hard-violation drift when none certifies.
ConstantSearch search_constants(const LyapunovConfig& base, const std::vector<double>& k_grid,
                                const std::vector<double>& m_grid,
                                std::optional<double> x_grid_max = std::nullopt);

}  // namespace p2pq::stability
