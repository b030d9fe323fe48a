#pragma once

#include "p2pq/model.hpp"
#include "p2pq/qbd.hpp"

namespace p2pq::bounds {

/// Conjectured sandwich on E[n_c] for the M/M job-server process.
struct BoundPair {
  double lower;
  double upper;
  ModelParams params;
};

/// lower = rho_c / (rho_s - rho_c), upper = (mu_c / mu_s + 1) * lower.
/// Throws NotStrictlyStable when rho_c >= rho_s.
BoundPair queue_length_bounds(const ModelParams& params);

/// Little's law: E[T] = E[n_c] / lambda_c. Throws InvalidParams on
/// non-positive inputs.
double sojourn_from_queue_length(double mean_jobs, double lambda_c);

/// The same bounds expressed as mean sojourn times.
BoundPair sojourn_bounds(const ModelParams& params);

/// Mean queue length of a static M/M/s system with s = rho_s servers,
/// rho_c / (rho_s - rho_c). Coincides with the lower bound.
double static_baseline(const ModelParams& params);

/// Where a solved or simulated E[n_c] sits relative to the bounds.
struct BoundCheck {
  BoundPair bounds;
  double value;
  bool inside;            ///< lower < value < upper, strictly
  double ratio_to_lower;  ///< value / lower
  double ratio_to_upper;  ///< value / upper
};

BoundCheck check_bounds(const ModelParams& params, double mean_jobs);

/// Relative residuals of the balance-derived moment identities. Each entry is
/// |lhs - rhs| / max(|lhs|, |rhs|, tiny).
struct IdentityResiduals {
  double mean_servers;       ///< E[n_s] = rho_s
  double factorial_servers;  ///< E[n_s (n_s - 1)] = rho_s E[n_s]
  double empty_queue;        ///< G0'(1) = E[n_s] - rho_c
  double second_moment;      ///< rho_c E[n_c] = E[n_s n_c] - E[n_s] + G0'(1)
  double cross_moment;       ///< lambda_c E[n_s] + lambda_s E[n_c] = mu_c E[n_s(n_s-1)]
                             ///<   + mu_s E[n_s n_c] + mu_c E[n_s] - mu_c (G0'(1) + G0''(1))
  double simplified;         ///< E[n_c] = (E[n_s n_c] - rho_c) / rho_c
  double covariance_form;    ///< E[n_c] = (rho_c - Cov) / (rho_s - rho_c)

  double max() const noexcept;
};

IdentityResiduals identity_residuals(const ModelParams& params, const qbd::Moments& m);

/// E[n_s(n_s-1) | n_c = 0] / E[n_s | n_c = 0], which the upper-bound argument
/// assumes exceeds rho_s.
double empty_queue_server_ratio(const qbd::Moments& m);

}  // namespace p2pq::bounds
