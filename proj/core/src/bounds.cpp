#include "p2pq/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "p2pq/errors.hpp"

namespace p2pq::bounds {

namespace {

void require_stable(const ModelParams& params) {
  if (!is_stable_predicate(params)) throw NotStrictlyStable(params.rho_c(), params.rho_s());
}

double rel(double lhs, double rhs) {
  const double scale =
      std::max({std::abs(lhs), std::abs(rhs), std::numeric_limits<double>::min()});
  return std::abs(lhs - rhs) / scale;
}

}  // namespace

BoundPair queue_length_bounds(const ModelParams& params) {
  require_stable(params);
  const double lower = static_baseline(params);
  return {lower, (params.mu_c() / params.mu_s() + 1.0) * lower, params};
}

double sojourn_from_queue_length(double mean_jobs, double lambda_c) {
  if (!(mean_jobs > 0.0) || !(lambda_c > 0.0)) {
    std::ostringstream os;
    os << "Little's law needs positive inputs, got E[n_c] = " << mean_jobs
       << ", lambda_c = " << lambda_c;
    throw InvalidParams(os.str());
  }
  return mean_jobs / lambda_c;
}

BoundPair sojourn_bounds(const ModelParams& params) {
  const BoundPair q = queue_length_bounds(params);
  return {sojourn_from_queue_length(q.lower, params.lambda_c()),
          sojourn_from_queue_length(q.upper, params.lambda_c()), params};
}

double static_baseline(const ModelParams& params) {
  require_stable(params);
  const double rho_c = params.rho_c();
  return rho_c / (params.rho_s() - rho_c);
}

BoundCheck check_bounds(const ModelParams& params, double mean_jobs) {
  const BoundPair b = queue_length_bounds(params);
  return {b, mean_jobs, b.lower < mean_jobs && mean_jobs < b.upper, mean_jobs / b.lower,
          mean_jobs / b.upper};
}

double IdentityResiduals::max() const noexcept {
  return std::max({mean_servers, factorial_servers, empty_queue, second_moment, cross_moment,
                   simplified, covariance_form});
}

IdentityResiduals identity_residuals(const ModelParams& params, const qbd::Moments& m) {
  const double rho_c = params.rho_c();
  const double rho_s = params.rho_s();
  const double lc = params.lambda_c();
  const double ls = params.lambda_s();
  const double mc = params.mu_c();
  const double ms = params.mu_s();
  IdentityResiduals r{};
  r.mean_servers = rel(m.E_ns, rho_s);
  r.factorial_servers = rel(m.E_ns_ns1, rho_s * m.E_ns);
  r.empty_queue = rel(m.G0_1, m.E_ns - rho_c);
  r.second_moment = rel(rho_c * m.E_nc, m.E_nc_ns - m.E_ns + m.G0_1);
  r.cross_moment = rel(lc * m.E_ns + ls * m.E_nc,
                       mc * m.E_ns_ns1 + ms * m.E_nc_ns + mc * m.E_ns - mc * (m.G0_1 + m.G0_2));
  r.simplified = rel(m.E_nc, (m.E_nc_ns - rho_c) / rho_c);
  r.covariance_form = rel(m.E_nc, (rho_c - m.cov_nc_ns) / (rho_s - rho_c));
  return r;
}

double empty_queue_server_ratio(const qbd::Moments& m) { return m.G0_2 / m.G0_1; }

}  // namespace p2pq::bounds
