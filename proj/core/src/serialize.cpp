#include "p2pq/serialize.hpp"

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "p2pq/kv_config.hpp"

namespace p2pq {

namespace {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json estimate(const sim::Estimate& e) {
  return {{"mean", number(e.mean)}, {"half_width", number(e.half_width)}};
}

json conditional(const std::map<std::int64_t, sim::ConditionalEstimate>& table) {
  json out = json::array();
  for (const auto& [key, ce] : table) {
    out.push_back({{"key", key},
                   {"mean", number(ce.value.mean)},
                   {"half_width", number(ce.value.half_width)},
                   {"replications", ce.replications},
                   {"occupancy", number(ce.occupancy)},
                   {"visits", ce.visits}});
  }
  return out;
}

json params_json(const ModelParams& p) {
  return {{"lambda_c", p.lambda_c()}, {"mu_c", p.mu_c()}, {"lambda_s", p.lambda_s()},
          {"mu_s", p.mu_s()}, {"rho_c", p.rho_c()}, {"rho_s", p.rho_s()}};
}

std::string csv_number(double v) { return std::isfinite(v) ? format_decimal(v) : ""; }

}  // namespace

std::string to_json(const sim::SimStats& s, int indent) {
  json j;
  j["replications"] = s.replications;
  j["horizon"] = s.horizon;
  j["warmup"] = s.warmup;
  j["nc_discipline_free"] = s.nc_discipline_free;
  j["mean_nc"] = estimate(s.mean_nc);
  j["mean_ns"] = estimate(s.mean_ns);
  j["mean_X"] = estimate(s.mean_X);
  j["cov_nc_ns"] = estimate(s.cov_nc_ns);
  j["empty_fraction"] = estimate(s.empty_fraction);
  if (s.mean_sojourn) j["mean_sojourn"] = estimate(*s.mean_sojourn);
  j["regeneration_count"] = s.regeneration_count;
  j["regenerations_per_replication"] = s.regenerations_per_replication;
  j["window_mean_X"] = json::array();
  for (const auto& e : s.window_mean_X) j["window_mean_X"].push_back(estimate(e));
  j["window_mean_nc"] = json::array();
  for (const auto& e : s.window_mean_nc) j["window_mean_nc"].push_back(estimate(e));
  j["cond_mean_nc_given_ns"] = conditional(s.cond_mean_nc_given_ns);
  j["cond_mean_ns_given_nc"] = conditional(s.cond_mean_ns_given_nc);
  j["ns_snapshots"] = json::array();
  for (const auto& [n, count] : s.ns_snapshots) {
    j["ns_snapshots"].push_back({{"n_s", n}, {"count", count}});
  }
  return j.dump(indent);
}

std::string sim_stats_csv_header() {
  return "replications,horizon,warmup,mean_nc,mean_nc_hw,mean_ns,mean_ns_hw,mean_X,mean_X_hw,"
         "cov_nc_ns,cov_nc_ns_hw,empty_fraction,empty_fraction_hw,mean_sojourn,mean_sojourn_hw,"
         "regeneration_count";
}

std::string sim_stats_csv_row(const sim::SimStats& s) {
  std::ostringstream os;
  auto pair = [&](const sim::Estimate& e) {
    os << ',' << csv_number(e.mean) << ',' << csv_number(e.half_width);
  };
  os << s.replications << ',' << csv_number(s.horizon) << ',' << csv_number(s.warmup);
  pair(s.mean_nc);
  pair(s.mean_ns);
  pair(s.mean_X);
  pair(s.cov_nc_ns);
  pair(s.empty_fraction);
  if (s.mean_sojourn) {
    pair(*s.mean_sojourn);
  } else {
    os << ",,";
  }
  os << ',' << s.regeneration_count;
  return os.str();
}

std::string to_json(const stability::DriftReport& r, const stability::LyapunovConfig& c,
                    int indent) {
  using stability::DriftRegime;
  json j;
  j["certified"] = r.certified();
  j["max_drift"] = number(r.max_drift);
  j["argmax_state"] = {{"X", r.argmax_state.X}, {"n_s", r.argmax_state.n_s}};
  j["params"] = params_json(c.params);
  j["constants"] = {{"k", c.k}, {"m", c.m}};
  j["grid"] = {{"server_cap", r.server_cap},
               {"dt", r.dt},
               {"x_grid_max", r.x_grid_max},
               {"x_points", r.x_points},
               {"states_checked", r.states_checked},
               {"x_invariant_from", r.x_invariant_from},
               {"covers_invariant_band", r.grid_covers_invariant_band},
               {"description", r.grid_description()}};
  json regimes;
  for (std::size_t i = 0; i < stability::kRegimeCount; ++i) {
    regimes[stability::regime_name(static_cast<DriftRegime>(i))] = number(r.regime_max_drift[i]);
  }
  j["regime_max_drift"] = regimes;
  j["hard_violations"] = r.hard_violations();
  j["boundary_violations"] = r.boundary_violations();
  j["violations"] = json::array();
  for (const auto& v : r.violations) {
    j["violations"].push_back({{"X", v.state.X},
                               {"n_s", v.state.n_s},
                               {"drift", v.drift},
                               {"regime", stability::regime_name(v.regime)}});
  }
  return j.dump(indent);
}

std::string to_json(const qbd::EquilibriumSolution& sol, int indent) {
  const auto& m = sol.moments;
  json j;
  j["params"] = params_json(sol.params);
  j["phase_cap"] = sol.phase_cap;
  j["levels_stored"] = sol.pi_levels.size();
  j["tail_mass"] = sol.tail_mass;
  j["phase_tail_bound"] = sol.phase_tail_bound;
  j["spectral_radius"] = sol.R.size() ? json(qbd::spectral_radius(sol.R)) : json(nullptr);
  j["moments"] = {{"E_nc", m.E_nc},       {"E_ns", m.E_ns},   {"E_ns_ns1", m.E_ns_ns1},
                  {"E_nc_ns", m.E_nc_ns}, {"cov_nc_ns", m.cov_nc_ns},
                  {"P_nc0", m.P_nc0},     {"G0_1", m.G0_1},   {"G0_2", m.G0_2}};
  return j.dump(indent);
}

std::string pi_csv(const qbd::EquilibriumSolution& sol, int max_level) {
  std::ostringstream os;
  os << "n_s,n_c,probability\n";
  const std::size_t levels =
      max_level < 0 ? sol.pi_levels.size()
                    : std::min(sol.pi_levels.size(), static_cast<std::size_t>(max_level) + 1);
  for (int i = 0; i <= sol.phase_cap; ++i) {
    for (std::size_t k = 0; k < levels; ++k) {
      os << i << ',' << k << ',' << format_decimal(sol.pi_levels[k](i)) << '\n';
    }
  }
  return os.str();
}

}  // namespace p2pq
