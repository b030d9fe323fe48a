#include "p2pq/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <variant>

#include "p2pq/errors.hpp"

namespace p2pq::stability {

namespace {

constexpr double kLatticeTolerance = 1e-9;

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::vector<WorkloadDist::Atom> atoms_of(const WorkloadDist& workload) {
  if (const auto* d = std::get_if<WorkloadDist::Deterministic>(&workload.get())) {
    return {{d->value, 1.0}};
  }
  if (const auto* d = std::get_if<WorkloadDist::DiscreteFinite>(&workload.get())) {
    return d->atoms;
  }
  throw InvalidConfig("drift analysis needs a deterministic or discrete workload, got " +
                      workload.describe());
}

bool on_lattice(double value, double dt) {
  const double slots = value / dt;
  return std::abs(slots - std::round(slots)) <= kLatticeTolerance * std::max(1.0, slots) &&
         std::round(slots) >= 1.0;
}

double new_workload(double X, double arrival, std::int64_t serving, double dt) {
  return std::max(0.0, X + arrival - static_cast<double>(serving) * dt);
}

double v_delta(const WorkloadState& from, const WorkloadState& to, const LyapunovConfig& c) {
  const double rho_s = c.params.rho_s();
  const double a = static_cast<double>(from.n_s) - rho_s;
  const double b = static_cast<double>(to.n_s) - rho_s;
  return c.k * c.params.mu_c() * (to.X - from.X) + (b - a) * (b + a) +
         c.m * static_cast<double>(to.n_s - from.n_s);
}

}  // namespace

LyapunovConstants default_constants(const ModelParams& params) {
  const double rho_c = params.rho_c();
  const double rho_s = params.rho_s();
  if (!(rho_c < rho_s)) throw NotStrictlyStable(rho_c, rho_s);
  const double gap = rho_s - rho_c;
  const double k =
      params.mu_s() / params.mu_c() * (2.0 * rho_s - 2.0 * rho_c + 2.0 * rho_s / gap + 1.0);
  const double m = 2.0 * gap - 2.0 * rho_s / gap;
  return {k, m};
}

double server_cap_threshold(const ModelParams& params) {
  const double rho_c = params.rho_c();
  const double rho_s = params.rho_s();
  if (!(rho_c < rho_s)) throw NotStrictlyStable(rho_c, rho_s);
  return rho_c + rho_s / (rho_s - rho_c) - 0.5;
}

int default_server_cap(const ModelParams& params) {
  const double headroom = std::max(10.0, std::ceil(3.0 * std::sqrt(params.rho_s())));
  return static_cast<int>(std::ceil(server_cap_threshold(params)) + headroom);
}

double LyapunovConfig::max_atom() const noexcept {
  double out = 0.0;
  for (const auto& a : atoms) out = std::max(out, a.value);
  return out;
}

double LyapunovConfig::mean_atom() const noexcept {
  double out = 0.0;
  for (const auto& a : atoms) out += a.probability * a.value;
  return out;
}

LyapunovConfig make_lyapunov_config(const ModelParams& params, const WorkloadDist& workload,
                                    const LyapunovOverrides& overrides) {
  auto atoms = atoms_of(workload);
  const int cap = overrides.server_cap ? *overrides.server_cap : default_server_cap(params);
  const LyapunovConstants constants =
      overrides.constants ? *overrides.constants : default_constants(params);

  double dt = 0.0;
  if (overrides.dt) {
    dt = *overrides.dt;
  } else {
    const double base = 1e-3 * std::min({1.0 / params.lambda_c(), 1.0 / params.lambda_s(),
                                         1.0 / (std::max(cap, 1) * params.mu_s())});
    double smallest = std::numeric_limits<double>::infinity();
    for (const auto& a : atoms) smallest = std::min(smallest, a.value);
    dt = smallest / std::ceil(smallest / base);
  }
  LyapunovConfig config{params, std::move(atoms), dt, cap, constants.k, constants.m};
  validate(config);
  return config;
}

void validate(const LyapunovConfig& config) {
  std::ostringstream os;
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) {
    os << "slot length dt must be positive, got " << config.dt;
  } else if (config.server_cap < 1) {
    os << "server cap M_s must be >= 1, got " << config.server_cap;
  } else if (!(config.k > 0.0) || !std::isfinite(config.m)) {
    os << "Lyapunov constants need k > 0 and finite m, got k = " << config.k
       << ", m = " << config.m;
  } else if (config.atoms.empty()) {
    os << "workload has no atoms";
  } else {
    const auto& p = config.params;
    const double event_mass = (p.lambda_c() + p.lambda_s() + config.server_cap * p.mu_s()) *
                              config.dt;
    double total = 0.0;
    for (const auto& a : config.atoms) total += a.probability;
    if (!(event_mass < 1.0)) {
      os << "(lambda_c + lambda_s + M_s mu_s) dt = " << event_mass << " must be < 1";
    } else if (std::abs(total - 1.0) > 1e-12) {
      os << "atom probabilities sum to " << total;
    } else {
      for (const auto& a : config.atoms) {
        if (!(a.probability >= 0.0) || !on_lattice(a.value, config.dt)) {
          os << "atom " << a.value << " (p = " << a.probability
             << ") is not a positive multiple of dt = " << config.dt;
          break;
        }
      }
    }
  }
  if (!os.str().empty()) throw InvalidConfig(os.str());
}

std::vector<Transition> transition_kernel(const WorkloadState& state,
                                          const LyapunovConfig& config) {
  if (state.n_s < 0 || state.n_s > config.server_cap || !(state.X >= 0.0)) {
    std::ostringstream os;
    os << "state (X = " << state.X << ", n_s = " << state.n_s << ") outside [0, M_s = "
       << config.server_cap << "]";
    throw InvalidConfig(os.str());
  }
  const auto& p = config.params;
  const double dt = config.dt;
  const std::int64_t n = state.n_s;
  std::vector<Transition> out;
  out.reserve(config.atoms.size() + 3);

  double moved = 0.0;
  for (const auto& a : config.atoms) {
    const double prob = a.probability * p.lambda_c() * dt;
    out.push_back({prob, {new_workload(state.X, a.value, n, dt), n}});
    moved += prob;
  }
  if (n < config.server_cap) {
    const double prob = p.lambda_s() * dt;
    out.push_back({prob, {new_workload(state.X, 0.0, n, dt), n + 1}});
    moved += prob;
  }
  if (n >= 1) {
    const double prob = static_cast<double>(n) * p.mu_s() * dt;
    out.push_back({prob, {new_workload(state.X, 0.0, n - 1, dt), n - 1}});
    moved += prob;
  }
  const double stay = 1.0 - moved;
  if (stay < 0.0) {
    std::ostringstream os;
    os << "event probability " << moved << " exceeds 1 at n_s = " << n;
    throw InvalidConfig(os.str());
  }
  out.push_back({stay, {new_workload(state.X, 0.0, n, dt), n}});
  return out;
}

double lyapunov_value(const WorkloadState& state, const LyapunovConfig& config) {
  const double d = static_cast<double>(state.n_s) - config.params.rho_s();
  return config.k * config.params.mu_c() * state.X + d * d +
         config.m * static_cast<double>(state.n_s);
}

double expected_drift(const WorkloadState& state, const LyapunovConfig& config) {
  CompensatedSum sum;
  for (const auto& t : transition_kernel(state, config)) {
    sum.add(t.probability * v_delta(state, t.next, config));
  }
  return sum.value();
}

double interior_drift_rate(double n_s, const ModelParams& params) {
  const double d = n_s - params.rho_c();
  return -2.0 * params.mu_s() * d * d + params.mu_s() * (params.rho_c() - params.rho_s());
}

const char* regime_name(DriftRegime regime) noexcept {
  switch (regime) {
    case DriftRegime::Interior: return "interior";
    case DriftRegime::WorkloadBoundary: return "workload_boundary";
    case DriftRegime::NoServers: return "no_servers";
    case DriftRegime::ServerCap: return "server_cap";
  }
  return "unknown";
}

DriftRegime classify(const WorkloadState& state, const LyapunovConfig& config) {
  // Lattice points are compared in slot units to avoid X = n_s dt rounding.
  const double slots = state.X / config.dt;
  if (slots + kLatticeTolerance < static_cast<double>(state.n_s)) {
    return DriftRegime::WorkloadBoundary;
  }
  if (state.n_s == 0) return DriftRegime::NoServers;
  if (state.n_s == config.server_cap) return DriftRegime::ServerCap;
  return DriftRegime::Interior;
}

std::size_t DriftReport::hard_violations() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [](const DriftViolation& v) {
        return v.regime != DriftRegime::WorkloadBoundary;
      }));
}

std::size_t DriftReport::boundary_violations() const noexcept {
  return violations.size() - hard_violations();
}

bool DriftReport::certified() const noexcept {
  return hard_violations() == 0 && grid_covers_invariant_band;
}

std::string DriftReport::grid_description() const {
  std::ostringstream os;
  os << "n_s in [0, " << server_cap << "], X in {0, dt, ..., " << x_grid_max << "} with dt = "
     << dt << " (" << x_points << " points per n_s, " << states_checked << " states); drift is "
     << "X-invariant for X >= " << x_invariant_from << ", which the grid "
     << (grid_covers_invariant_band ? "covers, so the result extends to all X >= 0"
                                    : "does NOT cover; result holds on the grid only");
  return os.str();
}

DriftReport check_drift(const LyapunovConfig& config, std::optional<double> x_grid_max) {
  validate(config);
  DriftReport report;
  report.server_cap = config.server_cap;
  report.dt = config.dt;
  report.x_grid_max =
      x_grid_max ? *x_grid_max : config.max_atom() + (config.server_cap + 1) * config.dt;
  report.x_invariant_from = config.max_atom() + config.server_cap * config.dt;
  const auto last = static_cast<std::size_t>(
      std::floor(report.x_grid_max / config.dt + kLatticeTolerance));
  report.x_points = last + 1;
  report.grid_covers_invariant_band =
      static_cast<double>(last) * config.dt + kLatticeTolerance * config.dt >=
      report.x_invariant_from;
  report.regime_max_drift.fill(-std::numeric_limits<double>::infinity());
  report.max_drift = -std::numeric_limits<double>::infinity();

  for (std::int64_t n = 0; n <= config.server_cap; ++n) {
    for (std::size_t j = 0; j <= last; ++j) {
      const WorkloadState state{static_cast<double>(j) * config.dt, n};
      const double drift = expected_drift(state, config);
      const DriftRegime regime = classify(state, config);
      auto& slot = report.regime_max_drift[static_cast<std::size_t>(regime)];
      slot = std::max(slot, drift);
      if (drift > report.max_drift) {
        report.max_drift = drift;
        report.argmax_state = state;
      }
      if (drift >= 0.0) report.violations.push_back({state, drift, regime});
      ++report.states_checked;
    }
  }
  return report;
}

ConstantSearch search_constants(const LyapunovConfig& base, const std::vector<double>& k_grid,
                                const std::vector<double>& m_grid,
                                std::optional<double> x_grid_max) {
  ConstantSearch out;
  double best_score = std::numeric_limits<double>::infinity();
  bool have = false;
  for (const double k : k_grid) {
    for (const double m : m_grid) {
      LyapunovConfig config = base;
      config.k = k;
      config.m = m;
      DriftReport report = check_drift(config, x_grid_max);
      if (report.certified()) {
        out.found = true;
        out.best = {k, m};
        out.best_report = std::move(report);
        return out;
      }
      double score = -std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < kRegimeCount; ++r) {
        if (r != static_cast<std::size_t>(DriftRegime::WorkloadBoundary)) {
          score = std::max(score, report.regime_max_drift[r]);
        }
      }
      if (!have || score < best_score) {
        have = true;
        best_score = score;
        out.best = {k, m};
        out.best_report = std::move(report);
      }
    }
  }
  return out;
}

}  // namespace p2pq::stability
