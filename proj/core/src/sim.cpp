#include "p2pq/sim.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "p2pq/errors.hpp"
#include "p2pq/parallel.hpp"

namespace p2pq::sim {

namespace {

constexpr std::int64_t kDefaultGuardJobs = 10'000'000;

// Time integrals of one replication over [warmup, horizon).
struct Accumulator {
  struct Key {
    double time = 0.0;
    double weighted = 0.0;
    std::uint64_t visits = 0;
  };

  Accumulator(double warmup, double horizon, int windows, double snapshot_interval)
      : warmup(warmup),
        horizon(horizon),
        window_len((horizon - warmup) / windows),
        snapshot_interval(snapshot_interval),
        next_snapshot(warmup),
        window_X(static_cast<std::size_t>(windows), 0.0),
        window_nc(static_cast<std::size_t>(windows), 0.0) {}

  // State constant on [t0, t1) except X(t) = X0 - slope (t - t0).
  void observe(double t0, double t1, std::int64_t n_c, std::int64_t n_s, double X0,
               double slope) {
    const double a = std::max(t0, warmup);
    const double b = std::min(t1, horizon);
    if (!(b > a)) return;
    const double len = b - a;
    const double nc = static_cast<double>(n_c);
    const double ns = static_cast<double>(n_s);
    auto X_integral = [&](double lo, double hi) {
      const double X_lo = X0 - slope * (lo - t0);
      const double piece = hi - lo;
      return X_lo * piece - 0.5 * slope * piece * piece;
    };

    total_time += len;
    int_nc += nc * len;
    int_ns += ns * len;
    int_X += X_integral(a, b);
    int_nc_ns += nc * ns * len;
    if (n_c == 0) empty_time += len;

    bump(by_ns, n_s, len, nc * len, last_ns);
    bump(by_nc, n_c, len, ns * len, last_nc);

    const std::size_t last_window = window_X.size() - 1;
    double lo = a;
    while (lo < b) {
      auto w = std::min(last_window, static_cast<std::size_t>((lo - warmup) / window_len));
      while (w < last_window && warmup + static_cast<double>(w + 1) * window_len <= lo) ++w;
      const double hi =
          w == last_window ? b : std::min(b, warmup + static_cast<double>(w + 1) * window_len);
      window_X[w] += X_integral(lo, hi);
      window_nc[w] += nc * (hi - lo);
      lo = hi;
    }

    for (; next_snapshot < b; next_snapshot += snapshot_interval) {
      if (next_snapshot < a) continue;
      const auto idx = static_cast<std::size_t>(n_s);
      if (snapshots.size() <= idx) snapshots.resize(idx + 1, 0);
      ++snapshots[idx];
    }
  }

  void regeneration(double t) {
    if (t >= warmup && t < horizon) ++regenerations;
  }

  void departure(double t, double sojourn) {
    if (t >= warmup && t < horizon) {
      sojourn_sum += sojourn;
      ++sojourn_count;
    }
  }

  static void bump(std::vector<Key>& keys, std::int64_t key, double len, double weighted,
                   std::int64_t& last) {
    const auto idx = static_cast<std::size_t>(key);
    if (keys.size() <= idx) keys.resize(idx + 1);
    keys[idx].time += len;
    keys[idx].weighted += weighted;
    if (key != last) {
      ++keys[idx].visits;
      last = key;
    }
  }

  double warmup;
  double horizon;
  double window_len;
  double snapshot_interval;
  double next_snapshot;

  double total_time = 0.0;
  double int_nc = 0.0;
  double int_ns = 0.0;
  double int_X = 0.0;
  double int_nc_ns = 0.0;
  double empty_time = 0.0;
  std::vector<Key> by_ns;
  std::vector<Key> by_nc;
  std::int64_t last_ns = -1;
  std::int64_t last_nc = -1;
  std::uint64_t regenerations = 0;
  double sojourn_sum = 0.0;
  std::uint64_t sojourn_count = 0;
  std::vector<double> window_X;
  std::vector<double> window_nc;
  std::vector<std::uint64_t> snapshots;
};

struct Guards {
  std::int64_t jobs;
  double workload;
};

Guards guards_of(const SimConfig& c) {
  return {c.guard_nc.value_or(kDefaultGuardJobs),
          c.guard_workload.value_or(static_cast<double>(kDefaultGuardJobs) /
                                    c.spec.params.mu_c())};
}

std::int64_t server_cap(const SimConfig& c) {
  return c.max_servers.value_or(std::numeric_limits<std::int64_t>::max());
}

std::int64_t initial_servers(const SimConfig& c) {
  const auto start = static_cast<std::int64_t>(std::llround(c.spec.params.rho_s()));
  return std::min(start, server_cap(c));
}

double snapshot_interval(const SimConfig& c) {
  return c.snapshot_interval.value_or(10.0 / c.spec.params.mu_s());
}

[[noreturn]] void guard_violation(const char* what) {
  throw std::logic_error(std::string("transition fired with a failing guard: ") + what);
}

Accumulator run_mm(const SimConfig& c, std::uint64_t replication) {
  const auto& p = c.spec.params;
  Rng rng = Rng::for_stream(c.seed, replication);
  Accumulator acc(c.effective_warmup(), c.horizon, c.windows, snapshot_interval(c));
  const Guards guard = guards_of(c);
  const std::int64_t cap = server_cap(c);

  std::int64_t n_c = 0;
  std::int64_t n_s = initial_servers(c);
  std::deque<double> arrivals;
  double t = 0.0;
  for (;;) {
    const double arrive = p.lambda_c();
    const double depart = n_c >= 1 ? static_cast<double>(n_s) * p.mu_c() : 0.0;
    const double server_in = n_s < cap ? p.lambda_s() : 0.0;
    const double server_out = static_cast<double>(n_s) * p.mu_s();
    const double total = arrive + depart + server_in + server_out;
    const double t_next = t + rng.exponential(total);
    acc.observe(t, t_next, n_c, n_s, static_cast<double>(n_c) / p.mu_c(), 0.0);
    if (t_next >= c.horizon) break;
    t = t_next;

    const double u = rng.uniform() * total;
    if (u < arrive) {
      ++n_c;
      arrivals.push_back(t);
      if (n_c > guard.jobs) {
        throw UnstableDivergence(n_c, n_s, static_cast<double>(n_c) / p.mu_c(), guard.jobs,
                                 guard.workload, t);
      }
    } else if (u < arrive + depart) {
      if (n_c < 1 || n_s < 1) guard_violation("job departure needs n_c >= 1 and n_s >= 1");
      --n_c;
      acc.departure(t, t - arrivals.front());
      arrivals.pop_front();
      if (n_c == 0) acc.regeneration(t);
    } else if (u < arrive + depart + server_in) {
      if (n_s >= cap) guard_violation("server arrival above M_s");
      ++n_s;
    } else {
      if (n_s < 1) guard_violation("server departure needs n_s >= 1");
      --n_s;
    }
  }
  return acc;
}

Accumulator run_mg(const SimConfig& c, const WorkloadDist& workload,
                   std::uint64_t replication) {
  const auto& p = c.spec.params;
  Rng rng = Rng::for_stream(c.seed, replication);
  Accumulator acc(c.effective_warmup(), c.horizon, c.windows, snapshot_interval(c));
  const Guards guard = guards_of(c);
  const std::int64_t cap = server_cap(c);

  // queue.front() is the head-of-line job's remaining work; rest is the
  // total work of the jobs behind it.
  std::deque<double> queue;
  double rest = 0.0;
  std::int64_t n_s = initial_servers(c);
  double t = 0.0;
  auto workload_now = [&] { return queue.empty() ? 0.0 : queue.front() + rest; };

  for (;;) {
    const auto n_c = static_cast<std::int64_t>(queue.size());
    const double X = workload_now();
    const double drain = n_c > 0 ? static_cast<double>(n_s) : 0.0;
    const double arrive = p.lambda_c();
    const double server_in = n_s < cap ? p.lambda_s() : 0.0;
    const double server_out = static_cast<double>(n_s) * p.mu_s();
    const double total = arrive + server_in + server_out;
    const double tau = rng.exponential(total);
    const double to_completion =
        drain > 0.0 ? queue.front() / drain : std::numeric_limits<double>::infinity();

    if (to_completion <= tau) {
      const double t_done = t + to_completion;
      acc.observe(t, t_done, n_c, n_s, X, drain);
      if (t_done >= c.horizon) break;
      t = t_done;
      queue.pop_front();
      if (queue.empty()) {
        rest = 0.0;
        acc.regeneration(t);
      } else {
        rest = std::max(0.0, rest - queue.front());
      }
      // The exponential clocks are memoryless, so tau is simply redrawn.
      continue;
    }

    const double t_next = t + tau;
    acc.observe(t, t_next, n_c, n_s, X, drain);
    if (t_next >= c.horizon) break;
    t = t_next;
    if (n_c > 0) queue.front() = std::max(0.0, queue.front() - drain * tau);

    const double u = rng.uniform() * total;
    if (u < arrive) {
      const double w = workload.sample(rng);
      if (!queue.empty()) rest += w;
      queue.push_back(w);
      const auto jobs = static_cast<std::int64_t>(queue.size());
      const double X_now = workload_now();
      if (jobs > guard.jobs || X_now > guard.workload) {
        throw UnstableDivergence(jobs, n_s, X_now, guard.jobs, guard.workload, t);
      }
    } else if (u < arrive + server_in) {
      if (n_s >= cap) guard_violation("server arrival above M_s");
      ++n_s;
    } else {
      if (n_s < 1) guard_violation("server departure needs n_s >= 1");
      --n_s;
    }
  }
  return acc;
}

Estimate estimate(const std::vector<double>& values) {
  Estimate e;
  const auto n = static_cast<double>(values.size());
  if (values.empty()) return e;
  double sum = 0.0;
  for (double v : values) sum += v;
  e.mean = sum / n;
  if (values.size() < 2) {
    e.half_width = std::numeric_limits<double>::infinity();
    return e;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - e.mean) * (v - e.mean);
  e.half_width = normal_critical_95() * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return e;
}

std::map<std::int64_t, ConditionalEstimate> conditional(const std::vector<Accumulator>& reps,
                                                        bool by_ns) {
  std::size_t keys = 0;
  for (const auto& r : reps) keys = std::max(keys, (by_ns ? r.by_ns : r.by_nc).size());
  std::map<std::int64_t, ConditionalEstimate> out;
  for (std::size_t k = 0; k < keys; ++k) {
    std::vector<double> values;
    ConditionalEstimate ce;
    double pooled_time = 0.0;
    double total_time = 0.0;
    for (const auto& r : reps) {
      total_time += r.total_time;
      const auto& table = by_ns ? r.by_ns : r.by_nc;
      if (k >= table.size() || table[k].time <= 0.0) continue;
      values.push_back(table[k].weighted / table[k].time);
      pooled_time += table[k].time;
      ce.visits += table[k].visits;
    }
    if (values.empty()) continue;
    ce.value = estimate(values);
    ce.replications = static_cast<int>(values.size());
    ce.occupancy = pooled_time / total_time;
    out.emplace(static_cast<std::int64_t>(k), ce);
  }
  return out;
}

SimStats aggregate(const SimConfig& c, const std::vector<Accumulator>& reps, bool with_sojourn) {
  SimStats s;
  s.replications = static_cast<int>(reps.size());
  s.horizon = c.horizon;
  s.warmup = c.effective_warmup();

  std::vector<double> nc, ns, X, cov, empty, sojourn;
  for (const auto& r : reps) {
    const double T = r.total_time;
    const double m_nc = r.int_nc / T;
    const double m_ns = r.int_ns / T;
    nc.push_back(m_nc);
    ns.push_back(m_ns);
    X.push_back(r.int_X / T);
    cov.push_back(r.int_nc_ns / T - m_nc * m_ns);
    empty.push_back(r.empty_time / T);
    if (r.sojourn_count > 0) {
      sojourn.push_back(r.sojourn_sum / static_cast<double>(r.sojourn_count));
    }
    s.regenerations_per_replication.push_back(r.regenerations);
    s.regeneration_count += r.regenerations;
    for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
      if (r.snapshots[i] > 0) s.ns_snapshots[static_cast<std::int64_t>(i)] += r.snapshots[i];
    }
  }
  s.mean_nc = estimate(nc);
  s.mean_ns = estimate(ns);
  s.mean_X = estimate(X);
  s.cov_nc_ns = estimate(cov);
  s.empty_fraction = estimate(empty);
  if (with_sojourn && sojourn.size() == reps.size()) s.mean_sojourn = estimate(sojourn);

  const auto windows = static_cast<std::size_t>(c.windows);
  const double window_len = (c.horizon - s.warmup) / c.windows;
  for (std::size_t w = 0; w < windows; ++w) {
    std::vector<double> wx, wn;
    for (const auto& r : reps) {
      wx.push_back(r.window_X[w] / window_len);
      wn.push_back(r.window_nc[w] / window_len);
    }
    s.window_mean_X.push_back(estimate(wx));
    s.window_mean_nc.push_back(estimate(wn));
  }

  s.cond_mean_nc_given_ns = conditional(reps, true);
  s.cond_mean_ns_given_nc = conditional(reps, false);
  return s;
}

void require_memoryless_servers(const SimConfig& c) {
  const auto& t = c.spec.tags;
  if (t.job_arrival != ProcessTag::M || t.server_arrival != ProcessTag::M ||
      t.server_lifetime != ProcessTag::M) {
    throw InvalidConfig("only Poisson job arrivals and M/M server dynamics are simulable, got " +
                        render_notation(t));
  }
}

template <class Run>
std::vector<Accumulator> run_replications(const SimConfig& c, Run&& run) {
  std::vector<std::optional<Accumulator>> slots(static_cast<std::size_t>(c.replications));
  parallel_for_index(slots.size(), [&](std::size_t i) { slots[i].emplace(run(i)); });
  std::vector<Accumulator> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace

double normal_critical_95() {
  static const double z = boost::math::quantile(boost::math::normal_distribution<>(), 0.975);
  return z;
}

double SimConfig::effective_warmup() const noexcept { return warmup.value_or(0.1 * horizon); }

void SimConfig::validate() const {
  std::ostringstream os;
  const double w = effective_warmup();
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    os << "horizon must be positive and finite, got " << horizon;
  } else if (!(w >= 0.0) || !(w < horizon)) {
    os << "warmup must satisfy 0 <= warmup < horizon, got " << w;
  } else if (replications < 1) {
    os << "replications must be >= 1, got " << replications;
  } else if (max_servers && *max_servers < 1) {
    os << "max_servers must be positive, got " << *max_servers;
  } else if (windows < 1) {
    os << "windows must be >= 1, got " << windows;
  } else if (snapshot_interval && !(*snapshot_interval > 0.0)) {
    os << "snapshot interval must be positive";
  } else if ((guard_nc && *guard_nc < 1) || (guard_workload && !(*guard_workload > 0.0))) {
    os << "divergence guards must be positive";
  }
  if (!os.str().empty()) throw InvalidConfig(os.str());
}

SimStats simulate_mm(const SimConfig& config) {
  config.validate();
  require_memoryless_servers(config);
  if (config.spec.tags.workload != ProcessTag::M) {
    throw InvalidConfig("simulate_mm needs an exponential workload, got " +
                        render_notation(config.spec.tags));
  }
  const auto reps = run_replications(config, [&](std::size_t i) { return run_mm(config, i); });
  return aggregate(config, reps, true);
}

SimStats simulate_mg(const SimConfig& config) {
  config.validate();
  require_memoryless_servers(config);
  const auto& p = config.spec.params;
  WorkloadDist workload = [&] {
    if (config.workload) return *config.workload;
    switch (config.spec.tags.workload) {
      case ProcessTag::M: return WorkloadDist::from_params(p);
      case ProcessTag::D: return WorkloadDist::deterministic(1.0 / p.mu_c());
      case ProcessTag::G: break;
    }
    throw InvalidConfig("workload tag G needs an explicit workload distribution");
  }();
  const double mean = workload.mean();
  if (!std::isfinite(mean)) {
    throw InfiniteMeanWorkload("workload " + workload.describe() + " has no finite mean");
  }
  if (std::abs(mean * p.mu_c() - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "workload mean " << mean << " does not match 1 / mu_c = " << 1.0 / p.mu_c();
    throw InvalidConfig(os.str());
  }
  const auto reps =
      run_replications(config, [&](std::size_t i) { return run_mg(config, workload, i); });
  SimStats stats = aggregate(config, reps, false);
  stats.nc_discipline_free = workload.tag() == ProcessTag::M;
  return stats;
}

}  // namespace p2pq::sim
