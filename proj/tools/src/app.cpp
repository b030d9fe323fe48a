#include "p2pq/cli/app.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "p2pq/bounds.hpp"
#include "p2pq/cli/experiments.hpp"
#include "p2pq/errors.hpp"
#include "p2pq/kv_config.hpp"
#include "p2pq/qbd.hpp"
#include "p2pq/serialize.hpp"
#include "p2pq/sim.hpp"
#include "p2pq/stability.hpp"

namespace p2pq::cli {

namespace {

using nlohmann::json;

// Flag values are optional so that a config file can fill the gaps; flags win.
struct ModelFlags {
  std::optional<double> lambda_c;
  std::optional<double> mu_c;
  std::optional<double> lambda_s;
  std::optional<double> mu_s;
};

struct CommonFlags {
  std::string config;
  std::string out;
  std::string format;
};

class Settings {
 public:
  explicit Settings(const CommonFlags& common)
      : kv_(common.config.empty() ? KeyValues{} : load_key_values(common.config)) {}

  template <class T>
  std::optional<T> get(const std::optional<T>& flag, std::string_view key) const {
    if (flag) return flag;
    const auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    if constexpr (std::is_same_v<T, std::string>) {
      return it->second;
    } else if constexpr (std::is_floating_point_v<T>) {
      return parse_decimal(key, it->second);
    } else {
      const double v = parse_decimal(key, it->second);
      if (v != std::floor(v)) {
        throw InvalidConfig("value for '" + std::string(key) + "' must be an integer");
      }
      return static_cast<T>(v);
    }
  }

  template <class T>
  T get_or(const std::optional<T>& flag, std::string_view key, T fallback) const {
    return get(flag, key).value_or(fallback);
  }

  template <class T>
  T require(const std::optional<T>& flag, std::string_view key) const {
    auto v = get(flag, key);
    if (!v) throw InvalidConfig("missing required value '" + std::string(key) + "'");
    return *v;
  }

  ModelParams params(const ModelFlags& f) const {
    return ModelParams(require(f.lambda_c, "lambda_c"), require(f.mu_c, "mu_c"),
                       require(f.lambda_s, "lambda_s"), require(f.mu_s, "mu_s"));
  }

 private:
  KeyValues kv_;
};

void add_model_flags(CLI::App* app, ModelFlags& f) {
  app->add_option("--lambda-c", f.lambda_c, "Job arrival rate");
  app->add_option("--mu-c", f.mu_c, "Single-server service rate");
  app->add_option("--lambda-s", f.lambda_s, "Server arrival rate");
  app->add_option("--mu-s", f.mu_s, "Inverse mean server lifetime");
}

void add_common_flags(CLI::App* app, CommonFlags& c, const std::string& default_format) {
  c.format = default_format;
  app->add_option("--config", c.config, "Flat key = value config file (flags win)");
  app->add_option("--out", c.out, "Write output to this file instead of stdout");
  app->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"csv", "json", "text"}));
}

void emit(const CommonFlags& c, std::ostream& out, const std::string& text) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(c.out, std::ios::binary);
  if (!file) throw InvalidConfig("cannot write '" + c.out + "'");
  file << text;
}

std::string with_newline(std::string s) {
  if (s.empty() || s.back() != '\n') s += '\n';
  return s;
}

std::string tags_json(const NotationTags& t) {
  auto c = [](ProcessTag tag) { return std::string(1, static_cast<char>(tag)); };
  json j{{"notation", render_notation(t)},
         {"job_arrival", c(t.job_arrival)},
         {"workload", c(t.workload)},
         {"server_arrival", c(t.server_arrival)},
         {"server_lifetime", c(t.server_lifetime)}};
  return j.dump(2);
}

std::string drift_text(const stability::DriftReport& r, const stability::LyapunovConfig& c) {
  std::ostringstream os;
  os.precision(10);
  os << (r.certified() ? "PASS" : "FAIL") << ": Foster-Lyapunov drift check, k = " << c.k
     << ", m = " << c.m << ", M_s = " << c.server_cap << ", dt = " << c.dt << "\n";
  os << "grid: " << r.grid_description() << "\n";
  os << "max drift " << r.max_drift << " at (X = " << r.argmax_state.X
     << ", n_s = " << r.argmax_state.n_s << ")\n";
  for (std::size_t i = 0; i < stability::kRegimeCount; ++i) {
    os << "  regime " << stability::regime_name(static_cast<stability::DriftRegime>(i))
       << ": max drift " << r.regime_max_drift[i] << "\n";
  }
  os << "violations outside X < n_s dt: " << r.hard_violations()
     << "; listed X < n_s dt states with drift >= 0: " << r.boundary_violations() << "\n";
  for (const auto& v : r.violations) {
    os << "  " << stability::regime_name(v.regime) << " X = " << v.state.X
       << " n_s = " << v.state.n_s << " drift = " << v.drift << "\n";
  }
  return os.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Peer-to-peer queue models: notation, simulation, QBD solver, bounds, stability"};
  app.require_subcommand(1);

  // parse
  std::string notation_text;
  CommonFlags parse_common;
  auto* parse_cmd = app.add_subcommand("parse", "Parse extended Kendall notation A/B/(C/E)");
  parse_cmd->add_option("notation", notation_text, "Notation, e.g. M/G/(M/M)")->required();
  add_common_flags(parse_cmd, parse_common, "text");

  // solve
  ModelFlags solve_model;
  CommonFlags solve_common;
  std::optional<int> solve_ms;
  int solve_levels = 50;
  auto* solve_cmd = app.add_subcommand("solve", "Matrix-geometric equilibrium of M/M/(M/M)");
  add_model_flags(solve_cmd, solve_model);
  add_common_flags(solve_cmd, solve_common, "json");
  solve_cmd->add_option("--ms", solve_ms, "Phase truncation M_s (default ceil(rho_s + 10 sqrt(rho_s)))");
  solve_cmd->add_option("--levels", solve_levels, "Highest n_c written in CSV output");

  // simulate
  ModelFlags sim_model;
  CommonFlags sim_common;
  std::optional<std::string> sim_notation;
  std::optional<double> sim_horizon;
  std::optional<double> sim_warmup;
  std::optional<int> sim_reps;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::int64_t> sim_ms;
  std::optional<std::string> sim_workload;
  auto* sim_cmd = app.add_subcommand("simulate", "Discrete-event simulation");
  add_model_flags(sim_cmd, sim_model);
  add_common_flags(sim_cmd, sim_common, "json");
  sim_cmd->add_option("--notation", sim_notation, "M/M/(M/M) (default), M/D/(M/M) or M/G/(M/M)");
  sim_cmd->add_option("--horizon", sim_horizon, "Simulated time per replication (default 1e5)");
  sim_cmd->add_option("--warmup", sim_warmup, "Discarded initial time (default 10% of horizon)");
  sim_cmd->add_option("--reps", sim_reps, "Replications (default 20)");
  sim_cmd->add_option("--seed", sim_seed, "Base seed (default 1)");
  sim_cmd->add_option("--ms", sim_ms, "Server cap M_s (default unbounded)");
  sim_cmd->add_option("--workload", sim_workload,
                      "exp | deterministic:<v> | discrete:<L>:<p>,... | hyperexp:<p>:<rate>,... "
                      "| hyperexp-scv:<c2>");

  // bounds
  ModelFlags bounds_model;
  CommonFlags bounds_common;
  std::optional<double> bounds_enc;
  auto* bounds_cmd = app.add_subcommand("bounds", "Queue-length and sojourn-time bounds");
  add_model_flags(bounds_cmd, bounds_model);
  add_common_flags(bounds_cmd, bounds_common, "json");
  bounds_cmd->add_option("--E-nc", bounds_enc, "Check this mean queue length against the bounds");

  // sweep
  CommonFlags sweep_common;
  std::optional<double> sweep_mu_c;
  std::optional<double> sweep_rho_s;
  std::optional<double> sweep_mu_s;
  std::optional<double> sweep_lo;
  std::optional<double> sweep_hi;
  std::optional<int> sweep_points;
  std::optional<int> sweep_ms;
  auto* sweep_cmd = app.add_subcommand("sweep", "Solved E[n_c] vs bounds over a rho_c sweep");
  add_common_flags(sweep_cmd, sweep_common, "csv");
  sweep_cmd->add_option("--mu-c", sweep_mu_c, "Service rate (default 10)");
  sweep_cmd->add_option("--rho-s", sweep_rho_s, "Mean servers (default 10)");
  sweep_cmd->add_option("--mu-s", sweep_mu_s, "Server death rate (default 1)");
  sweep_cmd->add_option("--rho-min", sweep_lo, "Smallest rho_c (default 0.05)");
  sweep_cmd->add_option("--rho-max", sweep_hi, "Largest rho_c (default 0.98 rho_s)");
  sweep_cmd->add_option("--points", sweep_points, "Log-spaced points (default 40)");
  sweep_cmd->add_option("--ms", sweep_ms, "Phase truncation M_s");

  // verify-stability
  ModelFlags vs_model;
  CommonFlags vs_common;
  std::optional<double> vs_dt;
  std::optional<int> vs_ms;
  std::optional<double> vs_k;
  std::optional<double> vs_m;
  std::optional<double> vs_xmax;
  std::optional<std::string> vs_workload;
  auto* vs_cmd =
      app.add_subcommand("verify-stability", "Foster-Lyapunov drift check of the M/G chain");
  add_model_flags(vs_cmd, vs_model);
  add_common_flags(vs_cmd, vs_common, "text");
  vs_cmd->add_option("--dt", vs_dt, "Slot length");
  vs_cmd->add_option("--ms", vs_ms, "Server cap M_s");
  vs_cmd->add_option("--k", vs_k, "Lyapunov constant k (with --m)");
  vs_cmd->add_option("--m", vs_m, "Lyapunov constant m (with --k)");
  vs_cmd->add_option("--x-max", vs_xmax, "Largest X on the grid");
  vs_cmd->add_option("--workload", vs_workload,
                     "deterministic:<v> | discrete:<L>:<p>,... (default deterministic 1/mu_c)");

  // figures
  CommonFlags fig_common;
  std::string fig_out;
  std::optional<std::uint64_t> fig_seed;
  std::optional<int> fig_reps;
  std::optional<double> fig_horizon;
  bool fig_no_sim = false;
  auto* fig_cmd = app.add_subcommand("figures", "Write the three figure datasets as CSV");
  fig_cmd->add_option("--out", fig_out, "Output directory")->required();
  fig_cmd->add_option("--config", fig_common.config, "Flat key = value config file");
  fig_cmd->add_option("--seed", fig_seed, "Simulation seed for the figure-3 cross-check");
  fig_cmd->add_option("--sim-reps", fig_reps, "Replications for the figure-3 cross-check");
  fig_cmd->add_option("--sim-horizon", fig_horizon, "Horizon for the figure-3 cross-check");
  fig_cmd->add_flag("--no-sim", fig_no_sim, "Skip the simulation cross-check");

  std::vector<std::string> argv_tail(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv_tail.begin(), argv_tail.end());
  try {
    app.parse(argv_tail);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e_out;
    const int code = app.exit(e, o, e_out);
    out << o.str();
    err << e_out.str();
    return code == 0 ? kSuccess : kInvalidInput;
  }

  try {
    if (parse_cmd->parsed()) {
      const auto tags = parse_notation(notation_text);
      emit(parse_common, out,
           with_newline(parse_common.format == "json" ? tags_json(tags) : render_notation(tags)));
    } else if (solve_cmd->parsed()) {
      const Settings s(solve_common);
      const auto params = s.params(solve_model);
      if (!is_stable_predicate(params)) throw NotStrictlyStable(params.rho_c(), params.rho_s());
      const auto sol = qbd::solve(params, s.get_or(solve_ms, "ms", 0));
      emit(solve_common, out,
           solve_common.format == "csv" ? pi_csv(sol, s.get_or(std::optional<int>(solve_levels), "levels", 50))
                                        : with_newline(to_json(sol)));
    } else if (sim_cmd->parsed()) {
      const Settings s(sim_common);
      const auto params = s.params(sim_model);
      const auto tags = parse_notation(s.get_or(sim_notation, "notation", std::string("M/M/(M/M)")));
      sim::SimConfig config{.spec = {tags, params},
                            .horizon = s.get_or(sim_horizon, "horizon", 1e5),
                            .warmup = s.get(sim_warmup, "warmup"),
                            .replications = s.get_or(sim_reps, "reps", 20),
                            .seed = s.get_or(sim_seed, "seed", std::uint64_t{1}),
                            .max_servers = s.get(sim_ms, "ms")};
      const auto workload = s.get(sim_workload, "workload");
      if (workload) config.workload = parse_workload(*workload, params.mu_c());
      const bool mm = tags.workload == ProcessTag::M &&
                      (!config.workload || config.workload->tag() == ProcessTag::M) &&
                      !workload;
      const auto stats = mm ? sim::simulate_mm(config) : sim::simulate_mg(config);
      emit(sim_common, out,
           sim_common.format == "csv"
               ? sim_stats_csv_header() + "\n" + sim_stats_csv_row(stats) + "\n"
               : with_newline(to_json(stats)));
    } else if (bounds_cmd->parsed()) {
      const Settings s(bounds_common);
      const auto params = s.params(bounds_model);
      const auto q = bounds::queue_length_bounds(params);
      const auto t = bounds::sojourn_bounds(params);
      const auto enc = s.get(bounds_enc, "E_nc");
      if (bounds_common.format == "csv") {
        std::string text = "rho_c,rho_s,lower,upper,static_baseline,sojourn_lower,sojourn_upper";
        std::string row = format_decimal(params.rho_c()) + "," + format_decimal(params.rho_s()) +
                          "," + format_decimal(q.lower) + "," + format_decimal(q.upper) + "," +
                          format_decimal(bounds::static_baseline(params)) + "," +
                          format_decimal(t.lower) + "," + format_decimal(t.upper);
        if (enc) {
          text += ",E_nc,E_T,inside";
          row += "," + format_decimal(*enc) + "," +
                 format_decimal(bounds::sojourn_from_queue_length(*enc, params.lambda_c())) + "," +
                 (bounds::check_bounds(params, *enc).inside ? "true" : "false");
        }
        emit(bounds_common, out, text + "\n" + row + "\n");
      } else {
        json j{{"rho_c", params.rho_c()},
               {"rho_s", params.rho_s()},
               {"lower", q.lower},
               {"upper", q.upper},
               {"ratio", q.upper / q.lower},
               {"static_baseline", bounds::static_baseline(params)},
               {"sojourn_lower", t.lower},
               {"sojourn_upper", t.upper}};
        if (enc) {
          const auto check = bounds::check_bounds(params, *enc);
          j["E_nc"] = *enc;
          j["E_T"] = bounds::sojourn_from_queue_length(*enc, params.lambda_c());
          j["inside"] = check.inside;
          j["ratio_to_lower"] = check.ratio_to_lower;
          j["ratio_to_upper"] = check.ratio_to_upper;
        }
        emit(bounds_common, out, with_newline(j.dump(2)));
      }
    } else if (sweep_cmd->parsed()) {
      const Settings s(sweep_common);
      SweepConfig config;
      config.mu_c = s.get_or(sweep_mu_c, "mu_c", 10.0);
      config.rho_s = s.get_or(sweep_rho_s, "rho_s", 10.0);
      config.mu_s = s.get_or(sweep_mu_s, "mu_s", 1.0);
      config.phase_cap = s.get_or(sweep_ms, "ms", 0);
      config.rho_c = log_grid(s.get_or(sweep_lo, "rho_min", 0.05),
                              s.get_or(sweep_hi, "rho_max", 0.98 * config.rho_s),
                              s.get_or(sweep_points, "points", 40));
      const auto rows = run_sweep(config);
      if (sweep_common.format == "json") {
        json j = json::array();
        for (const auto& r : rows) {
          j.push_back({{"rho_c", r.rho_c}, {"E_nc_solved", r.E_nc}, {"lower", r.lower},
                       {"upper", r.upper}, {"E_T", r.E_T}});
        }
        emit(sweep_common, out, with_newline(j.dump(2)));
      } else {
        emit(sweep_common, out, sweep_csv(rows));
      }
    } else if (vs_cmd->parsed()) {
      const Settings s(vs_common);
      const auto params = s.params(vs_model);
      const auto workload_text = s.get(vs_workload, "workload");
      const auto workload = workload_text ? parse_workload(*workload_text, params.mu_c())
                                          : WorkloadDist::deterministic(1.0 / params.mu_c());
      stability::LyapunovOverrides overrides;
      overrides.dt = s.get(vs_dt, "dt");
      overrides.server_cap = s.get(vs_ms, "ms");
      const auto k = s.get(vs_k, "k");
      const auto m = s.get(vs_m, "m");
      if (k.has_value() != m.has_value()) throw InvalidConfig("--k and --m go together");
      if (k) overrides.constants = stability::LyapunovConstants{*k, *m};
      const auto config = stability::make_lyapunov_config(params, workload, overrides);
      const auto report = stability::check_drift(config, s.get(vs_xmax, "x_max"));
      emit(vs_common, out,
           vs_common.format == "json" ? with_newline(to_json(report, config))
                                      : drift_text(report, config));
      if (!report.certified()) return kUnstable;
    } else if (fig_cmd->parsed()) {
      const Settings s(fig_common);
      Figure3Config f3;
      f3.seed = s.get_or(fig_seed, "seed", f3.seed);
      f3.replications = s.get_or(fig_reps, "sim_reps", f3.replications);
      f3.horizon = s.get_or(fig_horizon, "sim_horizon", f3.horizon);
      f3.simulate = !fig_no_sim;
      write_figures(fig_out, Figure1Config{}, Figure2Config{}, f3);
      out << "wrote figure1.csv, figure2.csv, figure3_nc_given_ns.csv, figure3_ns_given_nc.csv to "
          << fig_out << "\n";
    }
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const StabilityError& e) {
    err << "error: " << e.what() << "\n";
    return kUnstable;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
  return kSuccess;
}

}  // namespace p2pq::cli
