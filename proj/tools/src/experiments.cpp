#include "p2pq/cli/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "p2pq/bounds.hpp"
#include "p2pq/errors.hpp"
#include "p2pq/kv_config.hpp"
#include "p2pq/parallel.hpp"

namespace p2pq::cli {

namespace {

constexpr double kRhoCap = 0.98;

// Only moments are needed for sweeps; skip storing levels.
const qbd::EquilibriumOptions kMomentsOnly{1e-13, 1};

double solved_queue_length(const ModelParams& params, int phase_cap) {
  return qbd::solve(params, phase_cap, kMomentsOnly).moments.E_nc;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidConfig("cannot write '" + path.string() + "'");
  out << content;
}

std::string optional_cells(const std::optional<sim::ConditionalEstimate>& e) {
  if (!e) return ",,";
  return format_decimal(e->value.mean) + "," +
         (std::isfinite(e->value.half_width) ? format_decimal(e->value.half_width) : "") + "," +
         format_decimal(e->occupancy);
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, int points) {
  if (points < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw InvalidConfig("log grid needs points >= 1 and 0 < lo <= hi");
  }
  if (points == 1) return {hi};
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points));
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) grid.push_back(lo * std::exp(step * i));
  grid.back() = hi;
  return grid;
}

std::vector<double> default_rho_grid(double rho_s) { return log_grid(0.05, kRhoCap * rho_s, 40); }

void check_rho_grid(const std::vector<double>& grid, double rho_s) {
  if (grid.empty()) throw InvalidConfig("rho_c sweep range is empty");
  for (double r : grid) {
    if (!(r > 0.0) || r > kRhoCap * rho_s * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "rho_c = " << r << " outside (0, " << kRhoCap << " rho_s = " << kRhoCap * rho_s
         << "]";
      throw InvalidConfig(os.str());
    }
  }
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  const auto grid = config.rho_c.empty() ? default_rho_grid(config.rho_s) : config.rho_c;
  check_rho_grid(grid, config.rho_s);
  std::vector<SweepRow> rows(grid.size());
  parallel_for_index(grid.size(), [&](std::size_t i) {
    const auto params = ModelParams::from_loads(grid[i], config.mu_c, config.rho_s, config.mu_s);
    const double E_nc = solved_queue_length(params, config.phase_cap);
    const auto b = bounds::queue_length_bounds(params);
    rows[i] = {grid[i], E_nc, b.lower, b.upper,
               bounds::sojourn_from_queue_length(E_nc, params.lambda_c())};
  });
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "rho_c,E_nc_solved,lower,upper,E_T\n";
  for (const auto& r : rows) {
    out += format_decimal(r.rho_c) + "," + format_decimal(r.E_nc) + "," +
           format_decimal(r.lower) + "," + format_decimal(r.upper) + "," +
           format_decimal(r.E_T) + "\n";
  }
  return out;
}

std::vector<SweepRow> run_figure1(const Figure1Config& config) { return run_sweep(config); }

std::string figure1_csv(const std::vector<SweepRow>& rows) {
  std::string out = "rho_c,E_nc,lower,upper\n";
  for (const auto& r : rows) {
    out += format_decimal(r.rho_c) + "," + format_decimal(r.E_nc) + "," +
           format_decimal(r.lower) + "," + format_decimal(r.upper) + "\n";
  }
  return out;
}

Figure2Result run_figure2(const Figure2Config& config) {
  if (config.ratios.empty()) throw InvalidConfig("figure 2 needs at least one mu_c/mu_s ratio");
  Figure2Result result;
  result.ratios = config.ratios;
  result.rho_c = config.rho_c.empty() ? default_rho_grid(config.rho_s) : config.rho_c;
  check_rho_grid(result.rho_c, config.rho_s);
  const std::size_t cols = config.ratios.size();
  result.E_nc.assign(result.rho_c.size(), std::vector<double>(cols, 0.0));
  parallel_for_index(result.rho_c.size() * cols, [&](std::size_t idx) {
    const std::size_t row = idx / cols;
    const std::size_t col = idx % cols;
    const double mu_c = config.ratios[col] * config.mu_s;
    const auto params =
        ModelParams::from_loads(result.rho_c[row], mu_c, config.rho_s, config.mu_s);
    result.E_nc[row][col] = solved_queue_length(params, config.phase_cap);
  });
  return result;
}

std::string figure2_csv(const Figure2Result& result) {
  std::string out = "rho_c";
  for (double r : result.ratios) out += ",E_nc_ratio_" + format_decimal(r);
  out += "\n";
  for (std::size_t i = 0; i < result.rho_c.size(); ++i) {
    out += format_decimal(result.rho_c[i]);
    for (double v : result.E_nc[i]) out += "," + format_decimal(v);
    out += "\n";
  }
  return out;
}

Figure3Result run_figure3(const Figure3Config& config) {
  const ModelParams params(config.lambda_c, config.mu_c, config.lambda_s, config.mu_s);
  if (!is_stable_predicate(params)) throw NotStrictlyStable(params.rho_c(), params.rho_s());
  const auto sol = qbd::solve(params, config.phase_cap);
  const auto profiles = qbd::conditional_profiles(sol);

  Figure3Result result{params, sol.moments, {}, {}, std::nullopt};
  if (config.simulate) {
    sim::SimConfig sc{.spec = {parse_notation("M/M/(M/M)"), params},
                      .horizon = config.horizon,
                      .replications = config.replications,
                      .seed = config.seed};
    result.sim = sim::simulate_mm(sc);
  }
  auto lookup = [&](const std::map<std::int64_t, sim::ConditionalEstimate>& table,
                    int key) -> std::optional<sim::ConditionalEstimate> {
    if (!result.sim) return std::nullopt;
    const auto it = table.find(key);
    if (it == table.end()) return std::nullopt;
    return it->second;
  };
  for (const auto& [key, value] : profiles.nc_given_ns) {
    result.nc_given_ns.push_back(
        {key, value, result.sim ? lookup(result.sim->cond_mean_nc_given_ns, key) : std::nullopt});
  }
  for (const auto& [key, value] : profiles.ns_given_nc) {
    result.ns_given_nc.push_back(
        {key, value, result.sim ? lookup(result.sim->cond_mean_ns_given_nc, key) : std::nullopt});
  }
  return result;
}

std::string figure3_nc_given_ns_csv(const Figure3Result& result) {
  std::string out = "n_s,E_nc_given_ns,sim_mean,sim_half_width,sim_occupancy\n";
  for (const auto& p : result.nc_given_ns) {
    out += std::to_string(p.key) + "," + format_decimal(p.solved) + "," +
           optional_cells(p.simulated) + "\n";
  }
  return out;
}

std::string figure3_ns_given_nc_csv(const Figure3Result& result) {
  std::string out = "n_c,E_ns_given_nc,sim_mean,sim_half_width,sim_occupancy\n";
  for (const auto& p : result.ns_given_nc) {
    out += std::to_string(p.key) + "," + format_decimal(p.solved) + "," +
           optional_cells(p.simulated) + "\n";
  }
  return out;
}

void write_figures(const std::string& dir, const Figure1Config& f1, const Figure2Config& f2,
                   const Figure3Config& f3) {
  const std::filesystem::path root(dir);
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) throw InvalidConfig("cannot create output directory '" + dir + "': " + ec.message());
  write_file(root / "figure1.csv", figure1_csv(run_figure1(f1)));
  write_file(root / "figure2.csv", figure2_csv(run_figure2(f2)));
  const auto fig3 = run_figure3(f3);
  write_file(root / "figure3_nc_given_ns.csv", figure3_nc_given_ns_csv(fig3));
  write_file(root / "figure3_ns_given_nc.csv", figure3_ns_given_nc_csv(fig3));
}

namespace {

std::vector<std::pair<double, double>> parse_pairs(std::string_view body, std::string_view what) {
  std::vector<std::pair<double, double>> out;
  while (!body.empty()) {
    const auto comma = body.find(',');
    const std::string_view item = body.substr(0, comma);
    body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw InvalidConfig("workload " + std::string(what) + " item '" + std::string(item) +
                          "' must be a:b");
    }
    out.emplace_back(parse_decimal(what, item.substr(0, colon)),
                     parse_decimal(what, item.substr(colon + 1)));
  }
  if (out.empty()) throw InvalidConfig("workload " + std::string(what) + " has no items");
  return out;
}

}  // namespace

WorkloadDist parse_workload(std::string_view text, double mu_c) {
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const std::string_view body =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (kind == "exp" && body.empty()) return WorkloadDist::exponential(mu_c);
  if (kind == "deterministic") return WorkloadDist::deterministic(parse_decimal("workload", body));
  if (kind == "hyperexp-scv") {
    return WorkloadDist::balanced_hyperexponential(1.0 / mu_c, parse_decimal("workload", body));
  }
  if (kind == "discrete") {
    std::vector<WorkloadDist::Atom> atoms;
    for (const auto& [value, p] : parse_pairs(body, "discrete")) atoms.push_back({value, p});
    return WorkloadDist::discrete(std::move(atoms));
  }
  if (kind == "hyperexp") {
    std::vector<WorkloadDist::Branch> branches;
    for (const auto& [w, rate] : parse_pairs(body, "hyperexp")) branches.push_back({rate, w});
    return WorkloadDist::hyperexponential(std::move(branches));
  }
  throw InvalidConfig("unknown workload '" + std::string(text) +
                      "' (expected exp, deterministic:, discrete:, hyperexp:, hyperexp-scv:)");
}

}  // namespace p2pq::cli
