#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace p2pq {

/// The four rates of the job-server process. Loads are derived on demand.
class ModelParams {
 public:
  /// Throws InvalidParams unless every rate is strictly positive and finite.
  ModelParams(double lambda_c, double mu_c, double lambda_s, double mu_s);

  double lambda_c() const noexcept { return lambda_c_; }
  double mu_c() const noexcept { return mu_c_; }
  double lambda_s() const noexcept { return lambda_s_; }
  double mu_s() const noexcept { return mu_s_; }

  /// Job load demand lambda_c / mu_c.
  double rho_c() const noexcept { return lambda_c_ / mu_c_; }
  /// Service capacity lambda_s / mu_s, the mean number of live servers.
  double rho_s() const noexcept { return lambda_s_ / mu_s_; }

  /// Builds parameters from loads: lambda_c = rho_c * mu_c, lambda_s = rho_s * mu_s.
  static ModelParams from_loads(double rho_c, double mu_c, double rho_s, double mu_s);

  bool operator==(const ModelParams&) const = default;

 private:
  double lambda_c_;
  double mu_c_;
  double lambda_s_;
  double mu_s_;
};

struct Loads {
  double rho_c;
  double rho_s;
};

Loads loads(const ModelParams& params) noexcept;

/// Stability predicate: rho_c < rho_s (strict).
bool is_stable_predicate(const ModelParams& params) noexcept;

/// Point of the M/M job-server process.
struct CountState {
  std::int64_t n_c = 0;
  std::int64_t n_s = 0;
  bool operator==(const CountState&) const = default;
};

/// Point of the M/G job-server process: X is the aggregate remaining
/// single-server service time.
struct WorkloadState {
  double X = 0.0;
  std::int64_t n_s = 0;
  bool operator==(const WorkloadState&) const = default;
};

using SystemState = std::variant<CountState, WorkloadState>;

enum class ProcessTag : char { M = 'M', D = 'D', G = 'G' };

inline constexpr std::array<ProcessTag, 3> kAllTags{ProcessTag::M, ProcessTag::D, ProcessTag::G};

/// Extended Kendall notation A/B/(C/E): job arrivals, job workload, server
/// arrivals, server lifetimes.
struct NotationTags {
  ProcessTag job_arrival = ProcessTag::M;
  ProcessTag workload = ProcessTag::M;
  ProcessTag server_arrival = ProcessTag::M;
  ProcessTag server_lifetime = ProcessTag::M;

  auto operator<=>(const NotationTags&) const = default;
};

/// Accepts exactly "A/B/(C/E)" with A, B, C, E in {M, D, G}, optionally
/// surrounded by whitespace. Throws MalformedNotation carrying the index of
/// the first offending character in the original text.
NotationTags parse_notation(std::string_view text);

/// Canonical form "A/B/(C/E)".
std::string render_notation(const NotationTags& tags);

struct ModelSpec {
  NotationTags tags;
  ModelParams params;

  bool operator==(const ModelSpec&) const = default;
};

}  // namespace p2pq
