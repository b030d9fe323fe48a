#pragma once

#include <string>
#include <variant>
#include <vector>

#include "p2pq/model.hpp"
#include "p2pq/random.hpp"

namespace p2pq {

/// Job service requirement, measured in single-server service time.
class WorkloadDist {
 public:
  struct Exponential {
    double rate;
  };
  struct Deterministic {
    double value;
  };
  struct Atom {
    double value;
    double probability;
  };
  struct DiscreteFinite {
    std::vector<Atom> atoms;
  };
  struct Branch {
    double rate;
    double weight;
  };
  struct HyperExponential {
    std::vector<Branch> branches;
  };
  using Variant = std::variant<Exponential, Deterministic, DiscreteFinite, HyperExponential>;

  /// Validates: strictly positive atoms/rates, probabilities summing to 1
  /// within 1e-12. Throws InvalidParams otherwise.
  explicit WorkloadDist(Variant dist);

  static WorkloadDist exponential(double rate);
  static WorkloadDist deterministic(double value);
  static WorkloadDist discrete(std::vector<Atom> atoms);
  static WorkloadDist hyperexponential(std::vector<Branch> branches);

  /// Two-branch hyperexponential with balanced means, given mean and squared
  /// coefficient of variation scv > 1.
  static WorkloadDist balanced_hyperexponential(double mean, double scv);

  /// Exponential with mean 1 / mu_c, the M/M workload implied by the rates.
  static WorkloadDist from_params(const ModelParams& params);

  const Variant& get() const noexcept { return dist_; }

  /// Kendall tag of this family: M for exponential, D for deterministic, G otherwise.
  ProcessTag tag() const noexcept;

  double mean() const noexcept;
  double second_moment() const noexcept;
  /// Squared coefficient of variation.
  double scv() const noexcept;

  double sample(Rng& rng) const;

  std::string describe() const;

 private:
  Variant dist_;
};

}  // namespace p2pq
