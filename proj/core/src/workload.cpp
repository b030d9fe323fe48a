#include "p2pq/workload.hpp"

#include <cmath>
#include <sstream>

#include "p2pq/errors.hpp"

namespace p2pq {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kProbabilityTolerance = 1e-12;

void require_positive(const char* what, double value) {
  if (!(std::isfinite(value) && value > 0.0)) {
    std::ostringstream os;
    os << "workload " << what << " must be strictly positive and finite, got " << value;
    throw InvalidParams(os.str());
  }
}

void require_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << "workload probability must lie in [0, 1], got " << p;
    throw InvalidParams(os.str());
  }
}

void require_total(double total) {
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "workload probabilities must sum to 1, got " << total;
    throw InvalidParams(os.str());
  }
}

}  // namespace

WorkloadDist::WorkloadDist(Variant dist) : dist_(std::move(dist)) {
  std::visit(Overloaded{
                 [](const Exponential& e) { require_positive("rate", e.rate); },
                 [](const Deterministic& d) { require_positive("value", d.value); },
                 [](const DiscreteFinite& d) {
                   if (d.atoms.empty()) throw InvalidParams("discrete workload needs atoms");
                   double total = 0.0;
                   for (const auto& a : d.atoms) {
                     require_positive("atom", a.value);
                     require_probability(a.probability);
                     total += a.probability;
                   }
                   require_total(total);
                 },
                 [](const HyperExponential& h) {
                   if (h.branches.empty()) {
                     throw InvalidParams("hyperexponential workload needs branches");
                   }
                   double total = 0.0;
                   for (const auto& b : h.branches) {
                     require_positive("rate", b.rate);
                     require_probability(b.weight);
                     total += b.weight;
                   }
                   require_total(total);
                 },
             },
             dist_);
}

WorkloadDist WorkloadDist::exponential(double rate) { return WorkloadDist(Exponential{rate}); }

WorkloadDist WorkloadDist::deterministic(double value) {
  return WorkloadDist(Deterministic{value});
}

WorkloadDist WorkloadDist::discrete(std::vector<Atom> atoms) {
  return WorkloadDist(DiscreteFinite{std::move(atoms)});
}

WorkloadDist WorkloadDist::hyperexponential(std::vector<Branch> branches) {
  return WorkloadDist(HyperExponential{std::move(branches)});
}

WorkloadDist WorkloadDist::balanced_hyperexponential(double mean, double scv) {
  require_positive("mean", mean);
  if (!(scv > 1.0) || !std::isfinite(scv)) {
    throw InvalidParams("balanced hyperexponential needs squared CV > 1");
  }
  // Balanced means: p1 / r1 = p2 / r2 = mean / 2.
  const double p1 = 0.5 * (1.0 + std::sqrt((scv - 1.0) / (scv + 1.0)));
  const double p2 = 1.0 - p1;
  return hyperexponential({{2.0 * p1 / mean, p1}, {2.0 * p2 / mean, p2}});
}

WorkloadDist WorkloadDist::from_params(const ModelParams& params) {
  return exponential(params.mu_c());
}

ProcessTag WorkloadDist::tag() const noexcept {
  return std::visit(Overloaded{
                        [](const Exponential&) { return ProcessTag::M; },
                        [](const Deterministic&) { return ProcessTag::D; },
                        [](const DiscreteFinite&) { return ProcessTag::G; },
                        [](const HyperExponential&) { return ProcessTag::G; },
                    },
                    dist_);
}

double WorkloadDist::mean() const noexcept {
  return std::visit(Overloaded{
                        [](const Exponential& e) { return 1.0 / e.rate; },
                        [](const Deterministic& d) { return d.value; },
                        [](const DiscreteFinite& d) {
                          double m = 0.0;
                          for (const auto& a : d.atoms) m += a.probability * a.value;
                          return m;
                        },
                        [](const HyperExponential& h) {
                          double m = 0.0;
                          for (const auto& b : h.branches) m += b.weight / b.rate;
                          return m;
                        },
                    },
                    dist_);
}

double WorkloadDist::second_moment() const noexcept {
  return std::visit(Overloaded{
                        [](const Exponential& e) { return 2.0 / (e.rate * e.rate); },
                        [](const Deterministic& d) { return d.value * d.value; },
                        [](const DiscreteFinite& d) {
                          double m = 0.0;
                          for (const auto& a : d.atoms) m += a.probability * a.value * a.value;
                          return m;
                        },
                        [](const HyperExponential& h) {
                          double m = 0.0;
                          for (const auto& b : h.branches) m += 2.0 * b.weight / (b.rate * b.rate);
                          return m;
                        },
                    },
                    dist_);
}

double WorkloadDist::scv() const noexcept {
  const double m = mean();
  return second_moment() / (m * m) - 1.0;
}

double WorkloadDist::sample(Rng& rng) const {
  return std::visit(Overloaded{
                        [&](const Exponential& e) { return rng.exponential(e.rate); },
                        [](const Deterministic& d) { return d.value; },
                        [&](const DiscreteFinite& d) {
                          const double u = rng.uniform();
                          double acc = 0.0;
                          for (const auto& a : d.atoms) {
                            acc += a.probability;
                            if (u < acc) return a.value;
                          }
                          return d.atoms.back().value;
                        },
                        [&](const HyperExponential& h) {
                          const double u = rng.uniform();
                          double acc = 0.0;
                          for (const auto& b : h.branches) {
                            acc += b.weight;
                            if (u < acc) return rng.exponential(b.rate);
                          }
                          return rng.exponential(h.branches.back().rate);
                        },
                    },
                    dist_);
}

std::string WorkloadDist::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const Exponential& e) { os << "exponential(rate=" << e.rate << ")"; },
                 [&](const Deterministic& d) { os << "deterministic(" << d.value << ")"; },
                 [&](const DiscreteFinite& d) {
                   os << "discrete(";
                   for (std::size_t i = 0; i < d.atoms.size(); ++i) {
                     os << (i ? "," : "") << d.atoms[i].value << ":" << d.atoms[i].probability;
                   }
                   os << ")";
                 },
                 [&](const HyperExponential& h) {
                   os << "hyperexp(";
                   for (std::size_t i = 0; i < h.branches.size(); ++i) {
                     os << (i ? "," : "") << h.branches[i].weight << ":" << h.branches[i].rate;
                   }
                   os << ")";
                 },
             },
             dist_);
  return os.str();
}

}  // namespace p2pq
