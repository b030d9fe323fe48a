#include "p2pq/errors.hpp"

#include <sstream>

namespace p2pq {

MalformedNotation::MalformedNotation(std::string text, std::size_t position,
                                     const std::string& what)
    : InvalidInput("malformed notation '" + text + "' at index " +
                   std::to_string(position) + ": " + what),
      text_(std::move(text)),
      position_(position) {}

namespace {

std::string stable_message(double rho_c, double rho_s) {
  std::ostringstream os;
  os << "model is not strictly stable: rho_c = " << rho_c << " >= rho_s = " << rho_s;
  return os.str();
}

std::string divergence_message(std::int64_t n_c, std::int64_t n_s, double workload,
                               std::int64_t guard_nc, double guard_workload, double time) {
  std::ostringstream os;
  os << "simulation diverged at t = " << time << ": state (n_c = " << n_c
     << ", n_s = " << n_s << ", X = " << workload << ") exceeded guard (n_c <= "
     << guard_nc << ", X <= " << guard_workload << ")";
  return os.str();
}

std::string convergence_message(int iterations, double residual) {
  std::ostringstream os;
  os << "no convergence after " << iterations << " iterations (residual " << residual << ")";
  return os.str();
}

}  // namespace

NotStrictlyStable::NotStrictlyStable(double rho_c, double rho_s)
    : StabilityError(stable_message(rho_c, rho_s)), rho_c_(rho_c), rho_s_(rho_s) {}

UnstableDivergence::UnstableDivergence(std::int64_t n_c, std::int64_t n_s, double workload,
                                       std::int64_t guard_nc, double guard_workload,
                                       double time)
    : StabilityError(divergence_message(n_c, n_s, workload, guard_nc, guard_workload, time)),
      n_c_(n_c),
      n_s_(n_s),
      workload_(workload),
      guard_nc_(guard_nc),
      guard_workload_(guard_workload),
      time_(time) {}

NoConvergence::NoConvergence(int iterations, double residual)
    : NumericalError(convergence_message(iterations, residual)),
      iterations_(iterations),
      residual_(residual) {}

}  // namespace p2pq
