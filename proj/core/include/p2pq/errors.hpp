#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace p2pq {

// Root of every error thrown by the library. The three intermediate classes
// group errors by how a caller is expected to react; the CLI maps them to
// exit codes 2, 3 and 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class StabilityError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class MalformedNotation : public InvalidInput {
 public:
  MalformedNotation(std::string text, std::size_t position, const std::string& what);

  const std::string& text() const noexcept { return text_; }
  std::size_t position() const noexcept { return position_; }

 private:
  std::string text_;
  std::size_t position_;
};

class InvalidParams : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class InvalidConfig : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class InfiniteMeanWorkload : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// rho_c >= rho_s where a strictly stable model is required.
class NotStrictlyStable : public StabilityError {
 public:
  NotStrictlyStable(double rho_c, double rho_s);

  double rho_c() const noexcept { return rho_c_; }
  double rho_s() const noexcept { return rho_s_; }

 private:
  double rho_c_;
  double rho_s_;
};

class UnstableModel : public StabilityError {
 public:
  using StabilityError::StabilityError;
};

/// A simulation left the configured guard region. The run is statistically
/// meaningless but nothing crashed; the guard and the offending state are kept.
class UnstableDivergence : public StabilityError {
 public:
  UnstableDivergence(std::int64_t n_c, std::int64_t n_s, double workload,
                     std::int64_t guard_nc, double guard_workload, double time);

  std::int64_t n_c() const noexcept { return n_c_; }
  std::int64_t n_s() const noexcept { return n_s_; }
  double workload() const noexcept { return workload_; }
  std::int64_t guard_nc() const noexcept { return guard_nc_; }
  double guard_workload() const noexcept { return guard_workload_; }
  double time() const noexcept { return time_; }

 private:
  std::int64_t n_c_;
  std::int64_t n_s_;
  double workload_;
  std::int64_t guard_nc_;
  double guard_workload_;
  double time_;
};

class NoConvergence : public NumericalError {
 public:
  NoConvergence(int iterations, double residual);

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class SingularBoundary : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularGenerator : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace p2pq
