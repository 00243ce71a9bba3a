#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcd {

/// Failure categories shared by every module. The numeric values are part of
/// the C API (see qcd.h) and must not be renumbered.
enum class ErrorCode : int {
  ok = 0,
  dimension = 1,
  singular_system = 2,
  undefined_roots = 3,
  convergence = 4,
  singular_configuration = 5,
  degenerate_epsilon = 6,
  flow_singularity = 7,
  regime_mismatch = 8,
  pole = 9,
  excluded_locus = 10,
  dimension_cap = 11,
  resample_points = 12,
  degeneracy = 13,
  invalid_occupations = 14,
  invalid_argument = 15,
  schema = 16,
  invariant = 17,
  io = 18,
  internal = 99,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by iterative kernels that ran out of iterations. Carries the best
/// iterate so callers can inspect or restart from it.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what,
                   std::vector<std::complex<double>> best, double residual)
      : Error(ErrorCode::convergence, what),
        best_(std::move(best)),
        residual_(residual) {}
  const std::vector<std::complex<double>>& best_iterate() const noexcept {
    return best_;
  }
  double residual() const noexcept { return residual_; }

 private:
  std::vector<std::complex<double>> best_;
  double residual_;
};

/// Raised by the flow integrator; `time()` is where the collision was hit.
class FlowSingularityError : public Error {
 public:
  FlowSingularityError(const std::string& what, double t)
      : Error(ErrorCode::flow_singularity, what), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

}  // namespace qcd
