#pragma once

// Classical trigonometric Ruijsenaars-Schneider model: Lax matrices in
// momentum and velocity form, the factorized representation, the Lax pair and
// the second-order equations of motion.

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "qcd/numerics.hpp"

namespace qcd {

/// Relativistic deformation eta and coupling nu. Their product plays the role
/// of the anisotropy hbar on the quantum side.
class RSParams {
 public:
  RSParams(Complex eta, Complex nu);

  Complex eta() const noexcept { return eta_; }
  Complex nu() const noexcept { return nu_; }
  Complex hbar() const noexcept { return eta_ * nu_; }

 private:
  Complex eta_;
  Complex nu_;
};

struct RSState {
  std::vector<Complex> q;
  std::optional<std::vector<Complex>> p;
  std::optional<std::vector<Complex>> qdot;
};

/// Rejects coordinate sets where some sinh(q_i - q_j) or sinh(q_i - q_j +/- eta nu)
/// vanishes (below 1e-12), naming the offending pair.
void validate_coordinates(const RSParams& params, std::span<const Complex> q);
void validate_state(const RSParams& params, const RSState& state);

CMatrix lax_from_velocities(const RSParams& params, std::span<const Complex> q,
                            std::span<const Complex> qdot);
CMatrix lax_from_momenta(const RSParams& params, std::span<const Complex> q,
                         std::span<const Complex> p);
std::vector<Complex> velocities(const RSParams& params, std::span<const Complex> q,
                                std::span<const Complex> p);
Complex rs_hamiltonian(const RSParams& params, std::span<const Complex> q,
                       std::span<const Complex> p);

inline constexpr Complex default_factorization_epsilon{0.37, 0.19};

/// L = D V(eps)^-1 V(eps - eta nu) D^-1 exp(eta P) with the trigonometric
/// Vandermonde matrix V_ij(eps) = exp((2i - 1 - N)(q_j + eps)). The result
/// does not depend on eps; a Vandermonde condition number above 1e10 is
/// reported as a degenerate-epsilon error.
CMatrix factorized_lax(const RSParams& params, std::span<const Complex> q,
                       std::span<const Complex> p,
                       Complex eps = default_factorization_epsilon);

/// Diagonal S(zeta)_ii = exp(-(2i - 1 - N) zeta), i = 1..N.
CMatrix shift_matrix(std::size_t n, Complex zeta);

/// Companion of the velocity-form Lax matrix with dL/dt = [B, L] along the
/// equations of motion.
CMatrix b_matrix(const RSParams& params, std::span<const Complex> q,
                 std::span<const Complex> qdot);

enum class FlowRegime {
  generic,
  /// eta nu -> +/- infinity; the coupling drops out.
  infinite_coupling,
  /// eta nu = i pi / 2 exactly.
  half_period,
};

std::vector<Complex> accelerations(const RSParams& params, std::span<const Complex> q,
                                   std::span<const Complex> qdot,
                                   FlowRegime regime = FlowRegime::generic);

struct FlowConfig {
  double t_end = 1.0;
  /// Fixed step, or the initial step when adaptive.
  double dt = 1e-3;
  bool adaptive = false;
  /// Local error target per step for the adaptive mode.
  double step_tolerance = 1e-10;
  /// Number of equal sampling intervals on [0, t_end].
  std::size_t samples = 50;
  FlowRegime regime = FlowRegime::generic;

  bool operator==(const FlowConfig&) const = default;
};

struct FlowSample {
  double t = 0.0;
  std::vector<Complex> q;
  std::vector<Complex> qdot;
  std::vector<Complex> lax_eigenvalues;
  /// Matching distance between the current and the initial Lax spectrum.
  double eigenvalue_drift = 0.0;
};

struct Trajectory {
  std::vector<FlowSample> samples;
  double max_drift() const;
};

/// Integrates the second-order system in (q, qdot) with classical RK4 (fixed
/// step, or step doubling when adaptive). Throws FlowSingularityError if some
/// |sinh(q_i - q_j)| drops below 1e-8.
Trajectory integrate_flow(const RSParams& params, const RSState& initial,
                          const FlowConfig& config);

/// max |(L(t+h) - L(t-h)) / 2h - [B, L](t)| at an interior sample.
double lax_pair_residual(const RSParams& params, const Trajectory& trajectory,
                         std::size_t index);

/// Columns: t, re(q_j), im(q_j) for all j, re(qdot_j), im(qdot_j) for all j, drift.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace qcd
