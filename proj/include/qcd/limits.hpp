#pragma once

// Limiting regimes of the duality: the non-relativistic Calogero-Sutherland
// model against the trigonometric Gaudin model, and the XX (free-fermion)
// point hbar = i pi / 2 of the chain.

#include <span>
#include <vector>

#include "qcd/bethe_solver.hpp"
#include "qcd/duality.hpp"

namespace qcd {

struct CMParams {
  Complex nu;
  void validate() const;
};

/// Diagonal qdot_j, off-diagonal nu / sinh(q_i - q_j).
CMatrix cm_lax(const CMParams& params, std::span<const Complex> q, std::span<const Complex> qdot);
/// qdot_i = p_i - nu sum_{k != i} coth(q_i - q_k).
std::vector<Complex> cm_velocities(const CMParams& params, std::span<const Complex> q, std::span<const Complex> p);

struct NonrelLimitReport {
  std::vector<double> etas;
  /// max |(L_RS(eta) - 1) / eta - L_CM| per eta.
  std::vector<double> deviations;
  double slope = 0.0;
  bool passed = false;
};
/// Fits the log-log slope of the deviations; passes when |slope - 1| <= 0.1.
NonrelLimitReport nonrel_limit_check(Complex nu, std::span<const Complex> q, std::span<const Complex> p,
                                     std::vector<double> etas = {1e-2, 1e-3, 1e-4});

struct GaudinSpec {
  int n = 1;
  std::vector<Complex> q;
  std::vector<Complex> v;
  Complex hbar{};

  std::size_t sites() const noexcept { return q.size(); }
  bool operator==(const GaudinSpec&) const = default;
  /// Distinct q (mod i pi), distinct v, hbar != 0.
  void validate() const;
};

/// H_i = v_1 + hbar sum_{k != i} coth(q_i - q_k) - hbar sum_gamma coth(q_i - mu^1_gamma).
std::vector<Complex> gaudin_hamiltonian_eigenvalues(const GaudinSpec& spec, const BetheRoots& roots);

/// Additive equations v_b + hbar sum_lower coth = v_{b+1} + 2 hbar sum_same coth
/// - hbar sum_upper coth, the lower set being the sites on level one; cleared
/// in t = exp(2 mu) through coth(mu - s) = (t + s') / (t - s').
BetheSystem gaudin_bethe_system(const GaudinSpec& spec, std::span<const int> occupations);
std::vector<Complex> gaudin_bethe_residuals(const GaudinSpec& spec, const BetheRoots& roots);
/// Residuals and locus distance; the uncleared residual is
/// |L - R| / (1 + |L| + |R|) of the coth sums.
BetheCheck gaudin_bethe_check(const GaudinSpec& spec, const BetheRoots& roots);

/// The chain at V = 1 + eps v and anisotropy eps hbar.
ChainSpec xxz_deformation(const GaudinSpec& spec, double eps);

/// Continuation ladder for Gaudin roots.
inline const std::vector<double> gaudin_epsilon_ladder{0.3, 0.1, 0.03, 0.01, 0.003};

struct GaudinSolutionSet {
  GaudinSpec spec;
  std::vector<int> occupations;
  std::vector<BetheRoots> solutions;
  std::size_t expected = 0;
  /// XXZ solutions at the first rung that could not be carried to eps = 0.
  std::size_t lost = 0;
  bool complete() const { return solutions.size() == expected; }
};
/// Enumerates the deformed chain at the top of the ladder, follows each
/// solution down the ladder with Newton and polishes on the Gaudin system.
GaudinSolutionSet gaudin_sector_solutions(const GaudinSpec& spec, std::span<const int> occupations,
                                          const SolverConfig& cfg);

/// Arithmetic strings v_a + (2 alpha - M_a - 1) hbar, alpha = 1..M_a.
StringSpectrum predicted_gaudin_spectrum(const GaudinSpec& spec, std::span<const int> occupations);

/// Calogero-Sutherland Lax spectrum at nu = hbar, qdot_j = H^G_j, against the strings.
DualityReport verify_gaudin_duality(const GaudinSpec& spec, const BetheRoots& roots, double tol);
DualityReport verify_gaudin_duality(const GaudinSpec& spec, std::span<const int> occupations,
                                    std::span<const Complex> h_values, double tol);

struct EpsilonConvergence {
  std::vector<double> eps;
  /// max |(H_XXZ - eps hbar) / (eps^2 hbar) - H^G| per eps.
  std::vector<double> hamiltonian_deviation;
  /// Matching distance of (lambda_XXZ - 1) / eps against the Gaudin Lax spectrum.
  std::vector<double> spectrum_deviation;
  double hamiltonian_slope = 0.0;
  double spectrum_slope = 0.0;
  /// Spectrum deviation stays at roundoff for every eps (single-row strings
  /// have no O(eps) term), so no slope is defined for it.
  bool spectrum_exact = false;
  bool passed = false;
};
/// Refines XXZ roots at each eps starting from the Gaudin roots; passes when
/// both slopes lie in 1 +/- 0.15, or the spectrum deviation is at roundoff.
EpsilonConvergence gaudin_epsilon_check(const GaudinSpec& spec, const BetheRoots& roots, const SolverConfig& cfg,
                                        std::vector<double> eps = {1e-2, 1e-3});

/// Specialized and generic formulas at hbar = i pi / 2.
struct XXQuantities {
  std::vector<Complex> z;
  std::vector<Complex> transfer;
  std::vector<Complex> transfer_generic;
  std::vector<Complex> H_values;
  std::vector<Complex> H_generic;
  std::vector<RatioSides> bethe_sides;
  std::vector<RatioSides> bethe_sides_generic;
  /// Normalized residuals of the collapsed equations.
  std::vector<double> residuals;
  /// Largest relative disagreement between the two evaluations.
  double max_disagreement = 0.0;
};

/// Requires hbar = i pi / 2 (to 1e-14).
XXQuantities xx_quantities(const ChainSpec& spec, const BetheRoots& roots, std::span<const Complex> z);
XXQuantities xx_quantities(const ChainSpec& spec, const BetheRoots& roots);

/// i^{-(M_a - 1)} (-1)^alpha V_a, alpha = 0..M_a - 1.
StringSpectrum predicted_xx_spectrum(const ChainSpec& spec, std::span<const int> occupations);
/// sum_I prod H prod tanh^2 against i^k e_k(lambda).
std::vector<double> xx_spectral_equations_check(const ChainSpec& spec, std::span<const Complex> h_values,
                                                std::span<const Complex> lambda);
DualityReport xx_verify_duality(const ChainSpec& spec, const BetheRoots& roots, Complex eta, double tol);

}  // namespace qcd
