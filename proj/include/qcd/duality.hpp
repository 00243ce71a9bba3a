#pragma once

// Quantum-classical duality between the twisted XXZ chain and the classical
// trigonometric RS model: the velocity substitution, the predicted string
// spectrum, the determinant identities and the spectral polynomial system.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcd/numerics.hpp"
#include "qcd/rs_model.hpp"
#include "qcd/xxz_bethe.hpp"

namespace qcd {

/// Lax eigenvalues predicted per twist: group a holds
/// e^{(2 alpha - M_a - 1) hbar} V_a for alpha = 1..M_a, in ascending alpha.
struct StringSpectrum {
  std::vector<Complex> values;
  std::vector<int> group_sizes;
};

StringSpectrum predicted_string_spectrum(const ChainSpec& spec, std::span<const int> occupations);

struct Substitution {
  RSParams params;
  RSState state;
};

/// nu = hbar / eta, q from the inhomogeneities and qdot_j = eta H_j / sinh(hbar).
Substitution qc_substitute(const ChainSpec& spec, std::span<const Complex> h_values, Complex eta = 1.0);
Substitution qc_substitute(const ChainSpec& spec, const BetheRoots& roots, Complex eta = 1.0);

/// C(q) = sinh^2 q / (sinh(q + hbar) sinh(q - hbar)).
Complex cauchy_factor(Complex q, Complex hbar);
/// det[sinh hbar / sinh(q_i - q_j + hbar)] as prod_{i<j} C(q_i - q_j).
Complex cauchy_det_closed_form(std::span<const Complex> q, Complex hbar);

/// For k = 1..N: sum over k-subsets I of prod_{i in I} H_i prod_{pairs in I} C
/// against (sinh hbar)^k e_k(lambda). Residual |L - R| / (1 + |L| + |R|).
std::vector<double> spectral_equations_check(const ChainSpec& spec, std::span<const Complex> h_values,
                                             std::span<const Complex> lambda);

/// Bethe residual bound below which roots count as a verified solution.
inline constexpr double verified_roots_tolerance = 1e-10;
/// Spectral-equation residual bound for a verified state.
inline constexpr double spectral_equation_tolerance = 1e-8;

struct DualityReport {
  ChainSpec spec;
  std::vector<int> occupations;
  std::optional<BetheRoots> roots;
  std::vector<Complex> H_values;
  std::vector<Complex> lax_eigenvalues;
  StringSpectrum predicted;
  double max_match_distance = 0.0;
  std::vector<double> spectral_residuals;
  double max_spectral_residual = 0.0;
  /// Largest Bethe residual of the roots (0 without roots).
  double bethe_residual = 0.0;
  /// Residual, excluded-locus and ratio-form checks all passed.
  bool roots_verified = false;
  /// "verified", "unverified-roots" or "failed".
  std::string status;
  /// "xxz", "gaudin" or "xx".
  std::string regime = "xxz";
  /// Set when the substitution or the spectrum could not be computed.
  std::string error;
};

/// Occupations giving a negative weight raise invalid_occupations.
DualityReport verify_duality(const ChainSpec& spec, const BetheRoots& roots, Complex eta, double tol);
/// Same check starting from Hamiltonian eigenvalues (oracle states).
DualityReport verify_duality(const ChainSpec& spec, std::span<const int> occupations,
                             std::span<const Complex> h_values, Complex eta, double tol);

struct MatrixPair {
  CMatrix L;
  CMatrix L_tilde;
};

/// The N x N and M x M sinh-product matrices of the determinant identity.
MatrixPair build_identity_pair(std::span<const Complex> x, std::span<const Complex> y, Complex g,
                               Complex hbar);
/// Coefficient deviation of det(L - lambda) against det(g S(hbar) - lambda) det(L~ - lambda),
/// relative to the largest coefficient.
double det_identity_check(std::span<const Complex> x, std::span<const Complex> y, Complex g, Complex hbar);

/// Additive (Gaudin) counterpart of the identity pair.
MatrixPair build_gaudin_pair(std::span<const Complex> x, std::span<const Complex> y, Complex omega,
                             Complex nu);
/// Same comparison with omega I + log S(nu) on the (N - M) block.
double gaudin_identity_check(std::span<const Complex> x, std::span<const Complex> y, Complex omega,
                             Complex nu);

/// max_k |a_k - b_k| / max(max_k |b_k|, tiny).
double coefficient_deviation(const CPoly& a, const CPoly& b);

}  // namespace qcd
