#pragma once

// Closed-form Bethe-ansatz data of the twisted inhomogeneous gl(n) XXZ chain.

#include <span>
#include <vector>

#include "qcd/bethe_system.hpp"
#include "qcd/numerics.hpp"

namespace qcd {

/// Rank n, inhomogeneities q (one per site), twist V (length n) and anisotropy hbar.
struct ChainSpec {
  int n = 1;
  std::vector<Complex> q;
  std::vector<Complex> V;
  Complex hbar{};

  std::size_t sites() const noexcept { return q.size(); }
  bool operator==(const ChainSpec&) const = default;
  /// Throws Error(invariant) naming the violated clause: general position of
  /// q (no q_j - q_k in {0, +/-hbar} mod i pi), nonzero distinct twists,
  /// hbar != 0 mod i pi.
  void validate() const;
};

/// Nested roots. occupations[b] = N_{b+1}, levels[b] holds the N_{b+1} roots
/// of level b+1 (there are n - 1 levels).
struct BetheRoots {
  std::vector<int> occupations;
  std::vector<std::vector<Complex>> levels;

  bool operator==(const BetheRoots&) const = default;
};

BetheRoots vacuum_roots(int n);
/// Checks level counts against the occupations and the rank.
void validate_roots_shape(const ChainSpec& spec, const BetheRoots& roots);

struct WeightVector {
  std::vector<int> M;
  bool operator==(const WeightVector&) const = default;
};

/// M_1 = N - N_1, M_a = N_{a-1} - N_a. Negative entries raise invalid_occupations.
WeightVector weights_from_occupations(std::size_t sites, std::span<const int> occupations);
std::vector<int> occupations_from_weights(const WeightVector& w);
/// N >= N_1 >= ... >= N_{n-1} >= 0.
bool occupations_monotone(std::size_t sites, std::span<const int> occupations);
/// N! / prod M_a!.
std::size_t multinomial(std::span<const int> weights);

/// Poles closer than this (in |sinh|) raise ErrorCode::pole.
inline constexpr double pole_threshold = 1e-10;

Complex transfer_eigenvalue(const ChainSpec& spec, const BetheRoots& roots, Complex z);

/// Cleared-polynomial equations in t = exp(2 mu), w = exp(2 q), h = exp(2 hbar).
/// `upper_scale` multiplies the next-level variables inside each level's
/// equation (1 gives the true system, 0 a triangular one).
BetheSystem xxz_bethe_system(const ChainSpec& spec, std::span<const int> occupations,
                             Complex upper_scale = 1.0);

/// One normalized residual per root, level by level.
std::vector<Complex> bethe_residuals(const ChainSpec& spec, const BetheRoots& roots);

/// The two sides of each equation in the original sinh-ratio form.
struct RatioSides {
  Complex lhs;
  Complex rhs;
};
std::vector<RatioSides> bethe_ratio_sides(const ChainSpec& spec, const BetheRoots& roots);

/// Cleared residuals lose their scale when roots run off to Re mu -> -infinity
/// (every factor shrinks); such asymptotic solutions still violate the ratio
/// form, so a solution must pass both.
inline constexpr double ratio_form_tolerance = 1e-8;

/// max |LHS - RHS| / (|LHS| + |RHS|) over the ratio-form equations.
double ratio_form_residual(std::span<const RatioSides> sides);

struct BetheCheck {
  std::vector<Complex> residuals;
  double max_residual = 0.0;
  double ratio_residual = 0.0;
  /// Smallest |sinh| of a vanishing denominator in the ratio form.
  double locus_distance = 0.0;
  bool solves(double tol, double min_locus = 1e-8) const {
    return max_residual <= tol && locus_distance >= min_locus && ratio_residual <= ratio_form_tolerance;
  }
};
BetheCheck bethe_check(const ChainSpec& spec, const BetheRoots& roots);

/// H_i = V_1 sinh(hbar) prod_{k != i} sinh(q_ik + hbar)/sinh(q_ik)
///       * prod_gamma sinh(q_i - mu^1_gamma - hbar)/sinh(q_i - mu^1_gamma).
std::vector<Complex> hamiltonian_eigenvalues(const ChainSpec& spec, const BetheRoots& roots);

/// Sample points centroid(q) + radius * exp(i (2 pi s/(N+1) + phase)), s = 0..N.
std::vector<Complex> coth_sample_points(std::span<const Complex> q, double radius = 2.0,
                                        double phase = 0.3);
/// Rows [1, coth(z_s - q_1), ..., coth(z_s - q_N)].
CMatrix coth_basis(std::span<const Complex> q, std::span<const Complex> points);

/// f(z) = C + sum_k H_k coth(z - q_k) fitted from samples; heldout_error is
/// the relative misfit at an extra point.
struct CothFit {
  Complex constant;
  std::vector<Complex> residues;
  double heldout_error = 0.0;
};
CothFit fit_transfer_eigenvalue(const ChainSpec& spec, const BetheRoots& roots);

struct SumRuleReport {
  Complex C;
  Complex C_expected;
  Complex H_sum;
  Complex H_sum_expected;
  double C_deviation = 0.0;
  double H_sum_deviation = 0.0;
};
/// C = sum_a V_a cosh(hbar M_a) and sum_k H_k = sum_a V_a sinh(hbar M_a);
/// deviations are |actual - expected| / max(1, |expected|).
SumRuleReport sum_rule_check(const ChainSpec& spec, const BetheRoots& roots);
SumRuleReport sum_rule_check(const ChainSpec& spec, const WeightVector& weights,
                             Complex constant, std::span<const Complex> h_values);

}  // namespace qcd
