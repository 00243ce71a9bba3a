#pragma once

// Polynomial equation systems in exponentiated root variables t = exp(2 mu).
// Each equation is LHS = RHS with both sides sums of coefficient-weighted
// products of linear factors, which gives exact Jacobians and a scale-free
// residual (LHS - RHS) / (1 + |LHS| + |RHS|).

#include <span>
#include <vector>

#include "qcd/numerics.hpp"

namespace qcd {

/// alpha * x[a] + beta * x[b]; an index of -1 stands for the constant 1.
struct LinearFactor {
  int a = -1;
  Complex alpha{};
  int b = -1;
  Complex beta{};

  Complex eval(std::span<const Complex> x) const {
    const Complex xa = a < 0 ? Complex{1.0} : x[static_cast<std::size_t>(a)];
    const Complex xb = b < 0 ? Complex{1.0} : x[static_cast<std::size_t>(b)];
    return alpha * xa + beta * xb;
  }
};

struct Term {
  Complex coeff{1.0};
  std::vector<LinearFactor> factors;
};

struct Equation {
  std::vector<Term> lhs;
  std::vector<Term> rhs;
};

/// |sinh(mu_i - mu_j + k hbar)| evaluated through t_i * shift and t_j, where
/// shift = exp(2 k hbar). j = -1 uses `fixed` (an exponentiated constant).
struct LocusPair {
  int i = 0;
  int j = -1;
  Complex shift{1.0};
  Complex fixed{};
};

struct SystemValue {
  std::vector<Complex> difference;  ///< LHS - RHS per equation
  std::vector<Complex> normalized;  ///< difference / (1 + |LHS| + |RHS|)
  double max_normalized = 0.0;
};

class BetheSystem {
 public:
  BetheSystem() = default;
  BetheSystem(std::size_t unknowns, std::vector<Equation> equations, std::vector<LocusPair> locus);

  std::size_t unknowns() const noexcept { return unknowns_; }
  const std::vector<Equation>& equations() const noexcept { return equations_; }

  SystemValue evaluate(std::span<const Complex> x) const;
  /// d(LHS - RHS)_e / dx_v.
  CMatrix jacobian(std::span<const Complex> x) const;
  /// Smallest |sinh| over the locus pairs; +infinity when there are none.
  double locus_distance(std::span<const Complex> x) const;

 private:
  std::size_t unknowns_ = 0;
  std::vector<Equation> equations_;
  std::vector<LocusPair> locus_;
};

/// Flattening between root levels and exponentiated unknowns.
std::vector<Complex> exponentiate_roots(const std::vector<std::vector<Complex>>& levels);
std::vector<std::vector<Complex>> roots_from_exponentiated(std::span<const Complex> x,
                                                           std::span<const int> occupations);

}  // namespace qcd
