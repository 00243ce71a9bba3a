#include "qcd/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qcd/error.hpp"

namespace qcd {

namespace {

Complex checked_sinh(Complex x, const char* what, std::size_t i, std::size_t j) {
  const Complex s = std::sinh(x);
  if (std::abs(s) < pole_threshold)
    throw Error(ErrorCode::singular_configuration, std::string(what) + " vanishes at (" + std::to_string(i + 1) +
                                                       ", " + std::to_string(j + 1) + ")");
  return s;
}

CPoly diagonal_char_poly(std::span<const Complex> d) {
  CPoly p{{1.0}};
  for (const auto& v : d) p = p * CPoly{{-v, 1.0}};
  return p;
}

void require_definite(std::span<const Complex> x, std::span<const Complex> y) {
  if (y.size() > x.size()) throw Error(ErrorCode::dimension, "identity pair requires N >= M");
}

constexpr std::size_t max_subset_sites = 24;

}  // namespace

StringSpectrum predicted_string_spectrum(const ChainSpec& spec, std::span<const int> occupations) {
  const WeightVector w = weights_from_occupations(spec.sites(), occupations);
  if (w.M.size() != spec.V.size()) throw Error(ErrorCode::dimension, "occupations do not match the rank");
  StringSpectrum s;
  for (std::size_t a = 0; a < w.M.size(); ++a) {
    const int m = w.M[a];
    s.group_sizes.push_back(m);
    for (int alpha = 1; alpha <= m; ++alpha)
      s.values.push_back(std::exp(static_cast<double>(2 * alpha - m - 1) * spec.hbar) * spec.V[a]);
  }
  return s;
}

Substitution qc_substitute(const ChainSpec& spec, std::span<const Complex> h_values, Complex eta) {
  if (h_values.size() != spec.sites()) throw Error(ErrorCode::dimension, "one H-value per site required");
  if (std::abs(eta) == 0.0) throw Error(ErrorCode::invalid_argument, "eta must be nonzero");
  const Complex sh = std::sinh(spec.hbar);
  if (std::abs(sh) < 1e-12) throw Error(ErrorCode::invariant, "sinh(hbar) vanishes");
  Substitution sub{RSParams(eta, spec.hbar / eta), RSState{}};
  sub.state.q = spec.q;
  std::vector<Complex> qdot;
  for (const auto& h : h_values) qdot.push_back(eta * h / sh);
  sub.state.qdot = std::move(qdot);
  return sub;
}

Substitution qc_substitute(const ChainSpec& spec, const BetheRoots& roots, Complex eta) {
  return qc_substitute(spec, hamiltonian_eigenvalues(spec, roots), eta);
}

Complex cauchy_factor(Complex q, Complex hbar) {
  const Complex s = std::sinh(q);
  const Complex den = std::sinh(q + hbar) * std::sinh(q - hbar);
  if (std::abs(den) < pole_threshold * pole_threshold)
    throw Error(ErrorCode::singular_configuration, "C(q) has a pole at q = +/- hbar");
  return s * s / den;
}

Complex cauchy_det_closed_form(std::span<const Complex> q, Complex hbar) {
  Complex p = 1.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t j = i + 1; j < q.size(); ++j) p *= cauchy_factor(q[i] - q[j], hbar);
  return p;
}

std::vector<double> spectral_equations_check(const ChainSpec& spec, std::span<const Complex> h_values,
                                             std::span<const Complex> lambda) {
  const std::size_t n = spec.sites();
  if (h_values.size() != n || lambda.size() != n)
    throw Error(ErrorCode::dimension, "spectral equations need N H-values and N eigenvalues");
  if (n > max_subset_sites) throw Error(ErrorCode::dimension, "spectral equations limited to 24 sites");
  std::vector<std::vector<Complex>> c(n, std::vector<Complex>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) c[i][j] = cauchy_factor(spec.q[i] - spec.q[j], spec.hbar);

  std::vector<Complex> lhs(n + 1, 0.0);
  std::vector<std::size_t> members;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    members.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::uint64_t{1} << i)) members.push_back(i);
    Complex term = 1.0;
    for (std::size_t a = 0; a < members.size(); ++a) {
      term *= h_values[members[a]];
      for (std::size_t b = a + 1; b < members.size(); ++b) term *= c[members[a]][members[b]];
    }
    lhs[members.size()] += term;
  }
  const auto e = elementary_symmetric(lambda);
  const Complex sh = std::sinh(spec.hbar);
  std::vector<double> res;
  Complex shk = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    shk *= sh;
    const Complex rhs = shk * e[k];
    res.push_back(std::abs(lhs[k] - rhs) / (1.0 + std::abs(lhs[k]) + std::abs(rhs)));
  }
  return res;
}

namespace {

void finish_report(DualityReport& r, Complex eta, double tol) {
  r.predicted = predicted_string_spectrum(r.spec, r.occupations);
  try {
    const Substitution sub = qc_substitute(r.spec, r.H_values, eta);
    validate_state(sub.params, sub.state);
    r.lax_eigenvalues = eigenvalues(lax_from_velocities(sub.params, sub.state.q, *sub.state.qdot));
    sort_lex(r.lax_eigenvalues);
    r.max_match_distance = match_multisets(r.lax_eigenvalues, r.predicted.values).max_distance;
    r.spectral_residuals = spectral_equations_check(r.spec, r.H_values, r.lax_eigenvalues);
    r.max_spectral_residual = 0.0;
    for (double v : r.spectral_residuals) r.max_spectral_residual = std::max(r.max_spectral_residual, v);
  } catch (const Error& e) {
    r.error = e.what();
    r.status = "failed";
    return;
  }
  if (r.roots && !r.roots_verified) {
    r.status = "unverified-roots";
    return;
  }
  const bool ok = r.max_match_distance <= tol && r.max_spectral_residual <= spectral_equation_tolerance;
  r.status = ok ? "verified" : "failed";
}

}  // namespace

DualityReport verify_duality(const ChainSpec& spec, const BetheRoots& roots, Complex eta, double tol) {
  DualityReport r;
  r.spec = spec;
  r.occupations = roots.occupations;
  r.roots = roots;
  try {
    const BetheCheck chk = bethe_check(spec, roots);
    r.bethe_residual = chk.max_residual;
    r.roots_verified = chk.solves(verified_roots_tolerance);
    r.H_values = hamiltonian_eigenvalues(spec, roots);
  } catch (const Error& e) {
    r.predicted = predicted_string_spectrum(spec, roots.occupations);
    r.error = e.what();
    r.status = "failed";
    return r;
  }
  finish_report(r, eta, tol);
  return r;
}

DualityReport verify_duality(const ChainSpec& spec, std::span<const int> occupations,
                             std::span<const Complex> h_values, Complex eta, double tol) {
  DualityReport r;
  r.spec = spec;
  r.occupations.assign(occupations.begin(), occupations.end());
  r.H_values.assign(h_values.begin(), h_values.end());
  finish_report(r, eta, tol);
  return r;
}

MatrixPair build_identity_pair(std::span<const Complex> x, std::span<const Complex> y, Complex g,
                               Complex hbar) {
  require_definite(x, y);
  const std::size_t n = x.size(), m = y.size();
  const Complex sh = std::sinh(hbar);
  MatrixPair p{CMatrix(n, n), CMatrix(m, m)};
  std::vector<Complex> col(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k)
      if (k != j)
        col[j] *= std::sinh(x[j] - x[k] + hbar) / checked_sinh(x[j] - x[k], "sinh(x_j - x_k)", j, k);
    for (std::size_t c = 0; c < m; ++c)
      col[j] *= std::sinh(x[j] - y[c]) / checked_sinh(x[j] - y[c] + hbar, "sinh(x_j - y_c + hbar)", j, c);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      p.L(i, j) = g * sh / checked_sinh(x[i] - x[j] + hbar, "sinh(x_i - x_j + hbar)", i, j) * col[j];
  std::vector<Complex> colt(m, 1.0);
  for (std::size_t b = 0; b < m; ++b) {
    for (std::size_t c = 0; c < m; ++c)
      if (c != b)
        colt[b] *= std::sinh(y[b] - y[c] - hbar) / checked_sinh(y[b] - y[c], "sinh(y_b - y_c)", b, c);
    for (std::size_t k = 0; k < n; ++k)
      colt[b] *= std::sinh(y[b] - x[k]) / checked_sinh(y[b] - x[k] - hbar, "sinh(y_b - x_k - hbar)", b, k);
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      p.L_tilde(a, b) = g * sh / checked_sinh(y[a] - y[b] + hbar, "sinh(y_a - y_b + hbar)", a, b) * colt[b];
  return p;
}

double coefficient_deviation(const CPoly& a, const CPoly& b) {
  const std::size_t n = std::max(a.coeffs.size(), b.coeffs.size());
  double diff = 0.0, scale = std::numeric_limits<double>::min();
  for (std::size_t k = 0; k < n; ++k) {
    const Complex ak = k < a.coeffs.size() ? a.coeffs[k] : Complex{};
    const Complex bk = k < b.coeffs.size() ? b.coeffs[k] : Complex{};
    diff = std::max(diff, std::abs(ak - bk));
    scale = std::max(scale, std::abs(bk));
  }
  return diff / scale;
}

double det_identity_check(std::span<const Complex> x, std::span<const Complex> y, Complex g, Complex hbar) {
  const MatrixPair p = build_identity_pair(x, y, g, hbar);
  const std::size_t rest = x.size() - y.size();
  std::vector<Complex> gs;
  for (std::size_t i = 1; i <= rest; ++i)
    gs.push_back(g * std::exp(-(2.0 * static_cast<double>(i) - 1.0 - static_cast<double>(rest)) * hbar));
  return coefficient_deviation(char_poly(p.L), diagonal_char_poly(gs) * char_poly(p.L_tilde));
}

MatrixPair build_gaudin_pair(std::span<const Complex> x, std::span<const Complex> y, Complex omega,
                             Complex nu) {
  require_definite(x, y);
  const std::size_t n = x.size(), m = y.size();
  MatrixPair p{CMatrix(n, n), CMatrix(m, m)};
  for (std::size_t i = 0; i < n; ++i) {
    Complex d = omega;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      const Complex s = checked_sinh(x[i] - x[k], "sinh(x_i - x_k)", i, k);
      d += nu * std::cosh(x[i] - x[k]) / s;
      p.L(i, k) = nu / s;
    }
    for (std::size_t c = 0; c < m; ++c)
      d += nu * std::cosh(y[c] - x[i]) / checked_sinh(y[c] - x[i], "sinh(y_c - x_i)", c, i);
    p.L(i, i) = d;
  }
  for (std::size_t a = 0; a < m; ++a) {
    Complex d = omega;
    for (std::size_t c = 0; c < m; ++c) {
      if (c == a) continue;
      const Complex s = checked_sinh(y[a] - y[c], "sinh(y_a - y_c)", a, c);
      d -= nu * std::cosh(y[a] - y[c]) / s;
      p.L_tilde(a, c) = nu / s;
    }
    for (std::size_t k = 0; k < n; ++k) d -= nu / std::tanh(x[k] - y[a]);
    p.L_tilde(a, a) = d;
  }
  return p;
}

double gaudin_identity_check(std::span<const Complex> x, std::span<const Complex> y, Complex omega,
                             Complex nu) {
  const MatrixPair p = build_gaudin_pair(x, y, omega, nu);
  const std::size_t rest = x.size() - y.size();
  std::vector<Complex> diag;
  for (std::size_t i = 1; i <= rest; ++i)
    diag.push_back(omega - (2.0 * static_cast<double>(i) - 1.0 - static_cast<double>(rest)) * nu);
  return coefficient_deviation(char_poly(p.L), diagonal_char_poly(diag) * char_poly(p.L_tilde));
}

}  // namespace qcd
