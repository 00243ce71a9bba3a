#pragma once

// Shared generators and brute-force oracles for the test suites. Oracles here
// never call into the library routine they are used to check.

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "qcd/numerics.hpp"

namespace qcd::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  /// Uniform in the box |re| <= s, |im| <= s.
  Complex box(double s = 1.0) { return {uniform(-s, s), uniform(-s, s)}; }
  /// Uniform in the unit disk scaled by r.
  Complex disk(double r = 1.0) {
    for (;;) {
      Complex z = box(1.0);
      if (std::abs(z) <= 1.0) return r * z;
    }
  }
  std::vector<Complex> boxes(std::size_t n, double s = 1.0) {
    std::vector<Complex> v(n);
    for (auto& z : v) z = box(s);
    return v;
  }
  /// Points with pairwise separation at least `gap` (in the box metric).
  std::vector<Complex> separated(std::size_t n, double s, double gap) {
    std::vector<Complex> v;
    while (v.size() < n) {
      Complex z = box(s);
      bool ok = true;
      for (const auto& w : v) ok = ok && std::abs(z - w) >= gap;
      if (ok) v.push_back(z);
    }
    return v;
  }
  CMatrix matrix(std::size_t rows, std::size_t cols, double s = 1.0) {
    CMatrix m(rows, cols);
    for (auto& z : m.data()) z = disk(s);
    return m;
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Determinant by recursive cofactor expansion along the first row.
inline Complex cofactor_det(const CMatrix& a) {
  const std::size_t n = a.rows();
  if (n == 0) return 1.0;
  if (n == 1) return a(0, 0);
  Complex total = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    CMatrix minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i) {
      std::size_t cc = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == c) continue;
        minor(i - 1, cc++) = a(i, j);
      }
    }
    const double sign = (c % 2 == 0) ? 1.0 : -1.0;
    total += sign * a(0, c) * cofactor_det(minor);
  }
  return total;
}

/// Coefficients of det(lambda I - A) from sums of principal minors:
/// coefficient of lambda^{n-k} is (-1)^k times the sum of k x k principal minors.
inline std::vector<Complex> char_poly_by_minors(const CMatrix& a) {
  const std::size_t n = a.rows();
  std::vector<Complex> coeffs(n + 1, Complex{});
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::uint64_t{1} << i)) idx.push_back(i);
    const std::size_t k = idx.size();
    CMatrix sub(k, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) sub(i, j) = a(idx[i], idx[j]);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    coeffs[n - k] += sign * cofactor_det(sub);
  }
  return coeffs;
}

inline double max_abs_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double max_abs(const std::vector<Complex>& a) {
  double d = 0.0;
  for (const auto& z : a) d = std::max(d, std::abs(z));
  return d;
}

}  // namespace qcd::testing
