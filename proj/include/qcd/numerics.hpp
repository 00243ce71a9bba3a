#pragma once

// Dense complex linear algebra and polynomial kernels. Everything in the
// library is complex-valued; there are no real-only fast paths.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace qcd {

using Complex = std::complex<double>;

/// Artifact-wide tolerance hierarchy. Errors grow along
/// Bethe solve -> substitution -> eigensolve, so each stage gets its own tier.
namespace tol {
inline constexpr double kernel = 1e-11;
inline constexpr double derived = 1e-9;
inline constexpr double end_to_end = 1e-7;
}  // namespace tol

/// Throws Error(invalid_argument) if z has a NaN or infinite component.
void require_finite(Complex z, const char* what);

/// Dense row-major complex matrix.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols);
  CMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static CMatrix identity(std::size_t n);
  static CMatrix diagonal(std::span<const Complex> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }

  Complex trace() const;
  CMatrix transpose() const;
  /// Largest absolute entry.
  double max_abs() const;
  double frobenius_norm() const;
  /// Induced 1-norm (maximum absolute column sum).
  double norm1() const;

  CMatrix& operator+=(const CMatrix& other);
  CMatrix& operator-=(const CMatrix& other);
  CMatrix& operator*=(Complex s);

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(CMatrix a, Complex s) { return a *= s; }
  friend CMatrix operator*(Complex s, CMatrix a) { return a *= s; }
  friend CMatrix operator*(const CMatrix& a, const CMatrix& b);
  friend std::vector<Complex> operator*(const CMatrix& a, std::span<const Complex> x);

  bool operator==(const CMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

CMatrix commutator(const CMatrix& a, const CMatrix& b);
CMatrix kron(const CMatrix& a, const CMatrix& b);
/// Rows and columns `index` of `a`, in the given order.
CMatrix submatrix(const CMatrix& a, std::span<const std::size_t> index);

/// Polynomial with ascending-degree coefficients.
struct CPoly {
  std::vector<Complex> coeffs;

  /// Degree after ignoring exact trailing zeros; -1 for the zero polynomial.
  int degree() const;
  Complex eval(Complex z) const;
  Complex derivative_at(Complex z) const;
  /// Drops exact zero leading coefficients.
  CPoly& trim();
  /// Infinity norm of the coefficient vector.
  double norm() const;

  friend CPoly operator*(const CPoly& a, const CPoly& b);
};

/// LU factorization with partial pivoting, reusable for many right-hand sides.
class LuFactorization {
 public:
  explicit LuFactorization(const CMatrix& a);

  Complex determinant() const;
  /// True when some pivot is below 1e-13 times the largest row norm of A.
  bool singular() const noexcept { return singular_; }
  std::vector<Complex> solve(std::span<const Complex> b) const;
  /// Solves A X = B column by column.
  CMatrix solve(const CMatrix& b) const;

 private:
  std::size_t n_;
  CMatrix lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
  bool singular_ = false;
};

Complex lu_det(const CMatrix& a);

/// Coefficients of det(lambda I - A). Hessenberg reduction followed by the
/// La Budde recurrence.
CPoly char_poly(const CMatrix& a);

struct RootOptions {
  double tolerance = 1e-11;
  int max_iterations = 500;
};

/// All roots with multiplicity by Aberth-Ehrlich simultaneous iteration.
std::vector<Complex> poly_roots(const CPoly& p, const RootOptions& options = {});

std::vector<Complex> eigenvalues(const CMatrix& a);

struct EigenDecomposition {
  std::vector<Complex> values;
  /// Eigenvectors stored as columns.
  CMatrix vectors;
};

EigenDecomposition eigen_decompose(const CMatrix& a);

std::vector<Complex> solve_linear(const CMatrix& a, std::span<const Complex> b);
CMatrix inverse(const CMatrix& a);
/// ||A||_1 ||A^-1||_1; infinity for a singular matrix.
double condition_number(const CMatrix& a);

/// Elementary symmetric polynomials e_0..e_n of the given values.
std::vector<Complex> elementary_symmetric(std::span<const Complex> values);

struct MultisetMatch {
  /// pairing[i] is the index into `b` matched with a[i].
  std::vector<std::size_t> pairing;
  double max_distance = 0.0;
};

/// Compares two equal-size multisets: both are sorted by (re, im), then
/// pairs are taken greedily by smallest remaining distance.
MultisetMatch match_multisets(std::span<const Complex> a, std::span<const Complex> b);

/// Sorts by (re, im) lexicographically.
void sort_lex(std::vector<Complex>& values);

}  // namespace qcd
