#include "qcd/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qcd/error.hpp"

namespace qcd {

namespace {

void require_square(const CMatrix& a, const char* op) {
  if (!a.square()) {
    std::ostringstream msg;
    msg << op << ": expected a square matrix, got " << a.rows() << "x" << a.cols();
    throw Error(ErrorCode::dimension, msg.str());
  }
}

Eigen::MatrixXcd to_eigen(const CMatrix& a) {
  Eigen::MatrixXcd m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  return m;
}

bool lex_less(Complex a, Complex b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::dimension: return "dimension";
    case ErrorCode::singular_system: return "singular-system";
    case ErrorCode::undefined_roots: return "undefined-roots";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::singular_configuration: return "singular-configuration";
    case ErrorCode::degenerate_epsilon: return "degenerate-epsilon";
    case ErrorCode::flow_singularity: return "flow-singularity";
    case ErrorCode::regime_mismatch: return "regime-mismatch";
    case ErrorCode::pole: return "pole";
    case ErrorCode::excluded_locus: return "excluded-locus";
    case ErrorCode::dimension_cap: return "dimension-cap";
    case ErrorCode::resample_points: return "resample-points";
    case ErrorCode::degeneracy: return "degeneracy";
    case ErrorCode::invalid_occupations: return "invalid-occupations";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::schema: return "schema";
    case ErrorCode::invariant: return "invariant";
    case ErrorCode::io: return "io";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

void require_finite(Complex z, const char* what) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw Error(ErrorCode::invalid_argument, std::string(what) + " is not finite");
}

// ---------------------------------------------------------------- CMatrix

CMatrix::CMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

CMatrix::CMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_)
      throw Error(ErrorCode::dimension, "CMatrix: ragged initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::diagonal(std::span<const Complex> diag) {
  CMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Complex CMatrix::trace() const {
  Complex t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

CMatrix CMatrix::transpose() const {
  CMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double CMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& z : data_) m = std::max(m, std::abs(z));
  return m;
}

double CMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

double CMatrix::norm1() const {
  double best = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

CMatrix& CMatrix::operator+=(const CMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw Error(ErrorCode::dimension, "CMatrix +: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw Error(ErrorCode::dimension, "CMatrix -: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

CMatrix& CMatrix::operator*=(Complex s) {
  for (auto& z : data_) z *= s;
  return *this;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols_ != b.rows_) throw Error(ErrorCode::dimension, "CMatrix *: shape mismatch");
  CMatrix c(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      const Complex* brow = &b.data_[k * b.cols_];
      Complex* crow = &c.data_[i * c.cols_];
      for (std::size_t j = 0; j < b.cols_; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

std::vector<Complex> operator*(const CMatrix& a, std::span<const Complex> x) {
  if (a.cols_ != x.size()) throw Error(ErrorCode::dimension, "CMatrix * vector: shape mismatch");
  std::vector<Complex> y(a.rows_);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < a.cols_; ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t r = 0; r < b.cols(); ++r)
          k(i * b.rows() + p, j * b.cols() + r) = a(i, j) * b(p, r);
  return k;
}

CMatrix submatrix(const CMatrix& a, std::span<const std::size_t> index) {
  CMatrix s(index.size(), index.size());
  for (std::size_t i = 0; i < index.size(); ++i)
    for (std::size_t j = 0; j < index.size(); ++j) s(i, j) = a(index[i], index[j]);
  return s;
}

// ---------------------------------------------------------------- CPoly

int CPoly::degree() const {
  for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k)
    if (coeffs[k] != Complex{}) return k;
  return -1;
}

Complex CPoly::eval(Complex z) const {
  Complex acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

Complex CPoly::derivative_at(Complex z) const {
  Complex acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 1;) acc = acc * z + static_cast<double>(k) * coeffs[k];
  return acc;
}

CPoly& CPoly::trim() {
  coeffs.resize(static_cast<std::size_t>(degree() + 1));
  return *this;
}

double CPoly::norm() const {
  double m = 0.0;
  for (const auto& c : coeffs) m = std::max(m, std::abs(c));
  return m;
}

CPoly operator*(const CPoly& a, const CPoly& b) {
  if (a.coeffs.empty() || b.coeffs.empty()) return CPoly{};
  CPoly c;
  c.coeffs.assign(a.coeffs.size() + b.coeffs.size() - 1, Complex{});
  for (std::size_t i = 0; i < a.coeffs.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs.size(); ++j) c.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
  return c;
}

// ---------------------------------------------------------------- LU

LuFactorization::LuFactorization(const CMatrix& a) : n_(a.rows()), lu_(a), perm_(a.rows()) {
  require_square(a, "LU factorization");
  double max_row = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += std::abs(a(i, j));
    max_row = std::max(max_row, s);
  }
  const double threshold = 1e-13 * max_row;
  for (std::size_t i = 0; i < n_; ++i) perm_[i] = i;

  for (std::size_t k = 0; k < n_; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n_; ++i) {
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        piv = i;
      }
    }
    if (best <= threshold) singular_ = true;
    if (piv != k) {
      for (std::size_t j = 0; j < n_; ++j) std::swap(lu_(k, j), lu_(piv, j));
      std::swap(perm_[k], perm_[piv]);
      sign_ = -sign_;
    }
    const Complex pivot = lu_(k, k);
    if (pivot == Complex{}) continue;
    for (std::size_t i = k + 1; i < n_; ++i) {
      const Complex f = lu_(i, k) / pivot;
      lu_(i, k) = f;
      if (f == Complex{}) continue;
      for (std::size_t j = k + 1; j < n_; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
  if (max_row == 0.0 && n_ > 0) singular_ = true;
}

Complex LuFactorization::determinant() const {
  Complex d = static_cast<double>(sign_);
  for (std::size_t k = 0; k < n_; ++k) d *= lu_(k, k);
  return d;
}

std::vector<Complex> LuFactorization::solve(std::span<const Complex> b) const {
  if (b.size() != n_) throw Error(ErrorCode::dimension, "solve: right-hand side length mismatch");
  if (singular_) throw Error(ErrorCode::singular_system, "solve: matrix is numerically singular");
  std::vector<Complex> x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
  for (std::size_t i = n_; i-- > 0;) {
    for (std::size_t j = i + 1; j < n_; ++j) x[i] -= lu_(i, j) * x[j];
    x[i] /= lu_(i, i);
  }
  return x;
}

CMatrix LuFactorization::solve(const CMatrix& b) const {
  if (b.rows() != n_) throw Error(ErrorCode::dimension, "solve: right-hand side rows mismatch");
  CMatrix x(n_, b.cols());
  std::vector<Complex> col(n_);
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t i = 0; i < n_; ++i) col[i] = b(i, c);
    const auto sol = solve(col);
    for (std::size_t i = 0; i < n_; ++i) x(i, c) = sol[i];
  }
  return x;
}

Complex lu_det(const CMatrix& a) {
  require_square(a, "lu_det");
  if (a.rows() == 0) return 1.0;
  return LuFactorization(a).determinant();
}

std::vector<Complex> solve_linear(const CMatrix& a, std::span<const Complex> b) {
  require_square(a, "solve_linear");
  return LuFactorization(a).solve(b);
}

CMatrix inverse(const CMatrix& a) {
  require_square(a, "inverse");
  return LuFactorization(a).solve(CMatrix::identity(a.rows()));
}

double condition_number(const CMatrix& a) {
  require_square(a, "condition_number");
  LuFactorization lu(a);
  if (lu.singular()) return std::numeric_limits<double>::infinity();
  return a.norm1() * lu.solve(CMatrix::identity(a.rows())).norm1();
}

// ---------------------------------------------------------------- char_poly

CPoly char_poly(const CMatrix& a) {
  require_square(a, "char_poly");
  const std::size_t n = a.rows();
  if (n > 64) throw Error(ErrorCode::dimension, "char_poly: matrix larger than 64");

  // Householder reduction to upper Hessenberg form (a similarity transform).
  CMatrix h = a;
  std::vector<Complex> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double xnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) xnorm += std::norm(h(i, k));
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) continue;
    const Complex x0 = h(k + 1, k);
    const Complex phase = x0 == Complex{} ? Complex{1.0} : x0 / std::abs(x0);
    const Complex alpha = -phase * xnorm;
    std::fill(v.begin(), v.end(), Complex{});
    for (std::size_t i = k + 1; i < n; ++i) v[i] = h(i, k);
    v[k + 1] -= alpha;
    double vnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm += std::norm(v[i]);
    if (vnorm == 0.0) continue;
    vnorm = std::sqrt(vnorm);
    for (std::size_t i = k + 1; i < n; ++i) v[i] /= vnorm;
    // h <- (I - 2 v v^*) h
    for (std::size_t j = 0; j < n; ++j) {
      Complex s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += std::conj(v[i]) * h(i, j);
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= 2.0 * v[i] * s;
    }
    // h <- h (I - 2 v v^*)
    for (std::size_t i = 0; i < n; ++i) {
      Complex s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += h(i, j) * v[j];
      for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= 2.0 * s * std::conj(v[j]);
    }
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }

  // La Budde recurrence for the characteristic polynomial of a Hessenberg matrix.
  std::vector<std::vector<Complex>> p(n + 1);
  p[0] = {Complex{1.0}};
  for (std::size_t k = 1; k <= n; ++k) {
    std::vector<Complex> pk(k + 1, Complex{});
    const auto& prev = p[k - 1];
    const Complex hkk = h(k - 1, k - 1);
    for (std::size_t d = 0; d < prev.size(); ++d) {
      pk[d + 1] += prev[d];
      pk[d] -= hkk * prev[d];
    }
    Complex prod = 1.0;
    for (std::size_t i = k - 1; i >= 1; --i) {
      prod *= h(i, i - 1);
      if (prod == Complex{}) break;
      const Complex f = h(i - 1, k - 1) * prod;
      for (std::size_t d = 0; d < p[i - 1].size(); ++d) pk[d] -= f * p[i - 1][d];
    }
    p[k] = std::move(pk);
  }
  return CPoly{p[n]};
}

// ---------------------------------------------------------------- poly_roots

std::vector<Complex> poly_roots(const CPoly& input, const RootOptions& options) {
  CPoly p = input;
  for (const auto& c : p.coeffs) require_finite(c, "polynomial coefficient");
  if (p.trim().degree() < 0) throw Error(ErrorCode::undefined_roots, "poly_roots: zero polynomial");

  std::vector<Complex> roots;
  // Exact zero roots deflate without iteration.
  std::size_t zeros = 0;
  while (zeros < p.coeffs.size() && p.coeffs[zeros] == Complex{}) ++zeros;
  roots.assign(zeros, Complex{});
  p.coeffs.erase(p.coeffs.begin(), p.coeffs.begin() + static_cast<std::ptrdiff_t>(zeros));

  const int n = p.degree();
  if (n <= 0) return roots;
  const Complex lead = p.coeffs[n];
  if (n == 1) {
    roots.push_back(-p.coeffs[0] / lead);
    return roots;
  }

  // Start on a circle sized by the Fujiwara bound, rotated off symmetric axes.
  double bound = 0.0;
  for (int k = 0; k < n; ++k) {
    const double r = std::pow(std::abs(p.coeffs[k] / lead), 1.0 / (n - k));
    bound = std::max(bound, r);
  }
  bound = std::max(bound, 1e-3);
  const Complex center = -p.coeffs[n - 1] / (static_cast<double>(n) * lead);
  std::vector<Complex> z(n);
  for (int k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / n + 0.4;
    z[k] = center + bound * std::polar(1.0, angle);
  }

  std::vector<double> abs_coeffs(p.coeffs.size());
  for (std::size_t k = 0; k < p.coeffs.size(); ++k) abs_coeffs[k] = std::abs(p.coeffs[k]);
  auto backward_scale = [&](Complex x) {
    const double r = std::max(1.0, std::abs(x));
    double s = 0.0;
    for (auto it = abs_coeffs.rbegin(); it != abs_coeffs.rend(); ++it) s = s * r + *it;
    return s;
  };

  const double pnorm = p.norm();
  std::vector<bool> done(n, false);
  double worst = 0.0;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    bool all_done = true;
    worst = 0.0;
    for (int k = 0; k < n; ++k) {
      const Complex val = p.eval(z[k]);
      const double rel = std::abs(val) / pnorm;
      worst = std::max(worst, rel);
      // Converged at the requested tolerance, or at the rounding floor of
      // Horner evaluation when the tolerance is out of reach.
      const double floor = 16.0 * std::numeric_limits<double>::epsilon() * backward_scale(z[k]);
      if (rel <= options.tolerance || std::abs(val) <= floor) {
        done[k] = true;
        continue;
      }
      done[k] = false;
      all_done = false;
      const Complex der = p.derivative_at(z[k]);
      Complex sum = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != k) sum += 1.0 / (z[k] - z[j]);
      Complex step;
      if (der == Complex{}) {
        step = 1e-3 * std::polar(1.0, 1.0 + k);
      } else {
        const Complex w = val / der;
        step = w / (1.0 - w * sum);
      }
      z[k] -= step;
    }
    if (all_done) {
      roots.insert(roots.end(), z.begin(), z.end());
      return roots;
    }
  }
  std::vector<Complex> best = roots;
  best.insert(best.end(), z.begin(), z.end());
  throw ConvergenceError("poly_roots: Aberth iteration did not converge", std::move(best), worst);
}

// ---------------------------------------------------------------- eigen

std::vector<Complex> eigenvalues(const CMatrix& a) {
  require_square(a, "eigenvalues");
  if (a.rows() > 64) throw Error(ErrorCode::dimension, "eigenvalues: matrix larger than 64");
  if (a.rows() == 0) return {};
  for (const auto& z : a.data()) require_finite(z, "matrix entry");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(to_eigen(a), false);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::convergence, "eigenvalues: QR iteration did not converge");
  const auto& ev = solver.eigenvalues();
  return std::vector<Complex>(ev.data(), ev.data() + ev.size());
}

EigenDecomposition eigen_decompose(const CMatrix& a) {
  require_square(a, "eigen_decompose");
  EigenDecomposition out;
  if (a.rows() == 0) return out;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(to_eigen(a), true);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::convergence, "eigen_decompose: QR iteration did not converge");
  const auto& ev = solver.eigenvalues();
  out.values.assign(ev.data(), ev.data() + ev.size());
  out.vectors = CMatrix(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out.vectors(i, j) = solver.eigenvectors()(i, j);
  return out;
}

// ---------------------------------------------------------------- misc

std::vector<Complex> elementary_symmetric(std::span<const Complex> values) {
  std::vector<Complex> e(values.size() + 1, Complex{});
  e[0] = 1.0;
  for (std::size_t m = 0; m < values.size(); ++m)
    for (std::size_t k = m + 1; k >= 1; --k) e[k] += values[m] * e[k - 1];
  return e;
}

void sort_lex(std::vector<Complex>& values) { std::sort(values.begin(), values.end(), lex_less); }

MultisetMatch match_multisets(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::dimension, "match_multisets: size mismatch");
  const std::size_t n = a.size();
  std::vector<std::size_t> ia(n), ib(n);
  for (std::size_t i = 0; i < n; ++i) ia[i] = ib[i] = i;
  std::stable_sort(ia.begin(), ia.end(), [&](auto x, auto y) { return lex_less(a[x], a[y]); });
  std::stable_sort(ib.begin(), ib.end(), [&](auto x, auto y) { return lex_less(b[x], b[y]); });

  MultisetMatch out;
  out.pairing.assign(n, n);
  std::vector<bool> used_a(n, false), used_b(n, false);
  for (std::size_t round = 0; round < n; ++round) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used_a[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (used_b[j]) continue;
        const double d = std::abs(a[ia[i]] - b[ib[j]]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    used_a[bi] = used_b[bj] = true;
    out.pairing[ia[bi]] = ib[bj];
    out.max_distance = std::max(out.max_distance, best);
  }
  return out;
}

}  // namespace qcd
