#include "qcd/operator_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qcd/error.hpp"

namespace qcd {

namespace {

std::size_t ipow(std::size_t base, std::size_t e) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= base;
  return r;
}

struct Digits {
  std::size_t n;
  std::vector<std::size_t> place;  // n^(N-1-k)

  Digits(int rank, std::size_t sites) : n(static_cast<std::size_t>(rank)), place(sites) {
    for (std::size_t k = 0; k < sites; ++k) place[k] = ipow(n, sites - 1 - k);
  }
  std::size_t get(std::size_t state, std::size_t k) const { return (state / place[k]) % n; }
  std::size_t set(std::size_t state, std::size_t k, std::size_t letter) const {
    return state - get(state, k) * place[k] + letter * place[k];
  }
};

// w = R_0k v for vectors on aux (x) sites, index aux * d + state.
void apply_r(const CMatrix& r, const Digits& dg, std::size_t k, std::size_t d, const std::vector<Complex>& v,
             std::vector<Complex>& w) {
  const std::size_t n = dg.n;
  std::fill(w.begin(), w.end(), Complex{});
  for (std::size_t b0 = 0; b0 < n; ++b0) {
    for (std::size_t c = 0; c < d; ++c) {
      const Complex x = v[b0 * d + c];
      if (x == Complex{}) continue;
      const std::size_t bk = dg.get(c, k);
      const std::size_t col = b0 * n + bk;
      for (std::size_t a0 = 0; a0 < n; ++a0) {
        for (std::size_t ak = 0; ak < n; ++ak) {
          const Complex rv = r(a0 * n + ak, col);
          if (rv == Complex{}) continue;
          w[a0 * d + dg.set(c, k, ak)] += rv * x;
        }
      }
    }
  }
}

double max_commutator(const CMatrix& a, const CMatrix& b) { return commutator(a, b).max_abs(); }

bool lex_less(const SectorState& x, const SectorState& y) {
  for (std::size_t i = 0; i < x.H_values.size(); ++i) {
    if (x.H_values[i].real() != y.H_values[i].real()) return x.H_values[i].real() < y.H_values[i].real();
    if (x.H_values[i].imag() != y.H_values[i].imag()) return x.H_values[i].imag() < y.H_values[i].imag();
  }
  return false;
}

}  // namespace

std::size_t hilbert_dimension(int n, std::size_t sites) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "rank must be positive");
  std::size_t d = 1;
  for (std::size_t k = 0; k < sites; ++k) {
    d *= static_cast<std::size_t>(n);
    if (d > oracle_dimension_cap)
      throw Error(ErrorCode::dimension_cap, "n^N exceeds the dense oracle cap of " +
                                                std::to_string(oracle_dimension_cap));
  }
  return d;
}

CMatrix r_matrix(int n, Complex hbar, Complex z) {
  if (std::abs(std::sinh(z)) < pole_threshold) throw Error(ErrorCode::pole, "R-matrix pole at z = 0 (mod i pi)");
  const std::size_t m = static_cast<std::size_t>(n);
  CMatrix r(m * m, m * m);
  const Complex diag = std::sinh(z + hbar) / std::sinh(z);
  const Complex exch = std::sinh(hbar) / std::sinh(z);
  for (std::size_t a = 0; a < m; ++a) {
    r(a * m + a, a * m + a) = diag;
    for (std::size_t b = 0; b < m; ++b) {
      if (a == b) continue;
      r(a * m + b, a * m + b) = 1.0;
      // e_ab (x) e_ba maps |b, a> to |a, b>.
      const double sign = b > a ? 1.0 : -1.0;
      r(a * m + b, b * m + a) = exch * std::exp(sign * z);
    }
  }
  return r;
}

CMatrix transfer_operator(const ChainSpec& spec, Complex z) {
  const std::size_t sites = spec.sites();
  const std::size_t d = hilbert_dimension(spec.n, sites);
  const std::size_t n = static_cast<std::size_t>(spec.n);
  const Digits dg(spec.n, sites);
  std::vector<CMatrix> rs;
  for (std::size_t k = 0; k < sites; ++k) rs.push_back(r_matrix(spec.n, spec.hbar, z - spec.q[k]));

  CMatrix t(d, d);
  std::vector<Complex> v(n * d), w(n * d);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t s = 0; s < d; ++s) {
      std::fill(v.begin(), v.end(), Complex{});
      v[a * d + s] = 1.0;
      for (std::size_t k = sites; k-- > 0;) {
        apply_r(rs[k], dg, k, d, v, w);
        std::swap(v, w);
      }
      for (std::size_t row = 0; row < d; ++row) t(row, s) += spec.V[a] * v[a * d + row];
    }
  }
  return t;
}

CMatrix weight_operator(int n, std::size_t sites, int a) {
  const std::size_t d = hilbert_dimension(n, sites);
  const Digits dg(n, sites);
  CMatrix m(d, d);
  for (std::size_t s = 0; s < d; ++s) {
    int count = 0;
    for (std::size_t k = 0; k < sites; ++k) count += dg.get(s, k) == static_cast<std::size_t>(a) ? 1 : 0;
    m(s, s) = static_cast<double>(count);
  }
  return m;
}

ResidueDecomposition residue_hamiltonians(const ChainSpec& spec) {
  spec.validate();
  const std::size_t sites = spec.sites();
  const std::size_t d = hilbert_dimension(spec.n, sites);
  // Rotate the sample circle until the coth basis is well conditioned.
  for (int attempt = 0; attempt < 4; ++attempt) {
    const double phase = 0.3 + 0.41 * attempt;
    const auto pts = coth_sample_points(spec.q, 2.0, phase);
    bool near_pole = false;
    for (const auto& z : pts)
      for (const auto& qk : spec.q) near_pole = near_pole || std::abs(std::sinh(z - qk)) < 1e-3;
    if (near_pole) continue;
    const CMatrix a = coth_basis(spec.q, pts);
    if (condition_number(a) > 1e8) continue;

    std::vector<CMatrix> samples;
    for (const auto& z : pts) samples.push_back(transfer_operator(spec, z));
    const LuFactorization lu(a);
    ResidueDecomposition out;
    out.C = CMatrix(d, d);
    out.H.assign(sites, CMatrix(d, d));
    std::vector<Complex> rhs(sites + 1);
    for (std::size_t e = 0; e < d * d; ++e) {
      for (std::size_t s = 0; s <= sites; ++s) rhs[s] = samples[s].data()[e];
      const auto coef = lu.solve(rhs);
      out.C.data()[e] = coef[0];
      for (std::size_t k = 0; k < sites; ++k) out.H[k].data()[e] = coef[k + 1];
    }

    const Complex check = coth_sample_points(spec.q, 1.3, phase + 0.8)[0];
    CMatrix model = out.C;
    for (std::size_t k = 0; k < sites; ++k) model += out.H[k] * (1.0 / std::tanh(check - spec.q[k]));
    const CMatrix truth = transfer_operator(spec, check);
    out.heldout_error = (model - truth).max_abs() / std::max(1.0, truth.max_abs());
    if (out.heldout_error <= 1e-9) return out;
  }
  throw Error(ErrorCode::resample_points, "no well-conditioned sample configuration for the residue fit");
}

std::vector<std::size_t> sector_basis(int n, std::size_t sites, const WeightVector& weights) {
  if (weights.M.size() != static_cast<std::size_t>(n))
    throw Error(ErrorCode::dimension, "weight vector length must equal the rank");
  const std::size_t d = hilbert_dimension(n, sites);
  const Digits dg(n, sites);
  std::vector<std::size_t> out;
  std::vector<int> count(static_cast<std::size_t>(n));
  for (std::size_t s = 0; s < d; ++s) {
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t k = 0; k < sites; ++k) ++count[dg.get(s, k)];
    if (count == weights.M) out.push_back(s);
  }
  return out;
}

std::vector<WeightVector> all_weights(int n, std::size_t sites) {
  std::vector<WeightVector> out;
  std::vector<int> m(static_cast<std::size_t>(n), 0);
  // Recursive composition enumeration, first letter taking the most.
  auto rec = [&](auto&& self, std::size_t a, int remaining) -> void {
    if (a + 1 == m.size()) {
      m[a] = remaining;
      out.push_back({m});
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      m[a] = k;
      self(self, a + 1, remaining - k);
    }
  };
  rec(rec, 0, static_cast<int>(sites));
  return out;
}

SectorSpectrum joint_sector_spectrum(std::span<const CMatrix> ops, const CMatrix* constant, int n,
                                     std::size_t sites, const WeightVector& weights, std::uint64_t seed) {
  const auto basis = sector_basis(n, sites, weights);
  SectorSpectrum out;
  out.weights = weights;
  out.dimension = basis.size();
  if (basis.empty()) return out;

  std::vector<CMatrix> restricted;
  for (const auto& op : ops) restricted.push_back(submatrix(op, basis));
  const CMatrix c_restricted = constant ? submatrix(*constant, basis) : CMatrix();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const std::size_t dim = basis.size();
  for (int attempt = 0; attempt <= 5; ++attempt) {
    CMatrix g(dim, dim);
    for (const auto& h : restricted) g += h * Complex{unit(rng), unit(rng)};
    EigenDecomposition eig;
    CMatrix inv;
    try {
      eig = eigen_decompose(g);
      inv = inverse(eig.vectors);
    } catch (const Error&) {
      continue;
    }
    double off = 0.0;
    std::vector<SectorState> states(dim);
    auto diagonal_of = [&](const CMatrix& h, auto&& store) {
      const CMatrix t = inv * h * eig.vectors;
      const double scale = std::max(1.0, h.max_abs());
      for (std::size_t i = 0; i < dim; ++i) {
        store(i, t(i, i));
        for (std::size_t j = 0; j < dim; ++j)
          if (i != j) off = std::max(off, std::abs(t(i, j)) / scale);
      }
    };
    for (const auto& h : restricted)
      diagonal_of(h, [&](std::size_t i, Complex value) { states[i].H_values.push_back(value); });
    if (constant) diagonal_of(c_restricted, [&](std::size_t i, Complex value) { states[i].constant_C = value; });
    if (off > 1e-7) {
      out.retries = attempt + 1;
      continue;
    }
    std::sort(states.begin(), states.end(), lex_less);
    out.states = std::move(states);
    out.off_diagonal = off;
    out.retries = attempt;
    return out;
  }
  throw Error(ErrorCode::degeneracy, "joint diagonalization failed after 5 retries (degenerate combination)");
}

SectorSpectrum sector_spectra(const ResidueDecomposition& residues, const ChainSpec& spec,
                              const WeightVector& weights, std::uint64_t seed) {
  return joint_sector_spectrum(residues.H, &residues.C, spec.n, spec.sites(), weights, seed);
}

SectorSpectrum sector_spectra(const ChainSpec& spec, const WeightVector& weights, std::uint64_t seed) {
  return sector_spectra(residue_hamiltonians(spec), spec, weights, seed);
}

CommutativityReport commutativity_report(const ChainSpec& spec) {
  spec.validate();
  const std::size_t sites = spec.sites();
  const auto pts = coth_sample_points(spec.q, 1.7, 0.9);
  const CMatrix t1 = transfer_operator(spec, pts[0]);
  const CMatrix t2 = transfer_operator(spec, pts[1]);
  CommutativityReport r;
  r.transfer = max_commutator(t1, t2);
  const ResidueDecomposition res = residue_hamiltonians(spec);
  for (std::size_t i = 0; i < sites; ++i)
    for (std::size_t j = i + 1; j < sites; ++j) r.hamiltonians = std::max(r.hamiltonians, max_commutator(res.H[i], res.H[j]));
  for (int a = 0; a < spec.n; ++a) {
    const CMatrix m = weight_operator(spec.n, sites, a);
    r.weights = std::max(r.weights, max_commutator(t1, m));
    for (const auto& h : res.H) r.weights = std::max(r.weights, max_commutator(h, m));
  }
  return r;
}

std::vector<CMatrix> gaudin_operators(int n, std::span<const Complex> q, std::span<const Complex> v, Complex hbar) {
  const std::size_t sites = q.size();
  const std::size_t d = hilbert_dimension(n, sites);
  if (v.size() != static_cast<std::size_t>(n)) throw Error(ErrorCode::dimension, "Gaudin twist must have n entries");
  const Digits dg(n, sites);
  std::vector<CMatrix> out(sites, CMatrix(d, d));
  for (std::size_t i = 0; i < sites; ++i) {
    CMatrix& h = out[i];
    for (std::size_t s = 0; s < d; ++s) {
      const std::size_t li = dg.get(s, i);
      h(s, s) += v[li];
      for (std::size_t j = 0; j < sites; ++j) {
        if (j == i) continue;
        const Complex x = q[i] - q[j];
        if (std::abs(std::sinh(x)) < pole_threshold) throw Error(ErrorCode::singular_configuration, "coincident sites");
        const Complex c = hbar / std::sinh(x);
        const std::size_t lj = dg.get(s, j);
        if (li == lj) {
          h(s, s) += c * std::cosh(x);
        } else {
          h(dg.set(dg.set(s, i, lj), j, li), s) += c;
        }
      }
    }
  }
  return out;
}

}  // namespace qcd
