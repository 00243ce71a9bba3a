#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qcd/error.hpp"
#include "qcd/operator_oracle.hpp"
#include "test_support.hpp"

using namespace qcd;
using qcd::testing::Rng;

namespace {

const Complex I{0.0, 1.0};

ChainSpec random_spec(int n, std::size_t sites, std::uint64_t seed) {
  Rng rng(seed);
  ChainSpec s;
  s.n = n;
  s.q = rng.separated(sites, 0.6, 0.25);
  for (int a = 0; a < n; ++a) s.V.push_back(Complex{0.5 + 0.45 * a, 0.3 * (a % 2 == 0 ? 1 : -1)} + 0.1 * rng.box());
  s.hbar = Complex{0.35, 0.2} + 0.05 * rng.box();
  s.validate();
  return s;
}

// R_ij acting on three tensor factors of C^n, built index by index from the
// two-site matrix (row index a_i * n + a_j).
CMatrix embed(const CMatrix& r, int n, int i, int j) {
  const std::size_t m = static_cast<std::size_t>(n), d = m * m * m;
  CMatrix out(d, d);
  auto digit = [&](std::size_t s, int k) { return (s / static_cast<std::size_t>(std::pow(m, 2 - k))) % m; };
  for (std::size_t row = 0; row < d; ++row)
    for (std::size_t col = 0; col < d; ++col) {
      const int other = 3 - i - j;
      if (digit(row, other) != digit(col, other)) continue;
      out(row, col) = r(digit(row, i) * m + digit(row, j), digit(col, i) * m + digit(col, j));
    }
  return out;
}

double rel_comm(const CMatrix& a, const CMatrix& b) {
  return commutator(a, b).max_abs() / (1.0 + a.max_abs() * b.max_abs());
}

}  // namespace

TEST_CASE("r_matrix") {
  SUBCASE("rank one") {
    const Complex hbar{0.3, 0.2}, z{0.7, -0.4};
    const CMatrix r = r_matrix(1, hbar, z);
    REQUIRE(r.rows() == 1);
    CHECK(std::abs(r(0, 0) - std::sinh(z + hbar) / std::sinh(z)) < 1e-15);
  }
  SUBCASE("rank two at large z") {
    const Complex hbar{0.3, 0.2};
    const CMatrix r = r_matrix(2, hbar, 20.0);
    CHECK(std::abs(r(0 * 2 + 1, 1 * 2 + 0) - 2.0 * std::sinh(hbar)) < 1e-12);
    CHECK(std::abs(r(1 * 2 + 0, 0 * 2 + 1)) < 1e-12);
    CHECK(std::abs(r(0, 0) - std::exp(hbar)) < 1e-12);
    CHECK(std::abs(r(1, 1) - 1.0) < 1e-15);
    CHECK(std::abs(r(0, 3)) == 0.0);
  }
  SUBCASE("entries at finite z") {
    const Complex hbar{0.25, -0.1}, z{0.4, 0.3};
    const CMatrix r = r_matrix(3, hbar, z);
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) {
        if (a == b) continue;
        const Complex expected = std::sinh(hbar) / std::sinh(z) * std::exp((b > a ? 1.0 : -1.0) * z);
        CHECK(std::abs(r(a * 3 + b, b * 3 + a) - expected) < 1e-14);
      }
  }
  SUBCASE("pole") {
    CHECK_THROWS_AS(r_matrix(2, 0.3, 0.0), Error);
    CHECK_THROWS_AS(r_matrix(2, 0.3, I * std::numbers::pi), Error);
  }
  SUBCASE("Yang-Baxter") {
    Rng rng(5);
    for (int n : {2, 3}) {
      for (int trial = 0; trial < 3; ++trial) {
        const Complex hbar = Complex{0.3, 0.2} + 0.1 * rng.box();
        const Complex z = rng.box(), w = rng.box();
        const CMatrix r12 = embed(r_matrix(n, hbar, z - w), n, 0, 1);
        const CMatrix r13 = embed(r_matrix(n, hbar, z), n, 0, 2);
        const CMatrix r23 = embed(r_matrix(n, hbar, w), n, 1, 2);
        const CMatrix lhs = r12 * r13 * r23, rhs = r23 * r13 * r12;
        CHECK((lhs - rhs).max_abs() < 1e-11 * (1.0 + lhs.max_abs()));
      }
    }
  }
}

TEST_CASE("transfer_operator") {
  SUBCASE("single site rank two by hand") {
    const ChainSpec s{2, {Complex{0.2, -0.1}}, {Complex{1.1, 0.3}, Complex{0.5, -0.4}}, Complex{0.3, 0.2}};
    const Complex z{0.6, 0.45};
    const CMatrix t = transfer_operator(s, z);
    const Complex f = std::sinh(z - s.q[0] + s.hbar) / std::sinh(z - s.q[0]);
    CHECK(std::abs(t(0, 0) - (s.V[0] * f + s.V[1])) < 1e-14);
    CHECK(std::abs(t(1, 1) - (s.V[0] + s.V[1] * f)) < 1e-14);
    CHECK(std::abs(t(0, 1)) < 1e-15);
    CHECK(std::abs(t(1, 0)) < 1e-15);
  }
  SUBCASE("commuting family and weights") {
    const ChainSpec s = random_spec(2, 3, 11);
    Rng rng(12);
    const CMatrix t1 = transfer_operator(s, rng.box(1.5)), t2 = transfer_operator(s, rng.box(1.5));
    CHECK(rel_comm(t1, t2) < 1e-10);
    for (int a = 0; a < 2; ++a) CHECK(rel_comm(t1, weight_operator(2, 3, a)) < 1e-12);
  }
  SUBCASE("rank three") {
    const ChainSpec s = random_spec(3, 3, 13);
    const CMatrix t1 = transfer_operator(s, Complex{0.9, 0.2}), t2 = transfer_operator(s, Complex{-0.4, 1.1});
    CHECK(rel_comm(t1, t2) < 1e-10);
  }
  SUBCASE("dimension cap") {
    CHECK(hilbert_dimension(2, 10) == 1024);
    try {
      hilbert_dimension(2, 11);
      FAIL("expected cap");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::dimension_cap);
    }
    CHECK_THROWS_AS(transfer_operator(random_spec(3, 7, 1), 0.5), Error);
  }
}

TEST_CASE("residue_hamiltonians") {
  SUBCASE("asymptotic sum") {
    const ChainSpec s = random_spec(2, 3, 17);
    const ResidueDecomposition res = residue_hamiltonians(s);
    CHECK(res.heldout_error <= 1e-9);
    CMatrix sum = res.C;
    for (const auto& h : res.H) sum += h;
    const CMatrix t = transfer_operator(s, 20.0);
    CHECK((sum - t).max_abs() < 1e-9 * (1.0 + t.max_abs()));
  }
  SUBCASE("commuting hamiltonians") {
    const ChainSpec s = random_spec(2, 3, 19);
    const ResidueDecomposition res = residue_hamiltonians(s);
    for (std::size_t i = 0; i < res.H.size(); ++i)
      for (std::size_t j = i + 1; j < res.H.size(); ++j) CHECK(rel_comm(res.H[i], res.H[j]) < 1e-10);
  }
  SUBCASE("rank one scalars") {
    const ChainSpec s = random_spec(1, 3, 23);
    const ResidueDecomposition res = residue_hamiltonians(s);
    const auto h = hamiltonian_eigenvalues(s, vacuum_roots(1));
    for (std::size_t i = 0; i < 3; ++i) {
      REQUIRE(res.H[i].rows() == 1);
      CHECK(std::abs(res.H[i](0, 0) - h[i]) < 1e-10);
    }
  }
}

TEST_CASE("sectors") {
  SUBCASE("weights enumeration and dimensions") {
    const auto w = all_weights(3, 3);
    CHECK(w.size() == 10);
    CHECK(w.front().M == std::vector<int>{3, 0, 0});
    std::size_t total = 0;
    for (const auto& m : w) {
      const std::size_t dim = sector_basis(3, 3, m).size();
      CHECK(dim == multinomial(m.M));
      total += dim;
    }
    CHECK(total == 27);
  }
  SUBCASE("highest weight sector is the vacuum") {
    const ChainSpec s = random_spec(2, 3, 29);
    const SectorSpectrum sp = sector_spectra(s, WeightVector{{3, 0}});
    REQUIRE(sp.states.size() == 1);
    CHECK(testing::max_abs_diff(sp.states[0].H_values, hamiltonian_eigenvalues(s, vacuum_roots(2))) < 1e-10);
  }
  SUBCASE("two sites one flip") {
    const ChainSpec s = random_spec(2, 2, 31);
    const SectorSpectrum sp = sector_spectra(s, WeightVector{{1, 1}});
    REQUIRE(sp.states.size() == 2);
    for (const auto& st : sp.states) {
      Complex sum = 0.0;
      for (const auto& h : st.H_values) sum += h;
      CHECK(std::abs(sum - (s.V[0] + s.V[1]) * std::sinh(s.hbar)) < 1e-10);
    }
  }
  SUBCASE("four sites half filling satisfies the sum rules") {
    const ChainSpec s = random_spec(2, 4, 37);
    const WeightVector w{{2, 2}};
    const SectorSpectrum sp = sector_spectra(s, w);
    REQUIRE(sp.states.size() == 6);
    CHECK(sp.off_diagonal <= 1e-7);
    for (const auto& st : sp.states) {
      const SumRuleReport rep = sum_rule_check(s, w, st.constant_C, st.H_values);
      CHECK(rep.C_deviation < 1e-9);
      CHECK(rep.H_sum_deviation < 1e-9);
    }
  }
  SUBCASE("state values reproduce the transfer spectrum") {
    const ChainSpec s = random_spec(3, 3, 41);
    const ResidueDecomposition res = residue_hamiltonians(s);
    const Complex z{0.37, 0.81};
    const CMatrix t = transfer_operator(s, z);
    for (const auto& w : all_weights(3, 3)) {
      const SectorSpectrum sp = sector_spectra(res, s, w);
      CHECK(sp.states.size() == multinomial(w.M));
      const auto basis = sector_basis(3, 3, w);
      std::vector<Complex> predicted;
      for (const auto& st : sp.states) {
        Complex v = st.constant_C;
        for (std::size_t k = 0; k < 3; ++k) v += st.H_values[k] / std::tanh(z - s.q[k]);
        predicted.push_back(v);
      }
      const auto actual = eigenvalues(submatrix(t, basis));
      CHECK(match_multisets(predicted, actual).max_distance < 1e-9);
    }
  }
  SUBCASE("deterministic for a seed") {
    const ChainSpec s = random_spec(2, 4, 43);
    const auto a = sector_spectra(s, WeightVector{{2, 2}}, 5);
    const auto b = sector_spectra(s, WeightVector{{2, 2}}, 5);
    for (std::size_t i = 0; i < a.states.size(); ++i) CHECK(a.states[i].H_values == b.states[i].H_values);
  }
}

TEST_CASE("commutativity_report") {
  SUBCASE("rank one is exactly commutative") {
    const CommutativityReport r = commutativity_report(random_spec(1, 3, 47));
    CHECK(r.transfer == 0.0);
    CHECK(r.hamiltonians == 0.0);
    CHECK(r.weights == 0.0);
  }
  SUBCASE("rank two") {
    const CommutativityReport r = commutativity_report(random_spec(2, 2, 53));
    CHECK(r.transfer <= 1e-11);
    CHECK(r.hamiltonians <= 1e-11);
    CHECK(r.weights <= 1e-11);
  }
}

TEST_CASE("gaudin_operators") {
  Rng rng(59);
  const auto q = rng.separated(3, 0.7, 0.3);
  const std::vector<Complex> v{Complex{0.4, 0.1}, Complex{-0.3, 0.2}};
  const auto ops = gaudin_operators(2, q, v, Complex{0.3, 0.1});
  REQUIRE(ops.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) CHECK(rel_comm(ops[i], ops[j]) < 1e-12);
    for (int a = 0; a < 2; ++a) CHECK(rel_comm(ops[i], weight_operator(2, 3, a)) < 1e-14);
  }
  // Vacuum: H_i = v_1 + hbar sum_{j != i} coth(q_ij).
  for (std::size_t i = 0; i < 3; ++i) {
    Complex e = v[0];
    for (std::size_t j = 0; j < 3; ++j)
      if (j != i) e += Complex{0.3, 0.1} / std::tanh(q[i] - q[j]);
    CHECK(std::abs(ops[i](0, 0) - e) < 1e-14);
  }
}
