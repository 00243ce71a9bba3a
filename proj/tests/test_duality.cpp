#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qcd/duality.hpp"
#include "qcd/error.hpp"
#include "test_support.hpp"

using namespace qcd;
using qcd::testing::Rng;

namespace {

const Complex I{0.0, 1.0};

ChainSpec random_spec(int n, std::size_t sites, std::uint64_t seed) {
  Rng rng(seed);
  ChainSpec s;
  s.n = n;
  s.q = rng.separated(sites, 0.8, 0.2);
  for (int a = 0; a < n; ++a) s.V.push_back(Complex{0.5 + 0.45 * a, 0.3 * (a % 2 == 0 ? 1 : -1)} + 0.1 * rng.box());
  s.hbar = Complex{0.35, 0.2} + 0.05 * rng.box();
  s.validate();
  return s;
}

std::vector<Complex> quadratic_mu(const ChainSpec& s) {
  const Complex h = std::exp(2.0 * s.hbar), w1 = std::exp(2.0 * s.q[0]), w2 = std::exp(2.0 * s.q[1]);
  const Complex e = s.V[0] * std::exp(-2.0 * s.hbar);
  const Complex a = e * h * h - s.V[1], b = (w1 + w2) * (s.V[1] - e * h), c = w1 * w2 * (e - s.V[1]);
  const Complex d = std::sqrt(b * b - 4.0 * a * c);
  return {0.5 * std::log((-b + d) / (2.0 * a)), 0.5 * std::log((-b - d) / (2.0 * a))};
}

double poly_deviation(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double d = 0.0, s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    d = std::max(d, std::abs(a[k] - b[k]));
    s = std::max(s, std::abs(b[k]));
  }
  return d / s;
}

std::vector<Complex> poly_mul(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  std::vector<Complex> c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

}  // namespace

TEST_CASE("predicted_string_spectrum") {
  ChainSpec s = random_spec(2, 2, 1);
  SUBCASE("one flip on two sites") {
    const auto p = predicted_string_spectrum(s, std::vector<int>{1});
    CHECK(p.group_sizes == std::vector<int>{1, 1});
    CHECK(std::abs(p.values[0] - s.V[0]) < 1e-15);
    CHECK(std::abs(p.values[1] - s.V[1]) < 1e-15);
  }
  SUBCASE("one flip on four sites") {
    s = random_spec(2, 4, 2);
    const auto p = predicted_string_spectrum(s, std::vector<int>{1});
    const std::vector<Complex> e{std::exp(-2.0 * s.hbar) * s.V[0], s.V[0], std::exp(2.0 * s.hbar) * s.V[0], s.V[1]};
    CHECK(testing::max_abs_diff(p.values, e) < 1e-14);
  }
  SUBCASE("vacuum three sites") {
    s = random_spec(2, 3, 3);
    const auto p = predicted_string_spectrum(s, std::vector<int>{0});
    const std::vector<Complex> e{std::exp(-2.0 * s.hbar) * s.V[0], s.V[0], std::exp(2.0 * s.hbar) * s.V[0]};
    CHECK(testing::max_abs_diff(p.values, e) < 1e-14);
    CHECK(p.group_sizes == std::vector<int>{3, 0});
  }
  SUBCASE("negative weight") {
    CHECK_THROWS_AS(predicted_string_spectrum(s, std::vector<int>{3}), Error);
  }
}

TEST_CASE("qc_substitute") {
  SUBCASE("single site vacuum") {
    ChainSpec s{2, {Complex{0.1, 0.2}}, {Complex{1.1, 0.3}, Complex{0.4, -0.2}}, Complex{0.3, 0.1}};
    const Substitution sub = qc_substitute(s, vacuum_roots(2), 1.0);
    CHECK(std::abs((*sub.state.qdot)[0] - s.V[0]) < 1e-15);
    CHECK(std::abs(sub.params.hbar() - s.hbar) < 1e-15);
  }
  SUBCASE("eta scaling") {
    const ChainSpec s = random_spec(2, 3, 5);
    const auto h = hamiltonian_eigenvalues(s, vacuum_roots(2));
    const Substitution a = qc_substitute(s, h, 1.0), b = qc_substitute(s, h, 2.0);
    CHECK(std::abs(b.params.nu() - a.params.nu() / 2.0) < 1e-15);
    CHECK(testing::max_abs_diff(*b.state.qdot, std::vector<Complex>{2.0 * (*a.state.qdot)[0], 2.0 * (*a.state.qdot)[1],
                                                                     2.0 * (*a.state.qdot)[2]}) < 1e-14);
    auto ea = eigenvalues(lax_from_velocities(a.params, a.state.q, *a.state.qdot));
    auto eb = eigenvalues(lax_from_velocities(b.params, b.state.q, *b.state.qdot));
    CHECK(match_multisets(ea, eb).max_distance < 1e-12);
  }
}

TEST_CASE("verify_duality") {
  SUBCASE("vacuum on random specs") {
    for (int n : {2, 3})
      for (std::size_t sites = 2; sites <= 6; ++sites) {
        const ChainSpec s = random_spec(n, sites, 10 * sites + n);
        const DualityReport r = verify_duality(s, vacuum_roots(n), 1.0, 1e-9);
        CHECK(r.max_match_distance <= 1e-9);
        CHECK(r.status == "verified");
        CHECK(r.max_spectral_residual <= 1e-8);
      }
  }
  SUBCASE("two sites one flip") {
    const ChainSpec s = random_spec(2, 2, 7);
    for (const Complex mu : quadratic_mu(s)) {
      const DualityReport r = verify_duality(s, BetheRoots{{1}, {{mu}}}, 1.0, 1e-9);
      CHECK(r.status == "verified");
      std::vector<Complex> expected{s.V[0], s.V[1]};
      CHECK(match_multisets(r.lax_eigenvalues, expected).max_distance < 1e-10);
    }
  }
  SUBCASE("perturbed roots are detected") {
    const ChainSpec s = random_spec(2, 2, 7);
    const Complex mu = quadratic_mu(s)[0] + 1e-2;
    const DualityReport r = verify_duality(s, BetheRoots{{1}, {{mu}}}, 1.0, 1e-9);
    CHECK(r.max_match_distance > 1e-4);
    CHECK(r.status == "unverified-roots");
  }
  SUBCASE("eta invariance") {
    const ChainSpec s = random_spec(2, 2, 9);
    const BetheRoots roots{{1}, {{quadratic_mu(s)[1]}}};
    const DualityReport a = verify_duality(s, roots, 1.0, 1e-9);
    for (Complex eta : {Complex{2.0}, Complex{0.5, 0.5}}) {
      const DualityReport b = verify_duality(s, roots, eta, 1e-9);
      CHECK(match_multisets(a.lax_eigenvalues, b.lax_eigenvalues).max_distance < 1e-12);
    }
  }
  SUBCASE("H-value entry point") {
    const ChainSpec s = random_spec(2, 3, 11);
    const auto h = hamiltonian_eigenvalues(s, vacuum_roots(2));
    const DualityReport r = verify_duality(s, std::vector<int>{0}, h, 1.0, 1e-9);
    CHECK(r.status == "verified");
    CHECK_FALSE(r.roots.has_value());
    auto wrong = h;
    wrong[0] += 0.1;
    CHECK(verify_duality(s, std::vector<int>{0}, wrong, 1.0, 1e-9).status == "failed");
  }
  SUBCASE("non-monotone occupations") {
    const ChainSpec s = random_spec(3, 3, 13);
    const BetheRoots r{{0, 1}, {{}, {Complex{0.2, 0.3}}}};
    CHECK_THROWS_AS(verify_duality(s, r, 1.0, 1e-9), Error);
  }
}

TEST_CASE("build_identity_pair") {
  const Complex hbar{0.3, 0.1}, g{0.8, -0.3};
  SUBCASE("empty y") {
    const std::vector<Complex> x{Complex{0.2, 0.1}, Complex{-0.5, 0.3}};
    const MatrixPair p = build_identity_pair(x, std::vector<Complex>{}, g, hbar);
    CHECK(p.L_tilde.rows() == 0);
    CHECK(std::abs(p.L(0, 1) - g * std::sinh(hbar) / std::sinh(x[0] - x[1] + hbar) * std::sinh(x[1] - x[0] + hbar) /
                                  std::sinh(x[1] - x[0])) < 1e-14);
  }
  SUBCASE("single x") {
    const MatrixPair p = build_identity_pair(std::vector<Complex>{Complex{0.4, 0.2}}, std::vector<Complex>{}, g, hbar);
    CHECK(std::abs(p.L(0, 0) - g) < 1e-15);
  }
  SUBCASE("two by one entrywise") {
    Rng rng(17);
    const auto x = rng.separated(2, 1.0, 0.3);
    const std::vector<Complex> y{rng.box()};
    const MatrixPair p = build_identity_pair(x, y, g, hbar);
    auto sh = [](Complex z) { return std::sinh(z); };
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        const std::size_t k = 1 - j;
        const Complex e = g * sh(hbar) / sh(x[i] - x[j] + hbar) * sh(x[j] - x[k] + hbar) / sh(x[j] - x[k]) *
                          sh(x[j] - y[0]) / sh(x[j] - y[0] + hbar);
        CHECK(std::abs(p.L(i, j) - e) < 1e-13 * (1.0 + std::abs(e)));
      }
    const Complex lt = g * sh(y[0] - x[0]) / sh(y[0] - x[0] - hbar) * sh(y[0] - x[1]) / sh(y[0] - x[1] - hbar);
    CHECK(std::abs(p.L_tilde(0, 0) - lt) < 1e-13 * (1.0 + std::abs(lt)));
  }
  SUBCASE("singular locus") {
    const std::vector<Complex> x{Complex{0.2, 0.1}, Complex{0.2, 0.1}};
    try {
      build_identity_pair(x, std::vector<Complex>{}, g, hbar);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::singular_configuration);
      CHECK(std::string(e.what()).find("(1, 2)") != std::string::npos);
    }
    CHECK_THROWS_AS(build_identity_pair(std::vector<Complex>{0.1}, std::vector<Complex>{0.2, 0.3}, g, hbar), Error);
  }
}

TEST_CASE("determinant identity") {
  const Complex hbar{0.3, 0.1};
  SUBCASE("empty y reduces to the shift matrix") {
    Rng rng(19);
    const auto x = rng.separated(3, 1.0, 0.3);
    const Complex g{0.7, 0.2};
    const MatrixPair p = build_identity_pair(x, std::vector<Complex>{}, g, hbar);
    std::vector<Complex> expected{g * std::exp(2.0 * hbar), g, g * std::exp(-2.0 * hbar)};
    CHECK(match_multisets(eigenvalues(p.L), expected).max_distance < 1e-10);
    CHECK(det_identity_check(x, std::vector<Complex>{}, g, hbar) < 1e-10);
  }
  SUBCASE("equal sizes share the spectrum") {
    Rng rng(23);
    const auto pts = rng.separated(6, 1.0, 0.25);
    const std::vector<Complex> x(pts.begin(), pts.begin() + 3), y(pts.begin() + 3, pts.end());
    const MatrixPair p = build_identity_pair(x, y, 1.1, hbar);
    CHECK(match_multisets(eigenvalues(p.L), eigenvalues(p.L_tilde)).max_distance < 1e-9);
  }
  SUBCASE("fuzz against principal minors") {
    Rng rng(29);
    double worst = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
      const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform(0.0, 5.999));
      const std::size_t m = static_cast<std::size_t>(rng.uniform(0.0, n + 0.999));
      const auto pts = rng.separated(n + m, 1.0, 0.15);
      const std::vector<Complex> x(pts.begin(), pts.begin() + n), y(pts.begin() + n, pts.end());
      const Complex g = rng.disk(1.5);
      const MatrixPair p = build_identity_pair(x, y, g, hbar);
      std::vector<Complex> rhs = testing::char_poly_by_minors(p.L_tilde);
      for (std::size_t i = 1; i <= n - m; ++i)
        rhs = poly_mul(rhs, {-g * std::exp(-(2.0 * i - 1.0 - static_cast<double>(n - m)) * hbar), 1.0});
      worst = std::max(worst, poly_deviation(testing::char_poly_by_minors(p.L), rhs));
      CHECK(det_identity_check(x, y, g, hbar) <= 1e-9);
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("Gaudin determinant identity") {
  SUBCASE("two sites without y") {
    const std::vector<Complex> x{Complex{0.3, 0.2}, Complex{-0.4, 0.1}};
    const Complex omega{0.5, -0.2}, nu{0.3, 0.15};
    const MatrixPair p = build_gaudin_pair(x, std::vector<Complex>{}, omega, nu);
    CHECK(match_multisets(eigenvalues(p.L), std::vector<Complex>{omega - nu, omega + nu}).max_distance < 1e-12);
  }
  SUBCASE("fuzz") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform(0.0, 5.999));
      const std::size_t m = static_cast<std::size_t>(rng.uniform(0.0, n + 0.999));
      const auto pts = rng.separated(n + m, 1.0, 0.15);
      const std::vector<Complex> x(pts.begin(), pts.begin() + n), y(pts.begin() + n, pts.end());
      CHECK(gaudin_identity_check(x, y, rng.box(), rng.disk(0.6)) <= 1e-9);
    }
  }
}

TEST_CASE("cauchy_det_closed_form") {
  const Complex hbar{0.3, 0.1};
  auto matrix = [&](const std::vector<Complex>& q) {
    CMatrix a(q.size(), q.size());
    for (std::size_t i = 0; i < q.size(); ++i)
      for (std::size_t j = 0; j < q.size(); ++j) a(i, j) = std::sinh(hbar) / std::sinh(q[i] - q[j] + hbar);
    return a;
  };
  CHECK(std::abs(cauchy_det_closed_form(std::vector<Complex>{Complex{0.3, 0.4}}, hbar) - 1.0) < 1e-15);
  Rng rng(37);
  for (std::size_t k : {2u, 3u, 4u}) {
    const auto q = rng.separated(k, 1.0, 0.3);
    const Complex oracle = testing::cofactor_det(matrix(q));
    CHECK(std::abs(cauchy_det_closed_form(q, hbar) - oracle) < 1e-10 * std::abs(oracle));
  }
  const std::vector<Complex> q2{Complex{0.1, 0.2}, Complex{-0.3, 0.5}};
  CHECK(std::abs(cauchy_det_closed_form(q2, hbar) - cauchy_factor(q2[0] - q2[1], hbar)) < 1e-15);
  CHECK(std::abs(cauchy_factor(0.37, hbar) - cauchy_factor(-0.37, hbar)) < 1e-15);
}

TEST_CASE("spectral_equations_check") {
  SUBCASE("vacuum") {
    const ChainSpec s = random_spec(2, 2, 41);
    const auto h = hamiltonian_eigenvalues(s, vacuum_roots(2));
    const auto lambda = predicted_string_spectrum(s, std::vector<int>{0}).values;
    const auto res = spectral_equations_check(s, h, lambda);
    REQUIRE(res.size() == 2);
    CHECK(res[0] < 1e-12);
    CHECK(res[1] < 1e-12);
    // Both sides of the k = 2 equation by hand.
    const Complex lhs = h[0] * h[1] * cauchy_factor(s.q[0] - s.q[1], s.hbar);
    const Complex rhs = std::sinh(s.hbar) * std::sinh(s.hbar) * lambda[0] * lambda[1];
    CHECK(std::abs(lhs - rhs) < 1e-10);
    // k = 1 is the second sum rule.
    CHECK(std::abs(h[0] + h[1] - s.V[0] * std::sinh(2.0 * s.hbar)) < 1e-12);
  }
  SUBCASE("wrong spectrum") {
    const ChainSpec s = random_spec(2, 3, 43);
    const auto h = hamiltonian_eigenvalues(s, vacuum_roots(2));
    Rng rng(44);
    const auto res = spectral_equations_check(s, h, rng.boxes(3));
    CHECK(*std::max_element(res.begin(), res.end()) > 1e-3);
  }
  SUBCASE("geometric sum identity") {
    const ChainSpec s = random_spec(3, 5, 47);
    const std::vector<int> occ{3, 1};
    const auto p = predicted_string_spectrum(s, occ);
    Complex lhs = 0.0, rhs = 0.0;
    for (const auto& v : p.values) lhs += v;
    const WeightVector w = weights_from_occupations(5, occ);
    for (std::size_t a = 0; a < 3; ++a) rhs += s.V[a] * std::sinh(s.hbar * static_cast<double>(w.M[a])) / std::sinh(s.hbar);
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}
