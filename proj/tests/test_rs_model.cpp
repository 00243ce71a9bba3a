#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "qcd/error.hpp"
#include "qcd/rs_model.hpp"
#include "test_support.hpp"

using namespace qcd;
using qcd::testing::Rng;

namespace {

const Complex I{0.0, 1.0};

std::vector<Complex> p_zero_spectrum(std::size_t n, Complex hbar) {
  std::vector<Complex> s;
  for (std::size_t i = 1; i <= n; ++i)
    s.push_back(std::exp((2.0 * static_cast<double>(i) - 1.0 - static_cast<double>(n)) * hbar));
  return s;
}

// Complexified initial data that stays collision-free up to t = 5.
RSState flow_data_3() {
  RSState s;
  s.q = {Complex{-1.2, 0.1}, Complex{0.1, -0.05}, Complex{1.4, 0.03}};
  s.qdot = std::vector<Complex>{Complex{0.5, 0.05}, Complex{0.3, -0.02}, Complex{0.45, 0.01}};
  return s;
}

}  // namespace

TEST_CASE("RSParams validation") {
  CHECK_THROWS_AS(RSParams(1.0, 0.0), Error);
  CHECK_THROWS_AS(RSParams(1.0, Complex{0.0, std::numbers::pi}), Error);
  const RSParams p(2.0, Complex{0.1, 0.2});
  CHECK(std::abs(p.hbar() - Complex{0.2, 0.4}) < 1e-16);
}

TEST_CASE("lax_from_velocities") {
  const RSParams params(Complex{0.7, 0.1}, Complex{0.5, -0.2});
  SUBCASE("single particle") {
    const std::vector<Complex> q{Complex{0.3, 0.2}}, v{Complex{1.1, -0.4}};
    const CMatrix l = lax_from_velocities(params, q, v);
    CHECK(std::abs(l(0, 0) - v[0] / params.eta()) < 1e-15);
  }
  SUBCASE("zero velocities") {
    const std::vector<Complex> q{0.1, Complex{0.9, 0.3}}, v{0.0, 0.0};
    CHECK(lax_from_velocities(params, q, v).max_abs() == 0.0);
  }
  SUBCASE("entrywise scalar formula and trace") {
    Rng rng(21);
    const auto q = rng.separated(3, 1.0, 0.3);
    const auto v = rng.boxes(3);
    const CMatrix l = lax_from_velocities(params, q, v);
    Complex tr = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        const Complex h = params.eta() * params.nu();
        const Complex e = std::sinh(h) / std::sinh(q[i] - q[j] + h) / params.eta() * v[j];
        CHECK(std::abs(l(i, j) - e) < 1e-14);
      }
      tr += v[i];
    }
    CHECK(std::abs(l.trace() - tr / params.eta()) < 1e-14);
  }
  SUBCASE("collision is reported") {
    const std::vector<Complex> q{0.2, 0.2 + params.hbar()}, v{1.0, 1.0};
    CHECK_THROWS_AS(lax_from_velocities(params, q, v), Error);
  }
}

TEST_CASE("lax_from_momenta") {
  const RSParams params(Complex{0.9, -0.1}, Complex{0.4, 0.25});
  const Complex hbar = params.hbar();
  SUBCASE("single particle") {
    const std::vector<Complex> q{Complex{0.3, 0.2}}, p{Complex{0.5, 0.5}};
    CHECK(std::abs(lax_from_momenta(params, q, p)(0, 0) - std::exp(params.eta() * p[0])) < 1e-15);
  }
  SUBCASE("two particles at P = 0") {
    const std::vector<Complex> q{Complex{0.2, 0.1}, Complex{-0.7, 0.4}}, p{0.0, 0.0};
    const auto ev = eigenvalues(lax_from_momenta(params, q, p));
    CHECK(match_multisets(ev, p_zero_spectrum(2, hbar)).max_distance < 1e-12);
  }
  SUBCASE("four particles at P = 0, two coordinate sets") {
    Rng rng(22);
    for (int set = 0; set < 2; ++set) {
      const auto q = rng.separated(4, 1.0, 0.3);
      const std::vector<Complex> p(4, 0.0);
      const auto ev = eigenvalues(lax_from_momenta(params, q, p));
      CHECK(match_multisets(ev, p_zero_spectrum(4, hbar)).max_distance < 1e-9);
    }
  }
  SUBCASE("agrees with the velocity form") {
    Rng rng(23);
    for (std::size_t n = 1; n <= 5; ++n) {
      const auto q = rng.separated(n, 1.0, 0.3);
      const auto p = rng.boxes(n, 0.5);
      const CMatrix a = lax_from_momenta(params, q, p);
      const CMatrix b = lax_from_velocities(params, q, velocities(params, q, p));
      CHECK((a - b).max_abs() <= 1e-12 * std::max(1.0, a.max_abs()));
    }
  }
}

TEST_CASE("P = 0 spectrum for N = 2..6 is independent of q") {
  const RSParams params(1.0, Complex{0.3, 0.1});
  Rng rng(24);
  for (std::size_t n = 2; n <= 6; ++n) {
    for (int set = 0; set < 5; ++set) {
      const auto q = rng.separated(n, 1.0, 0.25);
      const std::vector<Complex> p(n, 0.0);
      const auto ev = eigenvalues(lax_from_momenta(params, q, p));
      CHECK(match_multisets(ev, p_zero_spectrum(n, params.hbar())).max_distance <= 1e-9);
    }
  }
}

TEST_CASE("velocities and Hamiltonian") {
  const RSParams params(Complex{0.6, 0.2}, Complex{0.5, -0.1});
  const Complex hbar = params.hbar();
  SUBCASE("single particle") {
    const std::vector<Complex> q{0.4}, p{Complex{0.1, 0.3}};
    CHECK(std::abs(velocities(params, q, p)[0] - params.eta() * std::exp(params.eta() * p[0])) < 1e-15);
    CHECK(std::abs(rs_hamiltonian(params, q, p) - std::exp(params.eta() * p[0])) < 1e-15);
  }
  SUBCASE("two particles at P = 0") {
    const std::vector<Complex> q{Complex{0.3, 0.1}, Complex{-0.4, 0.2}}, p{0.0, 0.0};
    const auto v = velocities(params, q, p);
    for (std::size_t j = 0; j < 2; ++j) {
      const std::size_t k = 1 - j;
      const Complex f = std::sinh(q[j] - q[k] - hbar) / std::sinh(q[j] - q[k]);
      CHECK(std::abs(v[j] - params.eta() * f) < 1e-15);
    }
    const Complex h = std::sinh(q[0] - q[1] - hbar) / std::sinh(q[0] - q[1]) +
                      std::sinh(q[1] - q[0] - hbar) / std::sinh(q[1] - q[0]);
    CHECK(std::abs(rs_hamiltonian(params, q, p) - h) < 1e-15);
  }
  SUBCASE("qdot_j is the p_j-derivative of H (central differences)") {
    Rng rng(25);
    for (int trial = 0; trial < 10; ++trial) {
      const auto q = rng.separated(3, 1.0, 0.3);
      const auto p = rng.boxes(3, 0.5);
      const auto v = velocities(params, q, p);
      const double step = 1e-5;
      for (std::size_t j = 0; j < 3; ++j) {
        auto pp = p, pm = p;
        pp[j] += step;
        pm[j] -= step;
        const Complex fd = (rs_hamiltonian(params, q, pp) - rs_hamiltonian(params, q, pm)) / (2.0 * step);
        CHECK(std::abs(fd - v[j]) <= 1e-6 * std::abs(v[j]));
      }
      CHECK(std::abs(rs_hamiltonian(params, q, p) - lax_from_momenta(params, q, p).trace()) < 1e-12);
    }
  }
}

TEST_CASE("factorized Lax matrix") {
  const RSParams params(Complex{0.8, 0.1}, Complex{0.45, 0.2});
  SUBCASE("single particle") {
    const std::vector<Complex> q{0.3}, p{Complex{0.2, -0.1}};
    for (Complex eps : {Complex{0.1}, Complex{0.5, 0.5}})
      CHECK(std::abs(factorized_lax(params, q, p, eps)(0, 0) - std::exp(params.eta() * p[0])) < 1e-14);
  }
  SUBCASE("epsilon drops out") {
    Rng rng(26);
    const auto q = rng.separated(3, 1.0, 0.3);
    const auto p = rng.boxes(3, 0.5);
    const CMatrix a = factorized_lax(params, q, p, Complex{0.3});
    const CMatrix b = factorized_lax(params, q, p, Complex{0.7, 0.2});
    CHECK((a - b).max_abs() < 1e-9);
  }
  SUBCASE("P = 0 eigenvalues are the diagonal of S") {
    Rng rng(27);
    const auto q = rng.separated(4, 1.0, 0.3);
    const std::vector<Complex> p(4, 0.0);
    const auto ev = eigenvalues(factorized_lax(params, q, p));
    const CMatrix s = shift_matrix(4, params.hbar());
    std::vector<Complex> diag;
    for (std::size_t i = 0; i < 4; ++i) diag.push_back(s(i, i));
    CHECK(match_multisets(ev, diag).max_distance < 1e-9);
  }
  SUBCASE("matches the explicit form on 50 random configurations") {
    Rng rng(28);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 1 + static_cast<std::size_t>(trial % 5);
      const auto q = rng.separated(n, 1.0, 0.25);
      const auto p = rng.boxes(n, 0.5);
      const Complex eps = rng.box();
      const CMatrix a = factorized_lax(params, q, p, eps);
      const CMatrix b = lax_from_momenta(params, q, p);
      CHECK((a - b).max_abs() <= 1e-9 * std::max(1.0, b.max_abs()));
    }
  }
  SUBCASE("near-coincident coordinates give a degenerate Vandermonde matrix") {
    const std::vector<Complex> q{0.0, Complex{1e-11, 1e-11}}, p{0.0, 0.0};
    try {
      (void)factorized_lax(params, q, p);
      FAIL("expected degenerate-epsilon error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::degenerate_epsilon);
    }
  }
}

TEST_CASE("B matrix") {
  const RSParams params(Complex{0.8, 0.1}, Complex{0.45, 0.2});
  const Complex hbar = params.hbar();
  SUBCASE("single particle") {
    const std::vector<Complex> q{0.1}, v{Complex{0.7, 0.2}};
    const CMatrix b = b_matrix(params, q, v);
    CHECK(std::abs(b(0, 0) - v[0] * std::cosh(hbar) / std::sinh(hbar)) < 1e-14);
  }
  SUBCASE("unit velocities give the antisymmetric 1/sinh pattern") {
    const std::vector<Complex> q{Complex{0.3, 0.1}, Complex{-0.5, 0.2}}, v{1.0, 1.0};
    const CMatrix b = b_matrix(params, q, v);
    CHECK(std::abs(b(0, 1) - 1.0 / std::sinh(q[0] - q[1])) < 1e-14);
    CHECK(std::abs(b(0, 1) + b(1, 0)) < 1e-14);
    const CMatrix zero = b_matrix(params, q, std::vector<Complex>{0.0, 0.0});
    CHECK(zero.max_abs() == 0.0);
  }
  SUBCASE("L-dot equals [B, L] along the equations of motion") {
    Rng rng(29);
    for (int trial = 0; trial < 5; ++trial) {
      const auto q = rng.separated(3, 1.0, 0.4);
      const auto v = rng.boxes(3);
      const auto a = accelerations(params, q, v);
      const double h = 1e-5;
      std::vector<Complex> qp(3), qm(3), vp(3), vm(3);
      for (std::size_t i = 0; i < 3; ++i) {
        qp[i] = q[i] + h * v[i];
        qm[i] = q[i] - h * v[i];
        vp[i] = v[i] + h * a[i];
        vm[i] = v[i] - h * a[i];
      }
      CMatrix ldot = lax_from_velocities(params, qp, vp) - lax_from_velocities(params, qm, vm);
      ldot *= Complex{1.0 / (2.0 * h)};
      const CMatrix rhs = commutator(b_matrix(params, q, v), lax_from_velocities(params, q, v));
      CHECK((ldot - rhs).max_abs() < 1e-7 * std::max(1.0, rhs.max_abs()));
    }
  }
}

TEST_CASE("accelerations") {
  const RSParams params(Complex{0.8, 0.1}, Complex{0.45, 0.2});
  SUBCASE("trivial cases") {
    CHECK(accelerations(params, std::vector<Complex>{0.3}, std::vector<Complex>{1.0})[0] == Complex{});
    const auto a = accelerations(params, std::vector<Complex>{0.1, 0.9}, std::vector<Complex>{0.0, 0.0});
    CHECK(a[0] == Complex{});
    CHECK(a[1] == Complex{});
  }
  SUBCASE("generic formula at eta nu = i pi / 2 reduces to the 4/sinh(2x) summand") {
    const RSParams half(1.0, Complex{0.0, std::numbers::pi / 2});
    Rng rng(30);
    for (int trial = 0; trial < 5; ++trial) {
      const auto q = rng.separated(3, 1.0, 0.3);
      const auto v = rng.boxes(3);
      const auto g = accelerations(half, q, v, FlowRegime::generic);
      const auto s = accelerations(half, q, v, FlowRegime::half_period);
      // Summand by summand: 4 qdot_j qdot_k / sinh(2 q_jk).
      for (std::size_t j = 0; j < 3; ++j) {
        Complex expect = 0.0;
        for (std::size_t k = 0; k < 3; ++k)
          if (k != j) expect += 4.0 * v[j] * v[k] / std::sinh(2.0 * (q[j] - q[k]));
        CHECK(std::abs(g[j] - expect) < 1e-12 * std::max(1.0, std::abs(expect)));
        CHECK(std::abs(s[j] - expect) < 1e-14 * std::max(1.0, std::abs(expect)));
      }
    }
    try {
      (void)accelerations(params, std::vector<Complex>{0.0, 1.0}, std::vector<Complex>{1.0, 1.0},
                          FlowRegime::half_period);
      FAIL("expected regime mismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::regime_mismatch);
    }
  }
  SUBCASE("infinite coupling matches the generic formula at large eta nu") {
    const RSParams strong(1.0, 18.0);
    const std::vector<Complex> q{Complex{0.2, 0.1}, Complex{-0.6, 0.05}, Complex{1.0, -0.1}};
    const std::vector<Complex> v{Complex{0.3, 0.1}, 0.5, Complex{-0.2, 0.4}};
    const auto g = accelerations(strong, q, v, FlowRegime::generic);
    const auto inf = accelerations(strong, q, v, FlowRegime::infinite_coupling);
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(g[j] - inf[j]) < 1e-12);
  }
}

TEST_CASE("integrate_flow") {
  const RSParams params(1.0, Complex{0.4, 0.1});
  SUBCASE("zero velocities are stationary") {
    RSState s{{0.1, Complex{0.8, 0.2}}, std::nullopt, std::vector<Complex>{0.0, 0.0}};
    const auto traj = integrate_flow(params, s, FlowConfig{.t_end = 1.0, .dt = 0.1, .samples = 4});
    for (const auto& sample : traj.samples) {
      CHECK(sample.q == s.q);
      CHECK(sample.eigenvalue_drift == 0.0);
    }
  }
  SUBCASE("two-particle spectrum is conserved") {
    RSState s{{Complex{-0.6, 0.1}, Complex{0.7, -0.05}}, std::nullopt,
              std::vector<Complex>{Complex{0.4, 0.05}, Complex{0.6, -0.03}}};
    FlowConfig cfg{.t_end = 5.0, .dt = 1e-2, .adaptive = true, .step_tolerance = 1e-10, .samples = 25};
    const auto traj = integrate_flow(params, s, cfg);
    CHECK(traj.max_drift() <= 1e-7);
  }
  SUBCASE("three-particle spectrum and trace are conserved") {
    FlowConfig cfg{.t_end = 5.0, .dt = 1e-2, .adaptive = true, .step_tolerance = 1e-10, .samples = 25};
    const auto traj = integrate_flow(params, flow_data_3(), cfg);
    CHECK(traj.max_drift() <= 1e-7);
    const Complex tr0 = lax_from_velocities(params, traj.samples.front().q, traj.samples.front().qdot).trace();
    for (const auto& sample : traj.samples)
      CHECK(std::abs(lax_from_velocities(params, sample.q, sample.qdot).trace() - tr0) <= 1e-9);
  }
  SUBCASE("Lax-pair residual is second order in the sampling step") {
    double previous = 0.0;
    for (int level = 0; level < 3; ++level) {
      const std::size_t samples = 8u << level;  // step 0.25, 0.125, 0.0625 over t_end = 2
      FlowConfig cfg{.t_end = 2.0, .dt = 1e-3, .samples = samples};
      const auto traj = integrate_flow(params, flow_data_3(), cfg);
      const double r = lax_pair_residual(params, traj, samples / 2);
      if (level > 0) {
        const double slope = std::log2(previous / r);
        CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
      }
      previous = r;
    }
  }
  SUBCASE("colliding initial coordinates") {
    RSState s{{0.3, 0.3}, std::nullopt, std::vector<Complex>{1.0, 1.0}};
    CHECK_THROWS_AS(integrate_flow(params, s, FlowConfig{}), FlowSingularityError);
  }
  SUBCASE("CSV export") {
    RSState s{{0.1, 0.9}, std::nullopt, std::vector<Complex>{0.2, 0.1}};
    const auto traj = integrate_flow(params, s, FlowConfig{.t_end = 0.5, .dt = 0.05, .samples = 2});
    std::ostringstream out;
    write_trajectory_csv(out, traj);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,re_q1,im_q1,re_q2,im_q2,re_qdot1,im_qdot1,re_qdot2,im_qdot2,eigenvalue_drift");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 3);
  }
}
