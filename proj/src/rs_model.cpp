#include "qcd/rs_model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "qcd/error.hpp"

namespace qcd {

namespace {

constexpr double kCollision = 1e-12;
constexpr double kFlowCollision = 1e-8;

void require_sizes(std::span<const Complex> a, std::span<const Complex> b, const char* op) {
  if (a.size() != b.size()) {
    std::ostringstream msg;
    msg << op << ": length mismatch (" << a.size() << " vs " << b.size() << ")";
    throw Error(ErrorCode::dimension, msg.str());
  }
}

[[noreturn]] void collision(const char* what, std::size_t i, std::size_t j) {
  std::ostringstream msg;
  msg << "singular configuration: " << what << " vanishes for pair (" << i + 1 << ", " << j + 1
      << ")";
  throw Error(ErrorCode::singular_configuration, msg.str());
}

Complex checked_sinh(Complex x, const char* what, std::size_t i, std::size_t j) {
  const Complex s = std::sinh(x);
  if (std::abs(s) < kCollision) collision(what, i, j);
  return s;
}

// prod_{k != j} sinh(q_j - q_k - eta nu) / sinh(q_j - q_k)
Complex velocity_factor(Complex hbar, std::span<const Complex> q, std::size_t j) {
  Complex f = 1.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (k == j) continue;
    f *= std::sinh(q[j] - q[k] - hbar) / checked_sinh(q[j] - q[k], "sinh(q_j - q_k)", j, k);
  }
  return f;
}

Complex coth(Complex x) { return std::cosh(x) / std::sinh(x); }

}  // namespace

RSParams::RSParams(Complex eta, Complex nu) : eta_(eta), nu_(nu) {
  require_finite(eta, "eta");
  require_finite(nu, "nu");
  if (std::abs(eta) == 0.0) throw Error(ErrorCode::invalid_argument, "RSParams: eta must be nonzero");
  if (std::abs(std::sinh(eta * nu)) < kCollision)
    throw Error(ErrorCode::invalid_argument,
                "RSParams: sinh(eta nu) vanishes (eta nu = i pi k is excluded)");
}

void validate_coordinates(const RSParams& params, std::span<const Complex> q) {
  const Complex hbar = params.hbar();
  for (std::size_t i = 0; i < q.size(); ++i) {
    require_finite(q[i], "coordinate");
    for (std::size_t j = i + 1; j < q.size(); ++j) {
      const Complex d = q[i] - q[j];
      checked_sinh(d, "sinh(q_i - q_j)", i, j);
      checked_sinh(d + hbar, "sinh(q_i - q_j + eta nu)", i, j);
      checked_sinh(d - hbar, "sinh(q_i - q_j - eta nu)", i, j);
    }
  }
}

void validate_state(const RSParams& params, const RSState& state) {
  if (!state.p && !state.qdot)
    throw Error(ErrorCode::invalid_argument, "RSState: momenta or velocities required");
  if (state.p && state.p->size() != state.q.size())
    throw Error(ErrorCode::dimension, "RSState: momenta length differs from coordinates");
  if (state.qdot && state.qdot->size() != state.q.size())
    throw Error(ErrorCode::dimension, "RSState: velocities length differs from coordinates");
  validate_coordinates(params, state.q);
}

CMatrix lax_from_velocities(const RSParams& params, std::span<const Complex> q,
                            std::span<const Complex> qdot) {
  require_sizes(q, qdot, "lax_from_velocities");
  const std::size_t n = q.size();
  const Complex hbar = params.hbar();
  const Complex sh = std::sinh(hbar);
  CMatrix l(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      l(i, j) = sh / checked_sinh(q[i] - q[j] + hbar, "sinh(q_i - q_j + eta nu)", i, j) * qdot[j] /
                params.eta();
  return l;
}

CMatrix lax_from_momenta(const RSParams& params, std::span<const Complex> q,
                         std::span<const Complex> p) {
  require_sizes(q, p, "lax_from_momenta");
  const std::size_t n = q.size();
  const Complex hbar = params.hbar();
  const Complex sh = std::sinh(hbar);
  CMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const Complex column = std::exp(params.eta() * p[j]) * velocity_factor(hbar, q, j);
    for (std::size_t i = 0; i < n; ++i)
      l(i, j) = sh / checked_sinh(q[i] - q[j] + hbar, "sinh(q_i - q_j + eta nu)", i, j) * column;
  }
  return l;
}

std::vector<Complex> velocities(const RSParams& params, std::span<const Complex> q,
                                std::span<const Complex> p) {
  require_sizes(q, p, "velocities");
  std::vector<Complex> v(q.size());
  for (std::size_t j = 0; j < q.size(); ++j)
    v[j] = params.eta() * std::exp(params.eta() * p[j]) * velocity_factor(params.hbar(), q, j);
  return v;
}

Complex rs_hamiltonian(const RSParams& params, std::span<const Complex> q,
                       std::span<const Complex> p) {
  require_sizes(q, p, "rs_hamiltonian");
  Complex h = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j)
    h += std::exp(params.eta() * p[j]) * velocity_factor(params.hbar(), q, j);
  return h;
}

CMatrix shift_matrix(std::size_t n, Complex zeta) {
  CMatrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double power = 2.0 * static_cast<double>(i + 1) - 1.0 - static_cast<double>(n);
    s(i, i) = std::exp(-power * zeta);
  }
  return s;
}

CMatrix factorized_lax(const RSParams& params, std::span<const Complex> q,
                       std::span<const Complex> p, Complex eps) {
  require_sizes(q, p, "factorized_lax");
  validate_coordinates(params, q);
  const std::size_t n = q.size();
  auto vandermonde = [&](Complex e) {
    CMatrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const double power = 2.0 * static_cast<double>(i + 1) - 1.0 - static_cast<double>(n);
      for (std::size_t j = 0; j < n; ++j) v(i, j) = std::exp(power * (q[j] + e));
    }
    return v;
  };
  const CMatrix v_eps = vandermonde(eps);
  const double cond = condition_number(v_eps);
  if (!(cond <= 1e10)) {
    std::ostringstream msg;
    msg << "factorized_lax: Vandermonde matrix ill-conditioned (cond " << cond
        << "); choose a different epsilon";
    throw Error(ErrorCode::degenerate_epsilon, msg.str());
  }
  const CMatrix ratio = LuFactorization(v_eps).solve(vandermonde(eps - params.hbar()));

  std::vector<Complex> d(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) d[j] *= std::sinh(q[j] - q[k]);

  CMatrix l(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      l(i, j) = d[i] * ratio(i, j) / d[j] * std::exp(params.eta() * p[j]);
  return l;
}

CMatrix b_matrix(const RSParams& params, std::span<const Complex> q,
                 std::span<const Complex> qdot) {
  require_sizes(q, qdot, "b_matrix");
  validate_coordinates(params, q);
  const std::size_t n = q.size();
  const Complex hbar = params.hbar();
  CMatrix b(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    Complex diag = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (l != j) diag -= qdot[l] * coth(q[j] - q[l]);
      diag += qdot[l] * coth(q[j] - q[l] + hbar);
    }
    b(j, j) = diag;
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) b(j, k) = qdot[k] / std::sinh(q[j] - q[k]);
  }
  return b;
}

std::vector<Complex> accelerations(const RSParams& params, std::span<const Complex> q,
                                   std::span<const Complex> qdot, FlowRegime regime) {
  require_sizes(q, qdot, "accelerations");
  const std::size_t n = q.size();
  const Complex hbar = params.hbar();
  if (regime == FlowRegime::half_period &&
      std::abs(hbar - Complex{0.0, std::numbers::pi / 2}) > 1e-12) {
    throw Error(ErrorCode::regime_mismatch,
                "accelerations: half-period regime requires eta nu = i pi / 2");
  }
  const Complex sh2 = std::sinh(hbar) * std::sinh(hbar);
  std::vector<Complex> acc(n, Complex{});
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      const Complex x = q[j] - q[k];
      const Complex s = checked_sinh(x, "sinh(q_j - q_k)", j, k);
      const Complex vv = qdot[j] * qdot[k];
      switch (regime) {
        case FlowRegime::generic:
          acc[j] -= 2.0 * vv * sh2 * std::cosh(x) / (std::sinh(x - hbar) * s * std::sinh(x + hbar));
          break;
        case FlowRegime::infinite_coupling:
          acc[j] += 2.0 * vv * std::cosh(x) / s;
          break;
        case FlowRegime::half_period:
          acc[j] += 4.0 * vv / std::sinh(2.0 * x);
          break;
      }
    }
  }
  return acc;
}

double Trajectory::max_drift() const {
  double d = 0.0;
  for (const auto& s : samples) d = std::max(d, s.eigenvalue_drift);
  return d;
}

namespace {

using StateVec = std::vector<Complex>;  // q followed by qdot

StateVec flow_rhs(const RSParams& params, const StateVec& y, FlowRegime regime) {
  const std::size_t n = y.size() / 2;
  std::span<const Complex> q(y.data(), n), qdot(y.data() + n, n);
  StateVec dy(2 * n);
  std::copy(qdot.begin(), qdot.end(), dy.begin());
  const auto acc = accelerations(params, q, qdot, regime);
  std::copy(acc.begin(), acc.end(), dy.begin() + static_cast<std::ptrdiff_t>(n));
  return dy;
}

StateVec axpy(const StateVec& y, Complex a, const StateVec& x) {
  StateVec r(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] + a * x[i];
  return r;
}

StateVec rk4_step(const RSParams& params, const StateVec& y, double h, FlowRegime regime) {
  const auto k1 = flow_rhs(params, y, regime);
  const auto k2 = flow_rhs(params, axpy(y, 0.5 * h, k1), regime);
  const auto k3 = flow_rhs(params, axpy(y, 0.5 * h, k2), regime);
  const auto k4 = flow_rhs(params, axpy(y, h, k3), regime);
  StateVec r(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    r[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return r;
}

void check_collision(const StateVec& y, double t) {
  const std::size_t n = y.size() / 2;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(std::sinh(y[i] - y[j])) < kFlowCollision) {
        std::ostringstream msg;
        msg << "flow singularity: particles " << i + 1 << " and " << j + 1 << " collide near t = "
            << t;
        throw FlowSingularityError(msg.str(), t);
      }
}

FlowSample make_sample(const RSParams& params, const StateVec& y, double t,
                       const std::vector<Complex>* reference) {
  const std::size_t n = y.size() / 2;
  FlowSample s;
  s.t = t;
  s.q.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
  s.qdot.assign(y.begin() + static_cast<std::ptrdiff_t>(n), y.end());
  s.lax_eigenvalues = eigenvalues(lax_from_velocities(params, s.q, s.qdot));
  s.eigenvalue_drift = reference ? match_multisets(s.lax_eigenvalues, *reference).max_distance : 0.0;
  return s;
}

}  // namespace

Trajectory integrate_flow(const RSParams& params, const RSState& initial,
                          const FlowConfig& config) {
  if (!initial.qdot) throw Error(ErrorCode::invalid_argument, "integrate_flow: initial velocities required");
  if (initial.qdot->size() != initial.q.size())
    throw Error(ErrorCode::dimension, "integrate_flow: velocities length differs from coordinates");
  if (!(config.t_end >= 0.0) || !(config.dt > 0.0) || config.samples == 0)
    throw Error(ErrorCode::invalid_argument, "integrate_flow: need t_end >= 0, dt > 0, samples > 0");

  const std::size_t n = initial.q.size();
  StateVec y(2 * n);
  std::copy(initial.q.begin(), initial.q.end(), y.begin());
  std::copy(initial.qdot->begin(), initial.qdot->end(), y.begin() + static_cast<std::ptrdiff_t>(n));
  check_collision(y, 0.0);
  validate_coordinates(params, initial.q);

  Trajectory traj;
  traj.samples.push_back(make_sample(params, y, 0.0, nullptr));
  const std::vector<Complex> reference = traj.samples.front().lax_eigenvalues;

  double t = 0.0;
  double h = config.dt;
  for (std::size_t s = 1; s <= config.samples; ++s) {
    const double target = config.t_end * static_cast<double>(s) / static_cast<double>(config.samples);
    if (!config.adaptive) {
      const double span = target - t;
      const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / config.dt - 1e-9)));
      const double step = span / static_cast<double>(steps);
      for (std::size_t k = 0; k < steps; ++k) {
        y = rk4_step(params, y, step, config.regime);
        t += step;
        check_collision(y, t);
      }
    } else {
      while (t < target) {
        const bool last = t + h >= target;
        const double step = last ? target - t : h;
        const auto full = rk4_step(params, y, step, config.regime);
        const auto half = rk4_step(params, rk4_step(params, y, 0.5 * step, config.regime), 0.5 * step,
                                   config.regime);
        double err = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
          err = std::max(err, std::abs(full[i] - half[i]) / 15.0);
        if (err <= config.step_tolerance || step < 1e-14) {
          // Richardson-corrected accept.
          for (std::size_t i = 0; i < y.size(); ++i) y[i] = half[i] + (half[i] - full[i]) / 15.0;
          t = last ? target : t + step;
          check_collision(y, t);
        }
        const double factor =
            err == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(config.step_tolerance / err, 0.2), 0.2, 4.0);
        if (!last || err > config.step_tolerance) h = std::max(step * factor, 1e-14);
      }
    }
    t = target;
    traj.samples.push_back(make_sample(params, y, t, &reference));
  }
  return traj;
}

double lax_pair_residual(const RSParams& params, const Trajectory& trajectory,
                         std::size_t index) {
  const auto& s = trajectory.samples;
  if (index == 0 || index + 1 >= s.size())
    throw Error(ErrorCode::invalid_argument, "lax_pair_residual: index must be interior");
  const double h = 0.5 * (s[index + 1].t - s[index - 1].t);
  CMatrix deriv = lax_from_velocities(params, s[index + 1].q, s[index + 1].qdot) -
                  lax_from_velocities(params, s[index - 1].q, s[index - 1].qdot);
  deriv *= Complex{1.0 / (2.0 * h)};
  const CMatrix l = lax_from_velocities(params, s[index].q, s[index].qdot);
  const CMatrix b = b_matrix(params, s[index].q, s[index].qdot);
  return (deriv - commutator(b, l)).max_abs();
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const std::size_t n = trajectory.samples.empty() ? 0 : trajectory.samples.front().q.size();
  out << "t";
  for (std::size_t j = 1; j <= n; ++j) out << ",re_q" << j << ",im_q" << j;
  for (std::size_t j = 1; j <= n; ++j) out << ",re_qdot" << j << ",im_qdot" << j;
  out << ",eigenvalue_drift\n";
  out << std::setprecision(17);
  for (const auto& s : trajectory.samples) {
    out << s.t;
    for (const auto& z : s.q) out << ',' << z.real() << ',' << z.imag();
    for (const auto& z : s.qdot) out << ',' << z.real() << ',' << z.imag();
    out << ',' << s.eigenvalue_drift << '\n';
  }
}

}  // namespace qcd
