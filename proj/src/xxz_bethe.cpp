#include "qcd/xxz_bethe.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qcd/error.hpp"

namespace qcd {

namespace {

Complex ratio_plus(Complex x, Complex hbar) { return std::sinh(x + hbar) / std::sinh(x); }
Complex ratio_minus(Complex x, Complex hbar) { return std::sinh(x - hbar) / std::sinh(x); }

void check_pole(Complex x, const std::string& what) {
  if (std::abs(std::sinh(x)) < pole_threshold) throw Error(ErrorCode::pole, "pole at " + what);
}

std::string root_name(std::size_t level, std::size_t index) {
  return "mu^" + std::to_string(level + 1) + "_" + std::to_string(index + 1);
}

std::vector<std::size_t> level_offsets(std::span<const int> occupations) {
  std::vector<std::size_t> off(occupations.size() + 1, 0);
  for (std::size_t b = 0; b < occupations.size(); ++b)
    off[b + 1] = off[b] + static_cast<std::size_t>(occupations[b]);
  return off;
}

}  // namespace

void ChainSpec::validate() const {
  if (n < 1) throw Error(ErrorCode::invariant, "rank n must be at least 1");
  if (q.empty()) throw Error(ErrorCode::invariant, "chain needs at least one site");
  if (V.size() != static_cast<std::size_t>(n))
    throw Error(ErrorCode::invariant, "twist V must have exactly n entries");
  require_finite(hbar, "hbar");
  for (const auto& z : q) require_finite(z, "inhomogeneity");
  for (const auto& v : V) require_finite(v, "twist");
  if (std::abs(std::sinh(hbar)) < 1e-12)
    throw Error(ErrorCode::invariant, "hbar must not vanish modulo i pi");
  for (std::size_t a = 0; a < V.size(); ++a) {
    if (std::abs(V[a]) < 1e-14)
      throw Error(ErrorCode::invariant, "twist V_" + std::to_string(a + 1) + " must be nonzero");
    for (std::size_t b = a + 1; b < V.size(); ++b)
      if (std::abs(V[a] - V[b]) <= 1e-12 * std::max(std::abs(V[a]), std::abs(V[b])))
        throw Error(ErrorCode::invariant, "twists must be pairwise distinct: V_" + std::to_string(a + 1) +
                                              " = V_" + std::to_string(b + 1));
  }
  for (std::size_t j = 0; j < q.size(); ++j) {
    for (std::size_t k = j + 1; k < q.size(); ++k) {
      const Complex d = q[k] - q[j];
      const std::string pair = "q_" + std::to_string(k + 1) + " - q_" + std::to_string(j + 1);
      if (std::abs(std::sinh(d)) < pole_threshold)
        throw Error(ErrorCode::invariant, "general position violated: " + pair + " = 0 (mod i pi)");
      if (std::abs(std::sinh(d - hbar)) < pole_threshold)
        throw Error(ErrorCode::invariant, "general position violated: " + pair + " = hbar (mod i pi)");
      if (std::abs(std::sinh(d + hbar)) < pole_threshold)
        throw Error(ErrorCode::invariant, "general position violated: " + pair + " = -hbar (mod i pi)");
    }
  }
}

BetheRoots vacuum_roots(int n) {
  BetheRoots r;
  r.occupations.assign(static_cast<std::size_t>(std::max(n - 1, 0)), 0);
  r.levels.assign(r.occupations.size(), {});
  return r;
}

void validate_roots_shape(const ChainSpec& spec, const BetheRoots& roots) {
  const std::size_t levels = static_cast<std::size_t>(spec.n - 1);
  if (roots.occupations.size() != levels || roots.levels.size() != levels)
    throw Error(ErrorCode::dimension, "expected " + std::to_string(levels) + " root levels");
  for (std::size_t b = 0; b < levels; ++b) {
    if (roots.occupations[b] < 0) throw Error(ErrorCode::invalid_occupations, "negative occupation");
    if (roots.levels[b].size() != static_cast<std::size_t>(roots.occupations[b]))
      throw Error(ErrorCode::dimension, "level " + std::to_string(b + 1) + " holds " +
                                            std::to_string(roots.levels[b].size()) + " roots, occupation says " +
                                            std::to_string(roots.occupations[b]));
    for (const auto& mu : roots.levels[b]) require_finite(mu, "Bethe root");
  }
}

WeightVector weights_from_occupations(std::size_t sites, std::span<const int> occupations) {
  WeightVector w;
  int previous = static_cast<int>(sites);
  for (std::size_t b = 0; b < occupations.size(); ++b) {
    w.M.push_back(previous - occupations[b]);
    previous = occupations[b];
  }
  w.M.push_back(previous);
  for (std::size_t a = 0; a < w.M.size(); ++a)
    if (w.M[a] < 0)
      throw Error(ErrorCode::invalid_occupations, "occupations give negative weight M_" + std::to_string(a + 1));
  return w;
}

std::vector<int> occupations_from_weights(const WeightVector& w) {
  std::vector<int> occ;
  int remaining = 0;
  for (int m : w.M) remaining += m;
  for (std::size_t a = 0; a + 1 < w.M.size(); ++a) {
    remaining -= w.M[a];
    occ.push_back(remaining);
  }
  return occ;
}

bool occupations_monotone(std::size_t sites, std::span<const int> occupations) {
  int previous = static_cast<int>(sites);
  for (int nb : occupations) {
    if (nb < 0 || nb > previous) return false;
    previous = nb;
  }
  return true;
}

std::size_t multinomial(std::span<const int> weights) {
  std::size_t result = 1;
  int total = 0;
  for (int m : weights) {
    for (int k = 1; k <= m; ++k) {
      ++total;
      result = result * static_cast<std::size_t>(total) / static_cast<std::size_t>(k);
    }
  }
  return result;
}

Complex transfer_eigenvalue(const ChainSpec& spec, const BetheRoots& roots, Complex z) {
  validate_roots_shape(spec, roots);
  const Complex h = spec.hbar;
  for (std::size_t k = 0; k < spec.sites(); ++k) check_pole(z - spec.q[k], "q_" + std::to_string(k + 1));
  for (std::size_t b = 0; b < roots.levels.size(); ++b)
    for (std::size_t g = 0; g < roots.levels[b].size(); ++g) check_pole(z - roots.levels[b][g], root_name(b, g));

  Complex first = spec.V[0];
  for (const auto& qk : spec.q) first *= ratio_plus(z - qk, h);
  if (!roots.levels.empty())
    for (const auto& mu : roots.levels[0]) first *= ratio_minus(z - mu, h);

  Complex total = first;
  for (std::size_t b = 1; b < static_cast<std::size_t>(spec.n); ++b) {
    Complex term = spec.V[b];
    for (const auto& mu : roots.levels[b - 1]) term *= ratio_plus(z - mu, h);
    if (b < roots.levels.size())
      for (const auto& mu : roots.levels[b]) term *= ratio_minus(z - mu, h);
    total += term;
  }
  return total;
}

BetheSystem xxz_bethe_system(const ChainSpec& spec, std::span<const int> occupations, Complex upper_scale) {
  const Complex h = std::exp(2.0 * spec.hbar);
  const Complex inv_h = 1.0 / h;
  const auto off = level_offsets(occupations);
  std::vector<Complex> w;
  for (const auto& qk : spec.q) w.push_back(std::exp(2.0 * qk));

  std::vector<Equation> equations;
  std::vector<LocusPair> locus;
  const std::size_t levels = occupations.size();
  for (std::size_t b = 0; b < levels; ++b) {
    const std::size_t n_lower = b == 0 ? spec.sites() : static_cast<std::size_t>(occupations[b - 1]);
    const std::size_t n_upper = b + 1 < levels ? static_cast<std::size_t>(occupations[b + 1]) : 0;
    for (int beta = 0; beta < occupations[b]; ++beta) {
      const int v = static_cast<int>(off[b]) + beta;
      Term left{spec.V[b] * std::exp(-static_cast<double>(n_lower) * spec.hbar), {}};
      Term right{spec.V[b + 1] * std::exp(-static_cast<double>(n_upper) * spec.hbar), {}};
      for (std::size_t l = 0; l < n_lower; ++l) {
        if (b == 0) {
          left.factors.push_back({v, h, -1, -w[l]});
          right.factors.push_back({v, 1.0, -1, -w[l]});
          locus.push_back({v, -1, 1.0, w[l]});
        } else {
          const int lv = static_cast<int>(off[b - 1] + l);
          left.factors.push_back({v, h, lv, -1.0});
          right.factors.push_back({v, 1.0, lv, -1.0});
          locus.push_back({v, lv, 1.0, {}});
        }
      }
      for (int gamma = 0; gamma < occupations[b]; ++gamma) {
        if (gamma == beta) continue;
        const int gv = static_cast<int>(off[b]) + gamma;
        left.factors.push_back({v, 1.0, gv, -h});
        right.factors.push_back({v, h, gv, -1.0});
        locus.push_back({v, gv, inv_h, {}});
        if (gamma > beta) locus.push_back({v, gv, 1.0, {}});
      }
      for (std::size_t u = 0; u < n_upper; ++u) {
        const int uv = static_cast<int>(off[b + 1] + u);
        left.factors.push_back({v, 1.0, uv, -upper_scale});
        right.factors.push_back({v, 1.0, uv, -h * upper_scale});
      }
      equations.push_back({{left}, {right}});
    }
  }
  return BetheSystem(off.back(), std::move(equations), std::move(locus));
}

std::vector<Complex> bethe_residuals(const ChainSpec& spec, const BetheRoots& roots) {
  return bethe_check(spec, roots).residuals;
}

BetheCheck bethe_check(const ChainSpec& spec, const BetheRoots& roots) {
  validate_roots_shape(spec, roots);
  const BetheSystem sys = xxz_bethe_system(spec, roots.occupations);
  const auto x = exponentiate_roots(roots.levels);
  const SystemValue val = sys.evaluate(x);
  BetheCheck out;
  out.residuals = val.normalized;
  out.max_residual = val.max_normalized;
  out.locus_distance = sys.locus_distance(x);
  if (x.empty()) out.locus_distance = std::numeric_limits<double>::infinity();
  out.ratio_residual = out.locus_distance > 0 ? ratio_form_residual(bethe_ratio_sides(spec, roots)) : 1.0;
  return out;
}

double ratio_form_residual(std::span<const RatioSides> sides) {
  double worst = 0.0;
  for (const auto& s : sides) {
    const double scale = std::abs(s.lhs) + std::abs(s.rhs);
    if (scale == 0.0) continue;
    const double r = std::abs(s.lhs - s.rhs) / scale;
    worst = std::max(worst, std::isfinite(r) ? r : 1.0);
  }
  return worst;
}

std::vector<RatioSides> bethe_ratio_sides(const ChainSpec& spec, const BetheRoots& roots) {
  validate_roots_shape(spec, roots);
  const Complex h = spec.hbar;
  std::vector<RatioSides> out;
  const std::size_t levels = roots.levels.size();
  for (std::size_t b = 0; b < levels; ++b) {
    for (std::size_t beta = 0; beta < roots.levels[b].size(); ++beta) {
      const Complex mu = roots.levels[b][beta];
      Complex lhs = spec.V[b], rhs = spec.V[b + 1];
      const auto& lower = b == 0 ? spec.q : roots.levels[b - 1];
      for (const auto& l : lower) lhs *= ratio_plus(mu - l, h);
      for (std::size_t g = 0; g < roots.levels[b].size(); ++g) {
        if (g == beta) continue;
        const Complex d = mu - roots.levels[b][g];
        rhs *= std::sinh(d + h) / std::sinh(d - h);
      }
      if (b + 1 < levels)
        for (const auto& u : roots.levels[b + 1]) rhs *= ratio_minus(mu - u, h);
      out.push_back({lhs, rhs});
    }
  }
  return out;
}

std::vector<Complex> hamiltonian_eigenvalues(const ChainSpec& spec, const BetheRoots& roots) {
  validate_roots_shape(spec, roots);
  const Complex h = spec.hbar;
  const std::size_t n_sites = spec.sites();
  std::vector<Complex> out(n_sites);
  for (std::size_t i = 0; i < n_sites; ++i) {
    Complex value = spec.V[0] * std::sinh(h);
    for (std::size_t k = 0; k < n_sites; ++k)
      if (k != i) value *= ratio_plus(spec.q[i] - spec.q[k], h);
    if (!roots.levels.empty()) {
      for (std::size_t g = 0; g < roots.levels[0].size(); ++g) {
        const Complex d = spec.q[i] - roots.levels[0][g];
        check_pole(d, root_name(0, g) + " = q_" + std::to_string(i + 1));
        value *= ratio_minus(d, h);
      }
    }
    out[i] = value;
  }
  return out;
}

std::vector<Complex> coth_sample_points(std::span<const Complex> q, double radius, double phase) {
  Complex centroid = 0.0;
  for (const auto& z : q) centroid += z;
  centroid /= static_cast<double>(q.size());
  const std::size_t m = q.size() + 1;
  std::vector<Complex> pts;
  for (std::size_t s = 0; s < m; ++s) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(m) + phase;
    pts.push_back(centroid + radius * std::exp(Complex{0.0, angle}));
  }
  return pts;
}

CMatrix coth_basis(std::span<const Complex> q, std::span<const Complex> points) {
  CMatrix a(points.size(), q.size() + 1);
  for (std::size_t s = 0; s < points.size(); ++s) {
    a(s, 0) = 1.0;
    for (std::size_t k = 0; k < q.size(); ++k) a(s, k + 1) = 1.0 / std::tanh(points[s] - q[k]);
  }
  return a;
}

CothFit fit_transfer_eigenvalue(const ChainSpec& spec, const BetheRoots& roots) {
  const auto pts = coth_sample_points(spec.q);
  const CMatrix a = coth_basis(spec.q, pts);
  std::vector<Complex> values;
  for (const auto& z : pts) values.push_back(transfer_eigenvalue(spec, roots, z));
  const auto coef = solve_linear(a, values);
  CothFit fit;
  fit.constant = coef[0];
  fit.residues.assign(coef.begin() + 1, coef.end());

  const Complex check = coth_sample_points(spec.q, 1.3, 1.1)[0];
  Complex model = fit.constant;
  for (std::size_t k = 0; k < spec.sites(); ++k) model += fit.residues[k] / std::tanh(check - spec.q[k]);
  const Complex truth = transfer_eigenvalue(spec, roots, check);
  fit.heldout_error = std::abs(model - truth) / std::max(1.0, std::abs(truth));
  return fit;
}

SumRuleReport sum_rule_check(const ChainSpec& spec, const WeightVector& weights, Complex constant,
                             std::span<const Complex> h_values) {
  SumRuleReport r;
  r.C = constant;
  r.H_sum = 0.0;
  for (const auto& hv : h_values) r.H_sum += hv;
  r.C_expected = 0.0;
  r.H_sum_expected = 0.0;
  for (std::size_t a = 0; a < weights.M.size(); ++a) {
    const double m = static_cast<double>(weights.M[a]);
    r.C_expected += spec.V[a] * std::cosh(spec.hbar * m);
    r.H_sum_expected += spec.V[a] * std::sinh(spec.hbar * m);
  }
  r.C_deviation = std::abs(r.C - r.C_expected) / std::max(1.0, std::abs(r.C_expected));
  r.H_sum_deviation = std::abs(r.H_sum - r.H_sum_expected) / std::max(1.0, std::abs(r.H_sum_expected));
  return r;
}

SumRuleReport sum_rule_check(const ChainSpec& spec, const BetheRoots& roots) {
  const WeightVector w = weights_from_occupations(spec.sites(), roots.occupations);
  const CothFit fit = fit_transfer_eigenvalue(spec, roots);
  const auto h = hamiltonian_eigenvalues(spec, roots);
  return sum_rule_check(spec, w, fit.constant, h);
}

}  // namespace qcd
