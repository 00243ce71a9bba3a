#include "qcd/bethe_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <optional>
#include <random>

#include "qcd/error.hpp"
#include "qcd/parallel.hpp"

namespace qcd {

namespace {

const Complex half_period{0.0, std::numbers::pi / 2};

double norm2(const std::vector<Complex>& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

bool usable(const std::vector<Complex>& x) {
  for (const auto& z : x)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) < 1e-280) return false;
  return true;
}

// Largest |dmu| between two exponentiated iterates.
double root_move(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, 0.5 * std::abs(std::log(a[i] / b[i])));
  return m;
}

bool lex_less(Complex a, Complex b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); }

std::vector<Complex> flat_exponentiated(const BetheRoots& r) { return exponentiate_roots(r.levels); }

void check_occupations(const ChainSpec& spec, std::span<const int> occupations) {
  if (occupations.size() != static_cast<std::size_t>(spec.n - 1))
    throw Error(ErrorCode::invalid_occupations, "need exactly n - 1 occupations");
  for (int nb : occupations)
    if (nb < 0) throw Error(ErrorCode::invalid_occupations, "occupations must be nonnegative");
  (void)weights_from_occupations(spec.sites(), occupations);
}

ChainSpec with_hbar(const ChainSpec& spec, Complex hbar) {
  ChainSpec s = spec;
  s.hbar = hbar;
  return s;
}

CPoly linear(Complex c0, Complex c1) { return CPoly{{c0, c1}}; }

void combinations(std::size_t n, std::size_t k, std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return;
  for (;;) {
    out.push_back(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Adds `candidate` unless it duplicates an accepted solution; returns the
// index of the duplicate or -1.
int find_duplicate(const std::vector<BetheRoots>& accepted, const BetheRoots& candidate, double radius) {
  for (std::size_t i = 0; i < accepted.size(); ++i)
    if (same_solution(accepted[i], candidate, radius)) return static_cast<int>(i);
  return -1;
}

void sort_solutions(SolutionSet& set) {
  std::vector<std::size_t> order(set.solutions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::vector<Complex>> keys;
  for (const auto& s : set.solutions) keys.push_back(flat_exponentiated(s));
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(keys[a].begin(), keys[a].end(), keys[b].begin(), keys[b].end(), lex_less);
  });
  SolutionSet sorted = set;
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.solutions[i] = set.solutions[order[i]];
    sorted.diagnostics[i] = set.diagnostics[order[i]];
  }
  set = std::move(sorted);
}

}  // namespace

void SolverConfig::validate() const {
  if (!(newton_tol > 0) || max_newton_iters <= 0 || !(damping > 0 && damping < 1) || max_halvings <= 0 ||
      homotopy_steps <= 0 || !(dedup_radius > 0) || multistart_attempts < 0 || !(min_locus_distance > 0))
    throw Error(ErrorCode::invalid_argument, "solver configuration fields must be positive");
}

NewtonResult newton_solve(const BetheSystem& system, std::vector<Complex> x, const SolverConfig& cfg) {
  NewtonResult best{x, std::numeric_limits<double>::infinity(), 0};
  if (system.unknowns() == 0) return {x, 0.0, 0};
  SystemValue val = system.evaluate(x);
  best.residual = val.max_normalized;
  if (val.max_normalized <= cfg.newton_tol) return best;
  for (int it = 1; it <= cfg.max_newton_iters; ++it) {
    const LuFactorization lu(system.jacobian(x));
    if (lu.singular()) throw Error(ErrorCode::singular_system, "Bethe Jacobian is singular");
    const auto dx = lu.solve(val.difference);
    const double merit = norm2(val.difference);
    double lambda = 1.0;
    std::vector<Complex> trial(x.size());
    SystemValue tv;
    bool accepted = false;
    for (int h = 0; h <= cfg.max_halvings; ++h) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] - lambda * dx[i];
      if (usable(trial)) {
        tv = system.evaluate(trial);
        if (norm2(tv.difference) < merit) {
          accepted = true;
          break;
        }
      }
      lambda *= cfg.damping;
    }
    if (!accepted) {
      // At the rounding floor no step decreases the merit; take the full step.
      if (val.max_normalized > 1e-8) throw ConvergenceError("Newton line search failed", best.x, best.residual);
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] - dx[i];
      if (!usable(trial)) throw ConvergenceError("Newton step left the domain", best.x, best.residual);
      tv = system.evaluate(trial);
    }
    x = trial;
    val = tv;
    if (system.locus_distance(x) < cfg.min_locus_distance)
      throw Error(ErrorCode::excluded_locus, "Newton iterate entered the excluded locus");
    if (val.max_normalized < best.residual) best = {x, val.max_normalized, it};
    if (val.max_normalized <= cfg.newton_tol) return {x, val.max_normalized, it};
  }
  throw ConvergenceError("Newton did not reach the residual tolerance", best.x, best.residual);
}

NewtonResult newton_refine_detailed(const ChainSpec& spec, const BetheRoots& roots, const SolverConfig& cfg) {
  spec.validate();
  cfg.validate();
  validate_roots_shape(spec, roots);
  const BetheSystem sys = xxz_bethe_system(spec, roots.occupations);
  const auto x0 = exponentiate_roots(roots.levels);
  if (sys.unknowns() > 0 && sys.locus_distance(x0) < cfg.min_locus_distance)
    throw Error(ErrorCode::excluded_locus, "starting roots lie on the excluded locus");
  return newton_solve(sys, x0, cfg);
}

BetheRoots newton_refine(const ChainSpec& spec, const BetheRoots& roots, const SolverConfig& cfg) {
  const NewtonResult r = newton_refine_detailed(spec, roots, cfg);
  if (r.iterations == 0) return roots;
  return BetheRoots{roots.occupations, roots_from_exponentiated(r.x, roots.occupations)};
}

bool track_path(const std::function<BetheSystem(double)>& family, std::vector<Complex>& x, const SolverConfig& cfg,
                double& last_good, std::string& reason) {
  SolverConfig corrector = cfg;
  corrector.newton_tol = std::max(cfg.newton_tol, 1e-10);
  corrector.max_newton_iters = 8;
  const double base = 1.0 / cfg.homotopy_steps;
  double s = 0.0, ds = base, prev_step = 0.0;
  std::vector<Complex> prev;
  int streak = 0;
  last_good = 0.0;
  while (s < 1.0) {
    const double step = std::min(ds, 1.0 - s);
    std::vector<Complex> pred = x;
    if (!prev.empty())
      for (std::size_t i = 0; i < x.size(); ++i) pred[i] = x[i] + (x[i] - prev[i]) * (step / prev_step);
    bool ok = false;
    try {
      if (usable(pred)) {
        const double target = (1.0 - s) - step <= 1e-14 ? 1.0 : s + step;
        NewtonResult r = newton_solve(family(target), pred, corrector);
        if (root_move(r.x, pred) <= 0.1 && root_move(r.x, x) <= 0.5) {
          prev = x;
          prev_step = step;
          x = std::move(r.x);
          s = target;
          last_good = s;
          ok = true;
        } else {
          reason = "corrector jumped";
        }
      }
    } catch (const Error& e) {
      reason = e.what();
    }
    if (ok) {
      if (++streak >= 3) {
        ds = std::min(2.0 * ds, 4.0 * base);
        streak = 0;
      }
    } else {
      streak = 0;
      ds *= 0.5;
      if (ds < 1e-7) return false;
    }
  }
  return true;
}

bool anisotropy_path_needs_bulge(Complex target) {
  for (int k = 1; k < 200; ++k) {
    const double s = k / 200.0;
    if (s > 0.97) break;
    if (std::abs(std::sinh(anisotropy_path(target, s, 0))) < 0.05) return true;
  }
  return false;
}

Complex anisotropy_path(Complex target, double s, int bulge) {
  const Complex d = target - half_period;
  Complex h = half_period + s * d;
  if (bulge != 0 && std::abs(d) > 0)
    h += 0.3 * bulge * 4.0 * s * (1.0 - s) * Complex{0.0, 1.0} * d / std::abs(d);
  return h;
}

std::vector<std::vector<Complex>> free_fermion_starts(const ChainSpec& spec, std::span<const int> occupations) {
  const std::size_t levels = occupations.size();
  std::vector<std::vector<Complex>> out;
  std::vector<Complex> w;
  for (const auto& qk : spec.q) w.push_back(std::exp(2.0 * qk));

  std::vector<std::vector<Complex>> chosen(levels);
  auto rec = [&](auto&& self, std::size_t b) -> void {
    if (b == levels) {
      std::vector<Complex> x;
      for (const auto& lv : chosen) x.insert(x.end(), lv.begin(), lv.end());
      out.push_back(std::move(x));
      return;
    }
    const std::vector<Complex>& lower = b == 0 ? w : chosen[b - 1];
    const std::size_t nb = static_cast<std::size_t>(occupations[b]);
    if (nb == 0) {
      chosen[b].clear();
      self(self, b + 1);
      return;
    }
    const std::size_t n_lower = lower.size();
    if (n_lower < nb) return;
    const double n_up = b + 1 < levels ? occupations[b + 1] : 0;
    const Complex a = spec.V[b] * std::exp(-static_cast<double>(n_lower) * half_period);
    const Complex c = spec.V[b + 1] * std::exp(-n_up * half_period) * ((nb - 1) % 2 == 0 ? 1.0 : -1.0);
    CPoly left{{a}}, right{{c}};
    for (const auto& l : lower) {
      left = left * linear(-l, -1.0);
      right = right * linear(-l, 1.0);
    }
    CPoly p;
    p.coeffs.resize(n_lower + 1);
    for (std::size_t k = 0; k <= n_lower; ++k) p.coeffs[k] = left.coeffs[k] - right.coeffs[k];
    p.trim();
    if (p.degree() < 1) return;
    std::vector<Complex> roots;
    try {
      roots = poly_roots(p);
    } catch (const Error&) {
      return;
    }
    std::vector<std::vector<std::size_t>> combos;
    combinations(roots.size(), nb, combos);
    for (const auto& combo : combos) {
      bool ok = true;
      std::vector<Complex> pick;
      for (std::size_t i : combo) {
        const Complex t = roots[i];
        if (std::abs(t) < 1e-12) ok = false;
        for (const auto& l : lower) ok = ok && std::abs(t - l) > 1e-8 * std::max(1.0, std::abs(t));
        for (const auto& o : pick)
          ok = ok && std::abs(t - o) > 1e-8 * std::max(1.0, std::abs(t)) &&
               std::abs(t + o) > 1e-8 * std::max(1.0, std::abs(t));
        pick.push_back(t);
      }
      if (!ok) continue;
      chosen[b] = pick;
      self(self, b + 1);
    }
  };
  rec(rec, 0);
  return out;
}

bool same_solution(const BetheRoots& a, const BetheRoots& b, double radius) {
  if (a.occupations != b.occupations || a.levels.size() != b.levels.size()) return false;
  for (std::size_t l = 0; l < a.levels.size(); ++l) {
    if (a.levels[l].size() != b.levels[l].size()) return false;
    if (a.levels[l].empty()) continue;
    std::vector<Complex> ta, tb;
    for (const auto& mu : a.levels[l]) ta.push_back(std::exp(2.0 * mu));
    for (const auto& mu : b.levels[l]) tb.push_back(std::exp(2.0 * mu));
    const MultisetMatch m = match_multisets(ta, tb);
    for (std::size_t i = 0; i < ta.size(); ++i) {
      const Complex t = ta[i], u = tb[m.pairing[i]];
      if (std::abs(t - u) / std::max(1.0, std::abs(t)) > radius) return false;
    }
  }
  return true;
}

BetheRoots canonical_roots(const BetheRoots& r) {
  BetheRoots out = r;
  for (auto& level : out.levels) {
    std::sort(level.begin(), level.end(),
              [](Complex a, Complex b) { return lex_less(std::exp(2.0 * a), std::exp(2.0 * b)); });
    // Representative of mu modulo i pi with imaginary part in (-pi/2, pi/2].
    for (auto& mu : level) mu = 0.5 * std::log(std::exp(2.0 * mu));
  }
  return out;
}

SolutionSet homotopy_from_xx(const ChainSpec& spec, std::span<const int> occupations, const SolverConfig& cfg) {
  spec.validate();
  cfg.validate();
  check_occupations(spec, occupations);
  SolutionSet set;
  set.spec = spec;
  set.occupations.assign(occupations.begin(), occupations.end());
  set.expected = multinomial(weights_from_occupations(spec.sites(), occupations).M);

  int total = 0;
  for (int nb : occupations) total += nb;
  if (total == 0) {
    set.starts = 1;
    BetheRoots vac = vacuum_roots(spec.n);
    set.solutions.push_back(vac);
    set.diagnostics.push_back({0.0, std::numeric_limits<double>::infinity(), "tracked"});
    return set;
  }

  const auto starts = free_fermion_starts(spec, occupations);
  set.starts = starts.size();
  const std::vector<int> occ(occupations.begin(), occupations.end());
  bool coupled = false;
  for (std::size_t l = 1; l < occ.size(); ++l) coupled = coupled || occ[l] > 0;

  // Path variants: anisotropy bulge side and a complex bend of the coupling
  // scale tau(s) = s + bend s (1 - s). Different variants can end on
  // different solutions when a path runs into a singular configuration.
  struct Variant {
    int bulge;
    Complex bend;
  };
  std::vector<Variant> variants;
  const bool graze = anisotropy_path_needs_bulge(spec.hbar);
  for (int bulge : {0, 1, -1}) {
    if (graze && bulge == 0) continue;
    variants.push_back({bulge, 0.0});
  }
  if (coupled)
    for (Complex bend : {Complex{0.0, 0.8}, Complex{0.0, -0.8}, Complex{1.5, 0.0}})
      for (int bulge : {1, -1}) variants.push_back({bulge, bend});

  const BetheSystem target = xxz_bethe_system(spec, occ);
  struct Endpoint {
    bool ok = false;
    std::vector<Complex> x;
    double residual = 0.0;
    LostBranch lost;
  };
  auto run = [&](std::size_t start, const Variant& v) {
    Endpoint e;
    e.lost.start_index = start;
    std::vector<Complex> x = starts[start];
    double last = 0.0;
    std::string reason;
    auto family = [&](double s) {
      const Complex tau = s + v.bend * s * (1.0 - s);
      return xxz_bethe_system(with_hbar(spec, anisotropy_path(spec.hbar, s, v.bulge)), occ, tau);
    };
    if (!track_path(family, x, cfg, last, reason)) {
      e.lost = {start, "anisotropy", last, reason};
      return e;
    }
    try {
      const NewtonResult r = newton_solve(target, x, cfg);
      const BetheRoots roots{occ, roots_from_exponentiated(r.x, occ)};
      if (ratio_form_residual(bethe_ratio_sides(spec, roots)) > ratio_form_tolerance) {
        e.lost = {start, "polish", 1.0, "endpoint violates the ratio form"};
        return e;
      }
      e.ok = true;
      e.x = r.x;
      e.residual = r.residual;
    } catch (const Error& err) {
      e.lost = {start, "polish", 1.0, err.what()};
    }
    return e;
  };
  auto merge = [&](const Endpoint& e, const char* status) {
    BetheRoots r = canonical_roots({occ, roots_from_exponentiated(e.x, occ)});
    const int dup = find_duplicate(set.solutions, r, cfg.dedup_radius);
    if (dup >= 0) {
      ++set.collisions;
      set.diagnostics[static_cast<std::size_t>(dup)].path_status = "tracked-collided";
      return;
    }
    set.solutions.push_back(std::move(r));
    set.diagnostics.push_back({e.residual, target.locus_distance(e.x), status});
  };

  // First pass: each start follows variants until one reaches a solution.
  std::vector<Endpoint> first(starts.size());
  std::vector<std::size_t> used(starts.size(), 0);
  parallel_for(starts.size(), [&](std::size_t i) {
    for (std::size_t k = 0; k < variants.size(); ++k) {
      used[i] = k + 1;
      first[i] = run(i, variants[k]);
      if (first[i].ok) return;
    }
  });
  for (const auto& e : first) {
    if (e.ok)
      merge(e, "tracked");
    else
      set.lost.push_back(e.lost);
  }
  // Second pass when short: the remaining variants of every start.
  if (set.solutions.size() < set.expected) {
    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (std::size_t i = 0; i < starts.size(); ++i)
      for (std::size_t k = used[i]; k < variants.size(); ++k) jobs.push_back({i, k});
    std::vector<Endpoint> extra(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t j) { extra[j] = run(jobs[j].first, variants[jobs[j].second]); });
    for (const auto& e : extra)
      if (e.ok && set.solutions.size() < set.expected) merge(e, "tracked");
  }
  sort_solutions(set);
  return set;
}

SolutionSet enumerate_sector(const ChainSpec& spec, std::span<const int> occupations, const SolverConfig& cfg) {
  SolutionSet set = homotopy_from_xx(spec, occupations, cfg);
  if (set.solutions.size() >= set.expected || cfg.multistart_attempts == 0) return set;

  const std::vector<int> occ(occupations.begin(), occupations.end());
  const BetheSystem sys = xxz_bethe_system(spec, occ);
  double lo = spec.q[0].real(), hi = spec.q[0].real();
  for (const auto& z : spec.q) {
    lo = std::min(lo, z.real());
    hi = std::max(hi, z.real());
  }
  const std::size_t unknowns = sys.unknowns();
  const std::size_t batch = 16;
  for (std::size_t first = 0; first < static_cast<std::size_t>(cfg.multistart_attempts) &&
                              set.solutions.size() < set.expected;
       first += batch) {
    const std::size_t count = std::min(batch, static_cast<std::size_t>(cfg.multistart_attempts) - first);
    std::vector<std::optional<NewtonResult>> found(count);
    parallel_for(count, [&](std::size_t k) {
      std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + first + k + 1);
      std::uniform_real_distribution<double> re(lo - 1.0, hi + 1.0), im(-std::numbers::pi / 2, std::numbers::pi / 2);
      std::vector<Complex> x(unknowns);
      for (auto& t : x) t = std::exp(2.0 * Complex{re(rng), im(rng)});
      try {
        found[k] = newton_solve(sys, x, cfg);
      } catch (const Error&) {
      }
    });
    for (const auto& f : found) {
      if (!f || set.solutions.size() >= set.expected) continue;
      const double locus = sys.locus_distance(f->x);
      if (locus < cfg.min_locus_distance) continue;
      BetheRoots r = canonical_roots({occ, roots_from_exponentiated(f->x, occ)});
      if (ratio_form_residual(bethe_ratio_sides(spec, r)) > ratio_form_tolerance) {
        ++set.spurious;
        continue;
      }
      if (find_duplicate(set.solutions, r, cfg.dedup_radius) >= 0) continue;
      set.solutions.push_back(std::move(r));
      set.diagnostics.push_back({f->residual, locus, "multistart"});
    }
  }
  sort_solutions(set);
  return set;
}

}  // namespace qcd
