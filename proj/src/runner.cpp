#include "qcd/runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <initializer_list>
#include <numbers>
#include <random>
#include <sstream>

#include "qcd/error.hpp"
#include "qcd/parallel.hpp"

namespace qcd {

namespace {

const Complex XX_HBAR{0.0, std::numbers::pi / 2.0};
constexpr double sum_rule_tolerance = 1e-9;
constexpr double xx_agreement_tolerance = 1e-12;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::schema, path + ": " + what);
}

// Object reader that tracks the field path and rejects unknown keys.
class Reader {
 public:
  Reader(const Json& j, std::string path, std::initializer_list<const char*> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) schema_error(path_, "expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool ok = false;
      for (const char* k : allowed) ok = ok || it.key() == k;
      if (!ok) schema_error(sub(it.key()), "unknown field");
    }
  }

  std::string sub(const std::string& key) const { return path_ + "." + key; }
  bool has(const char* key) const { return j_.contains(key); }
  const Json& at(const char* key) const {
    if (!j_.contains(key)) schema_error(sub(key), "required field missing");
    return j_[key];
  }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    if (!j_[key].is_number()) schema_error(sub(key), "expected a number");
    const double v = j_[key].get<double>();
    if (!std::isfinite(v)) schema_error(sub(key), "non-finite value");
    return v;
  }
  double positive(const char* key, double fallback) const {
    const double v = number(key, fallback);
    if (!(v > 0.0)) schema_error(sub(key), "must be positive");
    return v;
  }
  long long integer(const char* key, long long fallback, long long lo) const {
    if (!has(key)) return fallback;
    if (!j_[key].is_number_integer()) schema_error(sub(key), "expected an integer");
    const long long v = j_[key].get<long long>();
    if (v < lo) schema_error(sub(key), "must be at least " + std::to_string(lo));
    return v;
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!j_[key].is_boolean()) schema_error(sub(key), "expected true or false");
    return j_[key].get<bool>();
  }
  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!j_[key].is_string()) schema_error(sub(key), "expected a string");
    return j_[key].get<std::string>();
  }
  Complex complex(const char* key, Complex fallback) const {
    return has(key) ? complex_from_json(j_[key], sub(key)) : fallback;
  }
  Complex complex(const char* key) const { return complex_from_json(at(key), sub(key)); }
  std::vector<Complex> complexes(const char* key) const { return complex_list_from_json(at(key), sub(key)); }

 private:
  const Json& j_;
  std::string path_;
};

template <class F>
void with_invariant_path(const std::string& path, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::schema) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

SolverConfig parse_solver(const Json& j, const std::string& path) {
  const Reader r(j, path,
                 {"newton_tol", "max_newton_iters", "damping", "max_halvings", "homotopy_steps", "dedup_radius",
                  "multistart_attempts", "min_locus_distance"});
  SolverConfig c;
  c.newton_tol = r.positive("newton_tol", c.newton_tol);
  c.max_newton_iters = static_cast<int>(r.integer("max_newton_iters", c.max_newton_iters, 1));
  c.damping = r.positive("damping", c.damping);
  c.max_halvings = static_cast<int>(r.integer("max_halvings", c.max_halvings, 0));
  c.homotopy_steps = static_cast<int>(r.integer("homotopy_steps", c.homotopy_steps, 1));
  c.dedup_radius = r.positive("dedup_radius", c.dedup_radius);
  c.multistart_attempts = static_cast<int>(r.integer("multistart_attempts", c.multistart_attempts, 0));
  c.min_locus_distance = r.positive("min_locus_distance", c.min_locus_distance);
  with_invariant_path(path, [&] { c.validate(); });
  return c;
}

SectorSelection parse_sectors(const Reader& r, int n, std::size_t sites) {
  SectorSelection s;
  const std::string path = r.sub("sectors");
  if (!r.has("sectors")) {
    s.list.push_back(std::vector<int>(static_cast<std::size_t>(n - 1), 0));
    return s;
  }
  const Json& j = r.at("sectors");
  if (j.is_string()) {
    if (j.get<std::string>() != "all") schema_error(path, "expected \"all\" or a list of occupation vectors");
    s.all = true;
    return s;
  }
  if (!j.is_array()) schema_error(path, "expected \"all\" or a list of occupation vectors");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_array()) schema_error(p, "expected an array of integers");
    std::vector<int> occ;
    for (std::size_t b = 0; b < j[i].size(); ++b) {
      if (!j[i][b].is_number_integer() || j[i][b].get<long long>() < 0)
        schema_error(p + "[" + std::to_string(b) + "]", "expected a nonnegative integer");
      occ.push_back(j[i][b].get<int>());
    }
    if (occ.size() != static_cast<std::size_t>(n - 1))
      schema_error(p, "expected " + std::to_string(n - 1) + " occupations (one per root level)");
    if (!occupations_monotone(sites, occ))
      throw Error(ErrorCode::invalid_occupations, p + ": occupations must satisfy N >= N_1 >= ... >= N_{n-1} >= 0");
    s.list.push_back(std::move(occ));
  }
  return s;
}

int parse_rank(const Reader& r) {
  const long long n = r.integer("n", 0, 1);
  if (n == 0) schema_error(r.sub("n"), "required field missing");
  return static_cast<int>(n);
}

ChainSection parse_chain(const Json& j, const std::string& path, bool xx_point) {
  const Reader r(j, path, {"n", "q", "V", "hbar", "sectors", "roots"});
  ChainSection c;
  c.spec.n = parse_rank(r);
  c.spec.q = r.complexes("q");
  c.spec.V = r.complexes("V");
  if (xx_point) {
    c.spec.hbar = XX_HBAR;
    if (r.has("hbar") && std::abs(r.complex("hbar") - XX_HBAR) > 1e-14)
      throw Error(ErrorCode::invariant, r.sub("hbar") + ": the XX point requires hbar = i pi / 2");
  } else {
    c.spec.hbar = r.complex("hbar");
  }
  with_invariant_path(path, [&] { c.spec.validate(); });
  c.sectors = parse_sectors(r, c.spec.n, c.spec.sites());
  if (r.has("roots")) {
    const Json& roots = r.at("roots");
    if (!roots.is_array()) schema_error(r.sub("roots"), "expected an array of root sets");
    for (std::size_t i = 0; i < roots.size(); ++i) {
      const std::string p = r.sub("roots") + "[" + std::to_string(i) + "]";
      BetheRoots b = roots_from_json(roots[i], p);
      with_invariant_path(p, [&] { validate_roots_shape(c.spec, b); });
      if (!occupations_monotone(c.spec.sites(), b.occupations))
        throw Error(ErrorCode::invalid_occupations, p + ": occupations must be monotone");
      c.roots.push_back(std::move(b));
    }
  }
  return c;
}

GaudinSection parse_gaudin(const Json& j, const std::string& path) {
  const Reader r(j, path, {"n", "q", "v", "hbar", "sectors", "nonrel_p"});
  GaudinSection g;
  g.spec.n = parse_rank(r);
  g.spec.q = r.complexes("q");
  g.spec.v = r.complexes("v");
  g.spec.hbar = r.complex("hbar");
  with_invariant_path(path, [&] { g.spec.validate(); });
  g.sectors = parse_sectors(r, g.spec.n, g.spec.sites());
  if (r.has("nonrel_p")) {
    g.nonrel_p = r.complexes("nonrel_p");
    if (g.nonrel_p.size() != g.spec.sites()) schema_error(r.sub("nonrel_p"), "expected one momentum per site");
  }
  return g;
}

IdentitySection parse_identity(const Json& j, const std::string& path) {
  const Reader r(j, path, {"instances", "gaudin_instances", "max_sites", "hbar", "box", "tolerance"});
  IdentitySection s;
  s.instances = static_cast<int>(r.integer("instances", s.instances, 0));
  s.gaudin_instances = static_cast<int>(r.integer("gaudin_instances", s.gaudin_instances, 0));
  s.max_sites = static_cast<int>(r.integer("max_sites", s.max_sites, 1));
  if (s.max_sites > 12) schema_error(r.sub("max_sites"), "must be at most 12");
  s.hbar = r.complex("hbar", s.hbar);
  if (std::abs(std::sinh(s.hbar)) < 1e-12)
    throw Error(ErrorCode::invariant, r.sub("hbar") + ": sinh(hbar) must be nonzero");
  s.box = r.positive("box", s.box);
  s.tolerance = r.positive("tolerance", s.tolerance);
  return s;
}

RSSection parse_rs(const Json& j, const std::string& path) {
  const Reader r(j, path, {"eta", "nu", "q", "p", "qdot", "flow", "drift_tolerance"});
  RSSection s;
  s.eta = r.complex("eta", s.eta);
  s.nu = r.complex("nu");
  with_invariant_path(path, [&] { (void)RSParams(s.eta, s.nu); });
  s.q = r.complexes("q");
  if (s.q.empty()) schema_error(r.sub("q"), "at least one coordinate required");
  if (r.has("p")) s.p = r.complexes("p");
  if (r.has("qdot")) s.qdot = r.complexes("qdot");
  if (s.p.has_value() == s.qdot.has_value()) schema_error(path, "exactly one of p and qdot is required");
  const auto& given = s.p ? *s.p : *s.qdot;
  if (given.size() != s.q.size()) schema_error(r.sub(s.p ? "p" : "qdot"), "length differs from q");
  if (r.has("flow")) {
    const std::string fp = r.sub("flow");
    const Reader f(r.at("flow"), fp, {"t_end", "dt", "adaptive", "step_tolerance", "samples", "regime"});
    s.flow.t_end = f.number("t_end", s.flow.t_end);
    if (s.flow.t_end < 0.0) schema_error(f.sub("t_end"), "must be nonnegative");
    s.flow.dt = f.positive("dt", s.flow.dt);
    s.flow.adaptive = f.boolean("adaptive", s.flow.adaptive);
    s.flow.step_tolerance = f.positive("step_tolerance", s.flow.step_tolerance);
    s.flow.samples = static_cast<std::size_t>(f.integer("samples", static_cast<long long>(s.flow.samples), 1));
    s.flow.regime = flow_regime_from_string(f.string("regime", to_string(s.flow.regime)), f.sub("regime"));
  }
  s.drift_tolerance = r.positive("drift_tolerance", s.drift_tolerance);
  return s;
}

Json sectors_json(const SectorSelection& s) {
  if (s.all) return "all";
  Json j = Json::array();
  for (const auto& occ : s.list) j.push_back(occ);
  return j;
}

Json chain_json(const ChainSection& c, bool xx_point) {
  Json j = to_json(c.spec);
  if (xx_point) j.erase("hbar");
  j["sectors"] = sectors_json(c.sectors);
  if (!c.roots.empty()) {
    Json roots = Json::array();
    for (const auto& r : c.roots) roots.push_back(to_json(r));
    j["roots"] = roots;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Execution

struct Outcome {
  std::string status = "pass";  // "pass", "fail" or "error"
  Json result = Json::object();
  std::string error;
  std::vector<CsvArtifact> csv;
  std::string detail;

  int exit_code() const { return status == "pass" ? 0 : status == "fail" ? 1 : 2; }
  void require(bool ok) {
    if (!ok && status == "pass") status = "fail";
  }
};

std::vector<std::vector<int>> resolve_sectors(const SectorSelection& s, int n, std::size_t sites) {
  if (!s.all) return s.list;
  std::vector<std::vector<int>> out;
  for (const auto& w : all_weights(n, sites)) out.push_back(occupations_from_weights(w));
  return out;
}

SolverConfig solver_for(const RunConfig& cfg) {
  SolverConfig s = cfg.solver;
  s.seed = cfg.seed;
  return s;
}

std::string format_g(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

Outcome run_verify_duality(const RunConfig& cfg) {
  const ChainSection& c = *cfg.chain;
  Outcome o;
  Json sectors = Json::array();
  std::size_t total = 0, verified = 0;
  double worst = 0.0;
  auto add = [&](Json& into, const DualityReport& rep) {
    ++total;
    if (rep.status == "verified") ++verified;
    worst = std::max(worst, rep.max_match_distance);
    o.require(rep.status == "verified");
    into.push_back(to_json(rep));
  };
  if (!c.roots.empty()) {
    Json reports = Json::array();
    for (const auto& r : c.roots) add(reports, verify_duality(c.spec, r, cfg.eta, cfg.tolerance));
    sectors.push_back({{"source", "config"}, {"reports", reports}});
  } else {
    const SolverConfig solver = solver_for(cfg);
    for (const auto& occ : resolve_sectors(c.sectors, c.spec.n, c.spec.sites())) {
      const SolutionSet set = enumerate_sector(c.spec, occ, solver);
      std::vector<DualityReport> reps(set.solutions.size());
      parallel_for(set.solutions.size(),
                   [&](std::size_t i) { reps[i] = verify_duality(c.spec, set.solutions[i], cfg.eta, cfg.tolerance); });
      Json reports = Json::array();
      for (const auto& rep : reps) add(reports, rep);
      sectors.push_back({{"occupations", occ},
                         {"expected", set.expected},
                         {"found", set.solutions.size()},
                         {"complete", set.complete()},
                         {"reports", reports}});
    }
  }
  o.require(total > 0);
  o.result = {{"sectors", sectors}, {"states", total}, {"verified", verified}, {"max_match_distance", worst}};
  o.detail = std::to_string(verified) + "/" + std::to_string(total) + " states verified, max match distance " +
             format_g(worst);
  return o;
}

Outcome run_solve_bethe(const RunConfig& cfg) {
  const ChainSection& c = *cfg.chain;
  const SolverConfig solver = solver_for(cfg);
  Outcome o;
  Json sectors = Json::array();
  std::size_t found = 0, expected = 0;
  for (const auto& occ : resolve_sectors(c.sectors, c.spec.n, c.spec.sites())) {
    const SolutionSet set = enumerate_sector(c.spec, occ, solver);
    found += set.solutions.size();
    expected += set.expected;
    o.require(set.complete());
    Json j = to_json(set);
    Json checks = Json::array();
    for (const auto& r : set.solutions) {
      const BetheCheck chk = bethe_check(c.spec, r);
      const SumRuleReport sr = sum_rule_check(c.spec, r);
      const bool ok = chk.solves(verified_roots_tolerance, solver.min_locus_distance) &&
                      sr.C_deviation <= sum_rule_tolerance && sr.H_sum_deviation <= sum_rule_tolerance;
      o.require(ok);
      checks.push_back({{"bethe_residual", chk.max_residual},
                        {"ratio_residual", chk.ratio_residual},
                        {"locus_distance", chk.locus_distance},
                        {"H_values", to_json(hamiltonian_eigenvalues(c.spec, r))},
                        {"sum_rules", to_json(sr)},
                        {"passed", ok}});
    }
    j["checks"] = checks;
    sectors.push_back(std::move(j));
  }
  o.result = {{"sectors", sectors}, {"found", found}, {"expected", expected}};
  o.detail = std::to_string(found) + "/" + std::to_string(expected) + " Bethe solutions";
  return o;
}

Outcome run_oracle_diag(const RunConfig& cfg) {
  const ChainSection& c = *cfg.chain;
  Outcome o;
  Json sectors = Json::array();
  std::ostringstream csv;
  csv << "sector,state,site,re_H,im_H,re_lambda,im_lambda\n" << std::setprecision(17);
  std::size_t states = 0, verified = 0;
  double worst = 0.0;
  std::size_t sector_index = 0;
  for (const auto& occ : resolve_sectors(c.sectors, c.spec.n, c.spec.sites())) {
    const WeightVector w = weights_from_occupations(c.spec.sites(), occ);
    const SectorSpectrum sp = sector_spectra(c.spec, w, cfg.seed);
    std::vector<DualityReport> reps(sp.states.size());
    parallel_for(sp.states.size(), [&](std::size_t i) {
      reps[i] = verify_duality(c.spec, occ, sp.states[i].H_values, cfg.eta, cfg.tolerance);
    });
    Json j = to_json(sp);
    j["occupations"] = occ;
    Json reports = Json::array(), sums = Json::array();
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const SumRuleReport sr = sum_rule_check(c.spec, w, sp.states[i].constant_C, sp.states[i].H_values);
      const bool ok = reps[i].status == "verified" && sr.C_deviation <= sum_rule_tolerance &&
                      sr.H_sum_deviation <= sum_rule_tolerance;
      o.require(ok);
      ++states;
      if (ok) ++verified;
      worst = std::max(worst, reps[i].max_match_distance);
      reports.push_back(to_json(reps[i]));
      sums.push_back(to_json(sr));
      for (std::size_t k = 0; k < sp.states[i].H_values.size(); ++k) {
        const Complex h = sp.states[i].H_values[k];
        const Complex l = k < reps[i].lax_eigenvalues.size() ? reps[i].lax_eigenvalues[k] : Complex{NAN, NAN};
        csv << sector_index << ',' << i << ',' << k + 1 << ',' << h.real() << ',' << h.imag() << ',' << l.real()
            << ',' << l.imag() << '\n';
      }
    }
    j["duality"] = reports;
    j["sum_rules"] = sums;
    sectors.push_back(std::move(j));
    ++sector_index;
  }
  o.result = {{"sectors", sectors}, {"states", states}, {"verified", verified}, {"max_match_distance", worst}};
  o.csv.push_back({"spectrum", csv.str()});
  o.detail = std::to_string(verified) + "/" + std::to_string(states) + " oracle states verified, max match distance " +
             format_g(worst);
  return o;
}

std::mt19937_64 instance_rng(std::uint64_t seed, std::size_t index, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

struct IdentityInstance {
  std::size_t n = 0, m = 0;
  double deviation = 0.0;
  int resamples = 0;
};

template <class Check>
IdentityInstance identity_instance(const IdentitySection& s, std::mt19937_64 rng, Check&& check) {
  std::uniform_real_distribution<double> u(-s.box, s.box);
  auto draw = [&] { return Complex{u(rng), u(rng)}; };
  IdentityInstance inst;
  for (;;) {
    inst.n = std::uniform_int_distribution<std::size_t>(1, static_cast<std::size_t>(s.max_sites))(rng);
    inst.m = std::uniform_int_distribution<std::size_t>(0, inst.n)(rng);
    std::vector<Complex> x(inst.n), y(inst.m);
    for (auto& z : x) z = draw();
    for (auto& z : y) z = draw();
    const Complex g = draw();
    try {
      inst.deviation = check(x, y, g);
      return inst;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::singular_configuration || ++inst.resamples > 100) throw;
    }
  }
}

Outcome run_check_identity(const RunConfig& cfg) {
  const IdentitySection s = cfg.identity.value_or(IdentitySection{});
  Outcome o;
  auto run = [&](int count, std::uint64_t stream, auto&& check) {
    std::vector<IdentityInstance> out(static_cast<std::size_t>(count));
    parallel_for(out.size(), [&](std::size_t i) { out[i] = identity_instance(s, instance_rng(cfg.seed, i, stream), check); });
    Json list = Json::array();
    double worst = 0.0;
    std::size_t failures = 0;
    for (const auto& inst : out) {
      worst = std::max(worst, inst.deviation);
      if (!(inst.deviation <= s.tolerance)) ++failures;
      list.push_back({{"N", inst.n}, {"M", inst.m}, {"deviation", inst.deviation}, {"resamples", inst.resamples}});
    }
    o.require(failures == 0);
    return Json{{"instances", out.size()}, {"failures", failures}, {"max_deviation", worst}, {"list", list}};
  };
  const Json rel = run(s.instances, 0, [&](const auto& x, const auto& y, Complex g) {
    return det_identity_check(x, y, g, s.hbar);
  });
  const Json add = run(s.gaudin_instances, 1, [&](const auto& x, const auto& y, Complex omega) {
    return gaudin_identity_check(x, y, omega, s.hbar);
  });
  o.result = {{"tolerance", s.tolerance}, {"relativistic", rel}, {"gaudin", add}};
  o.detail = std::to_string(s.instances) + " + " + std::to_string(s.gaudin_instances) +
             " instances, max deviations " + format_g(rel["max_deviation"].get<double>()) + ", " +
             format_g(add["max_deviation"].get<double>());
  return o;
}

Outcome run_simulate_rs(const RunConfig& cfg) {
  const RSSection& s = *cfg.rs;
  const RSParams params(s.eta, s.nu);
  Outcome o;
  RSState initial;
  initial.q = s.q;
  initial.qdot = s.qdot ? *s.qdot : velocities(params, s.q, *s.p);
  const Trajectory traj = integrate_flow(params, initial, s.flow);
  Json samples = Json::array();
  double trace_drift = 0.0;
  Complex trace0{};
  for (const auto& l : traj.samples.front().lax_eigenvalues) trace0 += l;
  for (const auto& smp : traj.samples) {
    Complex tr{};
    for (const auto& l : smp.lax_eigenvalues) tr += l;
    trace_drift = std::max(trace_drift, std::abs(tr - trace0));
    samples.push_back({{"t", smp.t}, {"eigenvalue_drift", smp.eigenvalue_drift}});
  }
  const double drift = traj.max_drift();
  o.require(drift <= s.drift_tolerance);
  o.result = {{"initial_qdot", to_json(*initial.qdot)},
              {"initial_spectrum", to_json(traj.samples.front().lax_eigenvalues)},
              {"final_q", to_json(traj.samples.back().q)},
              {"final_qdot", to_json(traj.samples.back().qdot)},
              {"max_eigenvalue_drift", drift},
              {"max_trace_drift", trace_drift},
              {"samples", samples}};
  if (traj.samples.size() >= 3)
    o.result["lax_pair_residual"] = lax_pair_residual(params, traj, traj.samples.size() / 2);
  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  o.csv.push_back({"trajectory", csv.str()});
  o.detail = "max eigenvalue drift " + format_g(drift);
  return o;
}

Outcome run_limit_gaudin(const RunConfig& cfg) {
  const GaudinSection& g = *cfg.gaudin;
  const SolverConfig solver = solver_for(cfg);
  Outcome o;
  Json sectors = Json::array();
  std::size_t states = 0, verified = 0;
  for (const auto& occ : resolve_sectors(g.sectors, g.spec.n, g.spec.sites())) {
    const GaudinSolutionSet set = gaudin_sector_solutions(g.spec, occ, solver);
    o.require(set.complete());
    std::vector<DualityReport> reps(set.solutions.size());
    std::vector<EpsilonConvergence> eps(set.solutions.size());
    parallel_for(set.solutions.size(), [&](std::size_t i) {
      reps[i] = verify_gaudin_duality(g.spec, set.solutions[i], cfg.tolerance);
      eps[i] = gaudin_epsilon_check(g.spec, set.solutions[i], solver);
    });
    Json j = to_json(set);
    Json reports = Json::array(), conv = Json::array();
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const bool ok = reps[i].status == "verified" && eps[i].passed;
      o.require(ok);
      ++states;
      if (ok) ++verified;
      reports.push_back(to_json(reps[i]));
      conv.push_back(to_json(eps[i]));
    }
    j["duality"] = reports;
    j["epsilon"] = conv;
    sectors.push_back(std::move(j));
  }
  std::vector<Complex> p = g.nonrel_p;
  if (p.empty()) {
    auto rng = instance_rng(cfg.seed, 0, 2);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (std::size_t i = 0; i < g.spec.sites(); ++i) p.emplace_back(u(rng), u(rng));
  }
  const NonrelLimitReport nr = nonrel_limit_check(g.spec.hbar, g.spec.q, p);
  o.require(nr.passed);
  Json nrj = to_json(nr);
  nrj["p"] = to_json(p);
  o.result = {{"spec", to_json(g.spec)}, {"sectors", sectors}, {"nonrelativistic", nrj}};
  o.detail = std::to_string(verified) + "/" + std::to_string(states) + " Gaudin states verified, nonrel slope " +
             format_g(nr.slope);
  return o;
}

Outcome run_limit_xx(const RunConfig& cfg) {
  const ChainSection& c = *cfg.xx;
  const SolverConfig solver = solver_for(cfg);
  Outcome o;
  Json sectors = Json::array();
  std::size_t states = 0, verified = 0;
  double worst_agreement = 0.0;
  for (const auto& occ : resolve_sectors(c.sectors, c.spec.n, c.spec.sites())) {
    const SolutionSet set = enumerate_sector(c.spec, occ, solver);
    std::vector<DualityReport> reps(set.solutions.size());
    std::vector<double> agreement(set.solutions.size());
    parallel_for(set.solutions.size(), [&](std::size_t i) {
      reps[i] = xx_verify_duality(c.spec, set.solutions[i], cfg.eta, cfg.tolerance);
      agreement[i] = xx_quantities(c.spec, set.solutions[i]).max_disagreement;
    });
    Json reports = Json::array();
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const bool ok = reps[i].status == "verified" && agreement[i] <= xx_agreement_tolerance;
      o.require(ok);
      ++states;
      if (ok) ++verified;
      worst_agreement = std::max(worst_agreement, agreement[i]);
      Json r = to_json(reps[i]);
      r["generic_disagreement"] = agreement[i];
      reports.push_back(std::move(r));
    }
    sectors.push_back({{"occupations", occ},
                       {"expected", set.expected},
                       {"found", set.solutions.size()},
                       {"complete", set.complete()},
                       {"reports", reports}});
  }
  o.require(states > 0);
  o.result = {{"sectors", sectors}, {"states", states}, {"verified", verified},
              {"max_generic_disagreement", worst_agreement}};
  o.detail = std::to_string(verified) + "/" + std::to_string(states) + " XX states verified";
  return o;
}

Outcome run_command(Command c, const RunConfig& cfg) {
  Outcome o;
  try {
    switch (c) {
      case Command::verify_duality:
        return run_verify_duality(cfg);
      case Command::solve_bethe:
        return run_solve_bethe(cfg);
      case Command::check_identity:
        return run_check_identity(cfg);
      case Command::simulate_rs:
        return run_simulate_rs(cfg);
      case Command::limit_gaudin:
        return run_limit_gaudin(cfg);
      case Command::limit_xx:
        return run_limit_xx(cfg);
      case Command::oracle_diag:
        return run_oracle_diag(cfg);
      case Command::full_suite:
        break;
    }
    throw Error(ErrorCode::internal, "full-suite cannot be nested");
  } catch (const Error& e) {
    o.status = "error";
    o.error = std::string(to_string(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    o.status = "error";
    o.error = std::string("internal: ") + e.what();
  }
  o.result = Json::object();
  o.detail = o.error;
  return o;
}

std::vector<Command> suite_items(const RunConfig& cfg) {
  std::vector<Command> items;
  if (cfg.chain) {
    items.push_back(Command::verify_duality);
    items.push_back(Command::solve_bethe);
    items.push_back(Command::oracle_diag);
  }
  if (cfg.identity) items.push_back(Command::check_identity);
  if (cfg.rs) items.push_back(Command::simulate_rs);
  if (cfg.gaudin) items.push_back(Command::limit_gaudin);
  if (cfg.xx) items.push_back(Command::limit_xx);
  return items;
}

std::string upper_status(const std::string& s) { return s == "pass" ? "PASS" : s == "fail" ? "FAIL" : "ERROR"; }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const char* to_string(Command c) noexcept {
  switch (c) {
    case Command::verify_duality:
      return "verify-duality";
    case Command::solve_bethe:
      return "solve-bethe";
    case Command::check_identity:
      return "check-identity";
    case Command::simulate_rs:
      return "simulate-rs";
    case Command::limit_gaudin:
      return "limit-gaudin";
    case Command::limit_xx:
      return "limit-xx";
    case Command::oracle_diag:
      return "oracle-diag";
    case Command::full_suite:
      return "full-suite";
  }
  return "unknown";
}

Command command_from_string(const std::string& s) {
  for (Command c : {Command::verify_duality, Command::solve_bethe, Command::check_identity, Command::simulate_rs,
                    Command::limit_gaudin, Command::limit_xx, Command::oracle_diag, Command::full_suite})
    if (s == to_string(c)) return c;
  throw Error(ErrorCode::schema, "config.command: unknown command \"" + s + "\"");
}

RunConfig config_from_json(const Json& j) {
  const Reader r(j, "config",
                 {"command", "seed", "tolerance", "eta", "name", "csv", "out_dir", "solver", "chain", "xx", "gaudin",
                  "identity", "rs"});
  RunConfig cfg;
  if (!r.at("command").is_string()) schema_error("config.command", "expected a string");
  cfg.command = command_from_string(r.at("command").get<std::string>());
  if (r.has("seed")) {
    const Json& s = r.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0))
      schema_error("config.seed", "expected a nonnegative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.tolerance = r.positive("tolerance", cfg.tolerance);
  cfg.eta = r.complex("eta", cfg.eta);
  if (cfg.eta == Complex{}) throw Error(ErrorCode::invariant, "config.eta: must be nonzero");
  cfg.name = r.string("name", to_string(cfg.command));
  if (cfg.name.empty()) schema_error("config.name", "must not be empty");
  if (cfg.name.find('/') != std::string::npos) schema_error("config.name", "must not contain '/'");
  cfg.csv = r.boolean("csv", false);
  cfg.out_dir = r.string("out_dir", cfg.out_dir);
  if (r.has("solver")) cfg.solver = parse_solver(r.at("solver"), "config.solver");
  if (r.has("chain")) cfg.chain = parse_chain(r.at("chain"), "config.chain", false);
  if (r.has("xx")) cfg.xx = parse_chain(r.at("xx"), "config.xx", true);
  if (r.has("gaudin")) cfg.gaudin = parse_gaudin(r.at("gaudin"), "config.gaudin");
  if (r.has("identity")) cfg.identity = parse_identity(r.at("identity"), "config.identity");
  if (r.has("rs")) cfg.rs = parse_rs(r.at("rs"), "config.rs");

  auto need = [&](bool present, const char* section) {
    if (!present) schema_error(std::string("config.") + section, std::string("required by ") + to_string(cfg.command));
  };
  switch (cfg.command) {
    case Command::verify_duality:
    case Command::solve_bethe:
    case Command::oracle_diag:
      need(cfg.chain.has_value(), "chain");
      break;
    case Command::limit_xx:
      need(cfg.xx.has_value(), "xx");
      break;
    case Command::limit_gaudin:
      need(cfg.gaudin.has_value(), "gaudin");
      break;
    case Command::simulate_rs:
      need(cfg.rs.has_value(), "rs");
      break;
    case Command::check_identity:
      if (!cfg.identity) cfg.identity = IdentitySection{};
      break;
    case Command::full_suite:
      if (suite_items(cfg).empty()) schema_error("config", "full-suite needs at least one of chain, xx, gaudin, identity, rs");
      break;
  }
  return cfg;
}

RunConfig parse_config_text(const std::string& text, const std::string& command) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::schema, std::string("config: invalid JSON: ") + e.what());
  }
  if (!command.empty()) {
    if (!j.is_object()) schema_error("config", "expected an object");
    if (j.contains("command") && !(j["command"].is_string() && j["command"].get<std::string>() == command))
      schema_error("config.command", "does not match the requested command " + command);
    j["command"] = command;
  }
  return config_from_json(j);
}

RunConfig parse_config(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), command);
}

Json config_to_json(const RunConfig& cfg) {
  Json j = Json::object();
  j["command"] = to_string(cfg.command);
  j["seed"] = cfg.seed;
  j["tolerance"] = cfg.tolerance;
  j["eta"] = to_json(cfg.eta);
  j["name"] = cfg.report_name();
  j["csv"] = cfg.csv;
  j["out_dir"] = cfg.out_dir;
  j["solver"] = to_json(cfg.solver);
  if (cfg.chain) j["chain"] = chain_json(*cfg.chain, false);
  if (cfg.xx) j["xx"] = chain_json(*cfg.xx, true);
  if (cfg.gaudin) {
    Json g = to_json(cfg.gaudin->spec);
    g["sectors"] = sectors_json(cfg.gaudin->sectors);
    if (!cfg.gaudin->nonrel_p.empty()) g["nonrel_p"] = to_json(cfg.gaudin->nonrel_p);
    j["gaudin"] = g;
  }
  if (cfg.identity) {
    const auto& s = *cfg.identity;
    j["identity"] = {{"instances", s.instances}, {"gaudin_instances", s.gaudin_instances}, {"max_sites", s.max_sites},
                     {"hbar", to_json(s.hbar)},  {"box", s.box},                           {"tolerance", s.tolerance}};
  }
  if (cfg.rs) {
    const auto& s = *cfg.rs;
    Json r = {{"eta", to_json(s.eta)}, {"nu", to_json(s.nu)}, {"q", to_json(s.q)}};
    if (s.p) r["p"] = to_json(*s.p);
    if (s.qdot) r["qdot"] = to_json(*s.qdot);
    r["flow"] = to_json(s.flow);
    r["drift_tolerance"] = s.drift_tolerance;
    j["rs"] = r;
  }
  return j;
}

RunResult run_suite(const RunConfig& cfg) {
  RunResult res;
  Json config = config_to_json(cfg);
  // The output location does not affect any computed value.
  config.erase("out_dir");
  res.report = Json::object();
  res.report["artifact"] = {{"name", "qcd"}, {"version", artifact_version}};
  res.report["command"] = to_string(cfg.command);
  res.report["config"] = config;

  std::vector<Command> items =
      cfg.command == Command::full_suite ? suite_items(cfg) : std::vector<Command>{cfg.command};
  std::vector<Outcome> outcomes(items.size());
  parallel_for(items.size(), [&](std::size_t i) { outcomes[i] = run_command(items[i], cfg); });

  int code = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    code = std::max(code, outcomes[i].exit_code());
    res.summary.push_back(std::string(to_string(items[i])) + ": " + upper_status(outcomes[i].status) + " (" +
                          outcomes[i].detail + ")");
    if (cfg.csv)
      for (auto& a : outcomes[i].csv)
        res.csv.push_back({cfg.command == Command::full_suite ? std::string(to_string(items[i])) + "." + a.suffix : a.suffix,
                           std::move(a.content)});
  }
  res.exit_code = code;
  res.report["status"] = code == 0 ? "pass" : code == 1 ? "fail" : "error";
  res.report["exit_code"] = code;
  auto item_json = [](const Outcome& o) {
    Json j = Json::object();
    j["status"] = o.status;
    j["exit_code"] = o.exit_code();
    if (!o.error.empty()) j["error"] = o.error;
    j["result"] = o.result;
    return j;
  };
  if (cfg.command == Command::full_suite) {
    Json list = Json::array();
    for (std::size_t i = 0; i < items.size(); ++i) {
      Json j = {{"command", to_string(items[i])}};
      j.update(item_json(outcomes[i]));
      list.push_back(std::move(j));
    }
    res.report["items"] = list;
  } else {
    if (!outcomes[0].error.empty()) res.report["error"] = outcomes[0].error;
    res.report["result"] = outcomes[0].result;
  }
  return res;
}

std::string write_artifacts(const RunConfig& cfg, const RunResult& result, double elapsed_seconds) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create output directory " + cfg.out_dir + ": " + ec.message());
  const std::string name = cfg.report_name();
  auto write_file = [](const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + p.string());
    out << content;
    if (!out) throw Error(ErrorCode::io, "write failed for " + p.string());
  };
  const fs::path report = fs::path(cfg.out_dir) / (name + ".json");
  write_file(report, dump_json(result.report));
  std::vector<std::string> csv_files;
  for (const auto& a : result.csv) {
    const std::string file = name + "." + a.suffix + ".csv";
    write_file(fs::path(cfg.out_dir) / file, a.content);
    csv_files.push_back(file);
  }
  Json meta = {{"report", name + ".json"},
               {"created_utc", utc_timestamp()},
               {"elapsed_seconds", elapsed_seconds},
               {"out_dir", cfg.out_dir},
               {"artifact_version", artifact_version},
               {"csv", csv_files}};
  write_file(fs::path(cfg.out_dir) / (name + ".meta.json"), dump_json(meta));
  return report.string();
}

}  // namespace qcd
