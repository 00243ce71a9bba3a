#include "qcd/json_io.hpp"

#include <charconv>
#include <cmath>

#include "qcd/error.hpp"

namespace qcd {

namespace {

void write_number(std::string& out, double d) {
  if (!std::isfinite(d)) {
    out += "null";
    return;
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::general, 17);
  std::string s(buf, res.ptr);
  // Keep floats recognizable as floats on re-read.
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  out += s;
}

void write(std::string& out, const Json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        write(out, it.value(), depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write(out, j[i], depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float:
      write_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::schema, path + ": " + what);
}

Json spec_json(const DualityReport& r) {
  if (r.regime == "gaudin")
    return {{"n", r.spec.n}, {"q", to_json(r.spec.q)}, {"v", to_json(r.spec.V)}, {"hbar", to_json(r.spec.hbar)}};
  return to_json(r.spec);
}

}  // namespace

std::string dump_json(const Json& j) {
  std::string out;
  write(out, j, 0);
  out += "\n";
  return out;
}

Json to_json(Complex z) {
  Json j = Json::object();
  j["re"] = z.real();
  j["im"] = z.imag();
  return j;
}

Json to_json(std::span<const Complex> values) {
  Json j = Json::array();
  for (const auto& z : values) j.push_back(to_json(z));
  return j;
}

Json to_json(const std::vector<double>& values) {
  Json j = Json::array();
  for (double v : values) j.push_back(v);
  return j;
}

Json to_json(const ChainSpec& spec) {
  return {{"n", spec.n}, {"q", to_json(spec.q)}, {"V", to_json(spec.V)}, {"hbar", to_json(spec.hbar)}};
}

Json to_json(const GaudinSpec& spec) {
  return {{"n", spec.n}, {"q", to_json(spec.q)}, {"v", to_json(spec.v)}, {"hbar", to_json(spec.hbar)}};
}

Json to_json(const BetheRoots& roots) {
  Json levels = Json::array();
  for (const auto& l : roots.levels) levels.push_back(to_json(l));
  return {{"occupations", roots.occupations}, {"levels", levels}};
}

Json to_json(const SolverConfig& c) {
  return {{"newton_tol", c.newton_tol},
          {"max_newton_iters", c.max_newton_iters},
          {"damping", c.damping},
          {"max_halvings", c.max_halvings},
          {"homotopy_steps", c.homotopy_steps},
          {"dedup_radius", c.dedup_radius},
          {"multistart_attempts", c.multistart_attempts},
          {"min_locus_distance", c.min_locus_distance}};
}

const char* to_string(FlowRegime regime) noexcept {
  switch (regime) {
    case FlowRegime::generic:
      return "generic";
    case FlowRegime::infinite_coupling:
      return "infinite-coupling";
    case FlowRegime::half_period:
      return "half-period";
  }
  return "generic";
}

FlowRegime flow_regime_from_string(const std::string& s, const std::string& path) {
  if (s == "generic") return FlowRegime::generic;
  if (s == "infinite-coupling") return FlowRegime::infinite_coupling;
  if (s == "half-period") return FlowRegime::half_period;
  schema_error(path, "expected one of generic, infinite-coupling, half-period");
}

Json to_json(const FlowConfig& c) {
  return {{"t_end", c.t_end},       {"dt", c.dt},           {"adaptive", c.adaptive},
          {"step_tolerance", c.step_tolerance}, {"samples", c.samples}, {"regime", to_string(c.regime)}};
}

Json to_json(const StringSpectrum& s) {
  return {{"values", to_json(s.values)}, {"group_sizes", s.group_sizes}};
}

Json to_json(const DualityReport& r) {
  Json j = Json::object();
  j["regime"] = r.regime;
  j["spec"] = spec_json(r);
  j["occupations"] = r.occupations;
  j["roots"] = r.roots ? to_json(*r.roots) : Json(nullptr);
  j["H_values"] = to_json(r.H_values);
  j["predicted"] = to_json(r.predicted.values);
  j["predicted_group_sizes"] = r.predicted.group_sizes;
  j["computed"] = to_json(r.lax_eigenvalues);
  j["max_match_distance"] = r.max_match_distance;
  j["spectral_residuals"] = to_json(r.spectral_residuals);
  j["max_spectral_residual"] = r.max_spectral_residual;
  j["bethe_residual"] = r.bethe_residual;
  j["roots_verified"] = r.roots_verified;
  j["status"] = r.status;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

Json to_json(const SolutionSet& s) {
  Json sols = Json::array();
  for (std::size_t i = 0; i < s.solutions.size(); ++i) {
    Json e = {{"roots", to_json(s.solutions[i])}};
    if (i < s.diagnostics.size()) {
      const auto& d = s.diagnostics[i];
      e["residual"] = d.residual;
      e["locus_distance"] = d.locus_distance;
      e["path_status"] = d.path_status;
    }
    sols.push_back(std::move(e));
  }
  Json lost = Json::array();
  for (const auto& l : s.lost)
    lost.push_back({{"start_index", l.start_index}, {"stage", l.stage}, {"last_good", l.last_good}, {"reason", l.reason}});
  return {{"occupations", s.occupations}, {"expected", s.expected},   {"found", s.solutions.size()},
          {"complete", s.complete()},    {"starts", s.starts},       {"collisions", s.collisions},
          {"spurious", s.spurious},      {"solutions", sols},        {"lost", lost}};
}

Json to_json(const SumRuleReport& r) {
  return {{"C", to_json(r.C)},
          {"C_expected", to_json(r.C_expected)},
          {"H_sum", to_json(r.H_sum)},
          {"H_sum_expected", to_json(r.H_sum_expected)},
          {"C_deviation", r.C_deviation},
          {"H_sum_deviation", r.H_sum_deviation}};
}

Json to_json(const SectorSpectrum& s) {
  Json states = Json::array();
  for (const auto& st : s.states) states.push_back({{"H_values", to_json(st.H_values)}, {"C", to_json(st.constant_C)}});
  return {{"weights", s.weights.M}, {"dimension", s.dimension}, {"retries", s.retries},
          {"off_diagonal", s.off_diagonal}, {"states", states}};
}

Json to_json(const EpsilonConvergence& e) {
  return {{"eps", to_json(e.eps)},
          {"hamiltonian_deviation", to_json(e.hamiltonian_deviation)},
          {"spectrum_deviation", to_json(e.spectrum_deviation)},
          {"hamiltonian_slope", e.hamiltonian_slope},
          {"spectrum_slope", e.spectrum_slope},
          {"spectrum_exact", e.spectrum_exact},
          {"passed", e.passed}};
}

Json to_json(const NonrelLimitReport& r) {
  return {{"etas", to_json(r.etas)}, {"deviations", to_json(r.deviations)}, {"slope", r.slope}, {"passed", r.passed}};
}

Json to_json(const GaudinSolutionSet& s) {
  Json sols = Json::array();
  for (const auto& r : s.solutions) sols.push_back(to_json(r));
  return {{"occupations", s.occupations}, {"expected", s.expected}, {"found", s.solutions.size()},
          {"complete", s.complete()},    {"lost", s.lost},         {"solutions", sols}};
}

Complex complex_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_object()) schema_error(path, "expected a complex number {re, im}");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "re" && it.key() != "im") schema_error(path + "." + it.key(), "unknown field");
  if (!j.contains("re") || !j["re"].is_number()) schema_error(path + ".re", "expected a number");
  if (!j.contains("im") || !j["im"].is_number()) schema_error(path + ".im", "expected a number");
  const Complex z{j["re"].get<double>(), j["im"].get<double>()};
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) schema_error(path, "non-finite value");
  return z;
}

std::vector<Complex> complex_list_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of complex numbers");
  std::vector<Complex> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(complex_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

BetheRoots roots_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object {occupations, levels}");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "occupations" && it.key() != "levels") schema_error(path + "." + it.key(), "unknown field");
  if (!j.contains("occupations") || !j["occupations"].is_array()) schema_error(path + ".occupations", "expected an array");
  if (!j.contains("levels") || !j["levels"].is_array()) schema_error(path + ".levels", "expected an array");
  BetheRoots r;
  const Json& occ = j["occupations"];
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (!occ[i].is_number_integer() || occ[i].get<long long>() < 0)
      schema_error(path + ".occupations[" + std::to_string(i) + "]", "expected a nonnegative integer");
    r.occupations.push_back(occ[i].get<int>());
  }
  const Json& lv = j["levels"];
  for (std::size_t b = 0; b < lv.size(); ++b)
    r.levels.push_back(complex_list_from_json(lv[b], path + ".levels[" + std::to_string(b) + "]"));
  if (r.levels.size() != r.occupations.size()) schema_error(path + ".levels", "one level per occupation required");
  for (std::size_t b = 0; b < r.levels.size(); ++b)
    if (r.levels[b].size() != static_cast<std::size_t>(r.occupations[b]))
      schema_error(path + ".levels[" + std::to_string(b) + "]", "length differs from its occupation");
  return r;
}

}  // namespace qcd
