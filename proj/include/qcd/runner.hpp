#pragma once

// Batch front end: configuration parsing, command execution and report
// assembly. Reports are pure functions of the configuration; the wall-clock
// timestamp lives only in the sidecar written next to the report.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcd/json_io.hpp"

namespace qcd {

enum class Command {
  verify_duality,
  solve_bethe,
  check_identity,
  simulate_rs,
  limit_gaudin,
  limit_xx,
  oracle_diag,
  full_suite,
};

const char* to_string(Command c) noexcept;
Command command_from_string(const std::string& s);

/// Occupation vectors to process; `all` selects every monotone sector.
struct SectorSelection {
  bool all = false;
  std::vector<std::vector<int>> list;
  bool operator==(const SectorSelection&) const = default;
};

struct ChainSection {
  ChainSpec spec;
  SectorSelection sectors;
  /// Explicit roots for verify-duality; when present no solving is done.
  std::vector<BetheRoots> roots;
  bool operator==(const ChainSection&) const = default;
};

struct GaudinSection {
  GaudinSpec spec;
  SectorSelection sectors;
  /// Momenta for the non-relativistic limit check; seeded when empty.
  std::vector<Complex> nonrel_p;
  bool operator==(const GaudinSection&) const = default;
};

struct IdentitySection {
  int instances = 200;
  int gaudin_instances = 100;
  int max_sites = 6;
  Complex hbar{0.3, 0.1};
  double box = 1.0;
  double tolerance = 1e-9;
  bool operator==(const IdentitySection&) const = default;
};

struct RSSection {
  Complex eta{1.0, 0.0};
  Complex nu{};
  std::vector<Complex> q;
  std::optional<std::vector<Complex>> p;
  std::optional<std::vector<Complex>> qdot;
  FlowConfig flow;
  double drift_tolerance = 1e-7;
  bool operator==(const RSSection&) const = default;
};

struct RunConfig {
  Command command = Command::verify_duality;
  std::uint64_t seed = 1;
  /// End-to-end spectrum tolerance.
  double tolerance = 1e-7;
  /// Substitution parameter for the relativistic duality.
  Complex eta{1.0, 0.0};
  std::string out_dir = ".";
  /// Report base name; defaults to the command name.
  std::string name;
  bool csv = false;
  SolverConfig solver;
  std::optional<ChainSection> chain;
  std::optional<ChainSection> xx;
  std::optional<GaudinSection> gaudin;
  std::optional<IdentitySection> identity;
  std::optional<RSSection> rs;

  std::string report_name() const { return name.empty() ? to_string(command) : name; }
  bool operator==(const RunConfig&) const = default;
};

/// Raises Error(schema) naming the field path, Error(invariant) quoting the
/// violated clause, or Error(io) when the file cannot be read. A nonempty
/// `command` supplies the command; the file's own command must then be
/// absent or equal.
RunConfig parse_config(const std::string& path, const std::string& command = "");
RunConfig parse_config_text(const std::string& text, const std::string& command = "");
RunConfig config_from_json(const Json& j);
/// Canonical form with every default filled in.
Json config_to_json(const RunConfig& cfg);

struct CsvArtifact {
  std::string suffix;
  std::string content;
};

struct RunResult {
  /// 0 pass, 1 verification failure, 2 configuration or runtime error.
  int exit_code = 0;
  Json report;
  std::vector<CsvArtifact> csv;
  /// One line per item for terminal output.
  std::vector<std::string> summary;
};

inline constexpr const char* artifact_version = QCD_VERSION;

RunResult run_suite(const RunConfig& cfg);

/// Writes <name>.json, <name>.meta.json and the CSV artifacts into out_dir.
/// Returns the report path.
std::string write_artifacts(const RunConfig& cfg, const RunResult& result, double elapsed_seconds);

}  // namespace qcd
