#pragma once

// JSON encoding of the library's value types. Complex numbers are objects
// {re, im}; floating-point values are written with 17 significant digits.

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qcd/bethe_solver.hpp"
#include "qcd/duality.hpp"
#include "qcd/limits.hpp"
#include "qcd/operator_oracle.hpp"
#include "qcd/rs_model.hpp"

namespace qcd {

using Json = nlohmann::ordered_json;

/// Deterministic text: two-space indent, 17 significant digits, non-finite
/// numbers as null, trailing newline.
std::string dump_json(const Json& j);

Json to_json(Complex z);
Json to_json(std::span<const Complex> values);
Json to_json(const std::vector<double>& values);
Json to_json(const ChainSpec& spec);
Json to_json(const GaudinSpec& spec);
Json to_json(const BetheRoots& roots);
Json to_json(const SolverConfig& cfg);
Json to_json(const FlowConfig& cfg);
Json to_json(const StringSpectrum& s);
Json to_json(const DualityReport& r);
Json to_json(const SolutionSet& s);
Json to_json(const SumRuleReport& r);
Json to_json(const SectorSpectrum& s);
Json to_json(const EpsilonConvergence& e);
Json to_json(const NonrelLimitReport& r);
Json to_json(const GaudinSolutionSet& s);

const char* to_string(FlowRegime regime) noexcept;

// Readers raise Error(schema) with the offending field path in the message.
Complex complex_from_json(const Json& j, const std::string& path);
std::vector<Complex> complex_list_from_json(const Json& j, const std::string& path);
BetheRoots roots_from_json(const Json& j, const std::string& path);
FlowRegime flow_regime_from_string(const std::string& s, const std::string& path);

}  // namespace qcd
