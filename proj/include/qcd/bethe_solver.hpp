#pragma once

// Numerical solution of the nested Bethe equations: damped Newton on the
// cleared polynomial system, continuation from the free-fermion point
// hbar = i pi / 2, and sector enumeration with a seeded multistart fallback.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qcd/bethe_system.hpp"
#include "qcd/xxz_bethe.hpp"

namespace qcd {

struct SolverConfig {
  double newton_tol = 1e-12;
  int max_newton_iters = 60;
  double damping = 0.5;
  int max_halvings = 20;
  int homotopy_steps = 40;
  double dedup_radius = 1e-7;
  std::uint64_t seed = 1;
  int multistart_attempts = 1000;
  double min_locus_distance = 1e-8;

  void validate() const;
  bool operator==(const SolverConfig&) const = default;
};

struct NewtonResult {
  std::vector<Complex> x;
  double residual = 0.0;
  int iterations = 0;
};

/// Damped Newton with backtracking on |LHS - RHS|. Raises convergence,
/// singular_system or excluded_locus errors.
NewtonResult newton_solve(const BetheSystem& system, std::vector<Complex> x0, const SolverConfig& cfg);

NewtonResult newton_refine_detailed(const ChainSpec& spec, const BetheRoots& roots, const SolverConfig& cfg);
BetheRoots newton_refine(const ChainSpec& spec, const BetheRoots& roots, const SolverConfig& cfg);

struct SolutionDiagnostics {
  double residual = 0.0;
  double locus_distance = 0.0;
  /// "tracked", "tracked-collided" or "multistart".
  std::string path_status;
};

struct LostBranch {
  std::size_t start_index = 0;
  std::string stage;  ///< "anisotropy" (tracking) or "polish" (final Newton)
  double last_good = 0.0;
  std::string reason;
};

struct SolutionSet {
  ChainSpec spec;
  std::vector<int> occupations;
  std::vector<BetheRoots> solutions;
  std::vector<SolutionDiagnostics> diagnostics;
  std::size_t expected = 0;
  std::size_t starts = 0;
  std::size_t collisions = 0;
  /// Multistart endpoints rejected by the ratio-form check.
  std::size_t spurious = 0;
  std::vector<LostBranch> lost;
  bool complete() const { return solutions.size() == expected; }
};

/// Generic predictor-corrector tracking of x(s), s in [0, 1], for a family of
/// systems. Returns false and sets `last_good` when the step size collapses.
bool track_path(const std::function<BetheSystem(double)>& family, std::vector<Complex>& x,
                const SolverConfig& cfg, double& last_good, std::string& reason);

/// Anisotropy path from i pi / 2 to the target. bulge = +/-1 adds the arc
/// 0.3 * 4 s (1 - s) * (+/- i) * d / |d| with d the straight displacement.
Complex anisotropy_path(Complex target, double s, int bulge);
/// True if the straight segment passes within 0.05 (in |sinh|) of 0 mod i pi.
bool anisotropy_path_needs_bulge(Complex target);

/// All distinct-root starts of the triangular system at hbar = i pi / 2 with
/// next-level couplings switched off, as exponentiated unknowns.
std::vector<std::vector<Complex>> free_fermion_starts(const ChainSpec& spec, std::span<const int> occupations);

SolutionSet homotopy_from_xx(const ChainSpec& spec, std::span<const int> occupations, const SolverConfig& cfg);
SolutionSet enumerate_sector(const ChainSpec& spec, std::span<const int> occupations, const SolverConfig& cfg);

/// Level-wise unordered comparison in exponentiated variables,
/// |dt| / max(1, |t|) <= radius.
bool same_solution(const BetheRoots& a, const BetheRoots& b, double radius);
/// Sorts roots within each level by exp(2 mu) (re, then im).
BetheRoots canonical_roots(const BetheRoots& r);

}  // namespace qcd
