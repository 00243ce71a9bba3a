#pragma once

// Dense ground truth on the n^N dimensional chain Hilbert space: R-matrix,
// transfer operator, residue Hamiltonians and their joint spectra per weight
// sector. Basis states are words s_1 ... s_N with letters 0..n-1, site 1 the
// most significant digit.

#include <cstdint>
#include <span>
#include <vector>

#include "qcd/numerics.hpp"
#include "qcd/xxz_bethe.hpp"

namespace qcd {

inline constexpr std::size_t oracle_dimension_cap = 1024;

/// n^N, raising dimension_cap above 1024.
std::size_t hilbert_dimension(int n, std::size_t sites);

/// n^2 x n^2 matrix on aux (x) site, row index a0 * n + a1.
CMatrix r_matrix(int n, Complex hbar, Complex z);

/// tr_0 [V_0 R_01(z - q_1) ... R_0N(z - q_N)].
CMatrix transfer_operator(const ChainSpec& spec, Complex z);

/// Diagonal number operator M_a = sum_j e_aa^(j); `a` is 0-based.
CMatrix weight_operator(int n, std::size_t sites, int a);

struct ResidueDecomposition {
  CMatrix C;
  std::vector<CMatrix> H;
  /// Max relative entry misfit of C + sum_k H_k coth(z - q_k) at a held-out z.
  double heldout_error = 0.0;
};

/// Fits T(z) = C + sum_k H_k coth(z - q_k) entrywise from N+1 samples.
/// Raises resample_points if no sample rotation gives a well-conditioned
/// basis or the held-out misfit exceeds 1e-9.
ResidueDecomposition residue_hamiltonians(const ChainSpec& spec);

/// Basis indices with M_a letters equal to a.
std::vector<std::size_t> sector_basis(int n, std::size_t sites, const WeightVector& weights);
/// All weight vectors of N sites over n letters, in lexicographically
/// decreasing order starting from (N, 0, ..., 0).
std::vector<WeightVector> all_weights(int n, std::size_t sites);

struct SectorState {
  std::vector<Complex> H_values;
  Complex constant_C{};
};

struct SectorSpectrum {
  WeightVector weights;
  std::size_t dimension = 0;
  std::vector<SectorState> states;
  /// Number of extra random combinations needed.
  int retries = 0;
  double off_diagonal = 0.0;
};

/// Joint eigenvalues of commuting operators on a weight sector, through one
/// random linear combination (up to 5 retries before a degeneracy error).
/// States are ordered by their H-value sequences.
SectorSpectrum joint_sector_spectrum(std::span<const CMatrix> ops, const CMatrix* constant, int n,
                                     std::size_t sites, const WeightVector& weights, std::uint64_t seed);

SectorSpectrum sector_spectra(const ChainSpec& spec, const WeightVector& weights, std::uint64_t seed = 1);
SectorSpectrum sector_spectra(const ResidueDecomposition& residues, const ChainSpec& spec,
                              const WeightVector& weights, std::uint64_t seed = 1);

struct CommutativityReport {
  double transfer = 0.0;      ///< max |[T(z), T(z')]|
  double hamiltonians = 0.0;  ///< max |[H_i, H_j]|
  double weights = 0.0;       ///< max |[H_i, M_a]| and |[T(z), M_a]|
};
CommutativityReport commutativity_report(const ChainSpec& spec);

/// H_i = sum_a v_a e_aa^(i) + sum_{j != i} hbar / sinh(q_ij)
///       (sum_{a != b} e_ab^(i) e_ba^(j) + cosh(q_ij) sum_a e_aa^(i) e_aa^(j)).
std::vector<CMatrix> gaudin_operators(int n, std::span<const Complex> q, std::span<const Complex> v,
                                      Complex hbar);

}  // namespace qcd
