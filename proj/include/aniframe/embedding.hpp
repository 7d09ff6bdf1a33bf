#pragma once

#include "aniframe/frame_ops.hpp"
#include "aniframe/molecular.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace aniframe {

/// (sum |f|^q cell)^{1/q}.
double lq_norm(const GridFunction& f, double q);

/// Indices (j, k), j in [j_min, j_max], whose cube meets the box [lo, hi]
/// widened by margin * ||A^-j|| (the spatial spread of a scale-j element).
TruncationWindow footprint_window(const DilationInfo& d, int j_min, int j_max, const Vec& lo, const Vec& hi,
                                  double margin);

struct ProxyResult {
  double norm = 0.0;
  double boundary_fraction = 0.0;
  CoefficientSequence coefficients;
};

/// f_p sequence norm (grid-free form) of the analysis coefficients of f against the auxiliary
/// frame on `window`. Throws WindowTooSmall when boundary indices carry more
/// than `gate` of the coefficient energy.
ProxyResult hp_proxy(const GridFunction& f, const DilationInfo& d, double p, const TruncationWindow& window,
                     const Generator& aux, double gate = 0.05);
double hp_proxy_norm(const GridFunction& f, const DilationInfo& d, double p, const TruncationWindow& window,
                     const Generator& aux, double gate = 0.05);

/// Mean-zero Haar-type atom on Q_{j,k}: +|Q|^{-1/p} on the half with
/// (A^j x - k)_0 < 1/2 and the negative value on the other half, averaged over
/// each grid cell. The grid covers the cube plus one cell on each side with
/// `cells_per_edge` cells across the finest cube edge.
GridFunction haar_atom(const DilationInfo& d, const LatticeIndex& idx, double p, long cells_per_edge = 64);

/// A scanned function with the auxiliary scale range its proxy norm uses.
/// Atoms take [j - 2, j + 6] around their native scale j, so rescaled atoms
/// see the same relative truncation and the finest level matches the atom's
/// grid cell. Smooth syntheses take [-3, 4], past which their energy is
/// below 1e-5.
struct TestFunction {
  std::string label;
  GridFunction f;
  int j_lo = -2;
  int j_hi = 6;
};

struct TestFamilySpec {
  std::vector<int> atom_scales{0, 1, 2};
  long cells_per_edge = 64;
  int random_count = 3;
  int random_nonzeros = 3;
  int random_j_min = 0;
  int random_j_max = 1;
  int atom_rel_lo = -2;
  int atom_rel_hi = 6;
  int smooth_lo = -3;
  int smooth_hi = 4;
  long random_k_radius = 1;
  double random_half_width = 8.0;
  double random_step = 1.0 / 16.0;
  std::uint64_t seed = 20240607;
};

/// Haar atoms at the requested scales (the finest labelled as the worst-case
/// geometry) plus random sparse syntheses sum_Q s_Q psi_Q.
std::vector<TestFunction> default_test_family(const Generator& psi, const DilationInfo& d, double p,
                                              const TestFamilySpec& spec);

struct EmbeddingRow {
  std::string label;
  double lq = 0.0;
  double hp_proxy = 0.0;
  double ratio = 0.0;
  double boundary_fraction = 0.0;
};

struct EmbeddingReport {
  double p = 1.0;
  double q = 2.0;
  std::vector<EmbeddingRow> rows;
  std::vector<std::string> excluded;  // labels dropped with ZeroNorm
  double C_opt_estimate = 0.0;
  double M_factor = 0.0;
  double K_estimate = 0.0;
  double K_spread = 0.0;  // max / min of per-function ratio / M
};

struct ScanOptions {
  double margin = 3.0;  // footprint widening, in units of the element scale
  double gate = 0.05;
};

/// L^q / H^p-proxy ratios over the family, C_opt = max ratio and
/// K = C_opt / M_factor.
EmbeddingReport embedding_scan(const std::vector<TestFunction>& family, const DilationInfo& d, double p, double q,
                               const Generator& aux, double M_factor, const ScanOptions& opt = {});

/// Same with M_factor = ||psi|| + ||dual|| (dual sampled on a grid).
EmbeddingReport embedding_scan(const Generator& psi, const GridFunction& dual, const DilationInfo& d, double p,
                               double q, const std::vector<TestFunction>& family, const MolecularParams& mol,
                               const ScanOptions& opt = {});

}  // namespace aniframe
