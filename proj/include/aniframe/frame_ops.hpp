#pragma once

#include "aniframe/generators.hpp"
#include "aniframe/kernels.hpp"
#include "aniframe/lattice.hpp"

#include <cstdint>
#include <vector>

namespace aniframe {

struct FrameSystem {
  Generator synthesizer;  // psi
  Generator analyzer;     // phi
  DilationInfo dilation;
  TruncationWindow window;
};

/// <f, g> = int f conj(g). Fourier: Plancherel with the (2 pi)^-n factor.
/// Auto picks Fourier whenever both transforms are available.
cplx inner_product(const Generator& f, const Generator& g, InnerProductMethod method, double tol);

/// psi_Q for every Q of the window, in enumeration order.
std::vector<Generator> window_elements(const Generator& g, const DilationInfo& d, const TruncationWindow& w);

enum class GramPath { Auto, Direct, Fft };

/// m_{Q,P} = <psi_P, phi_Q>. Auto uses the lattice-exact FFT path for integer
/// dilations with Fourier access, per-entry quadrature otherwise.
GramMatrix gram_matrix(const FrameSystem& sys, double tol, GramPath path = GramPath::Auto);
/// Serial per-entry quadrature; the reference for the parallel and FFT paths.
GramMatrix gram_matrix_reference(const FrameSystem& sys, double tol);

enum class AnalysisPath { Auto, Direct, Fourier };

/// <f, phi_Q> for every Q by Riemann sum on f's grid. The Fourier path gives
/// the same sums for a diagonal dilation and an analyzer band-limited to
/// [-pi, pi]^n: per scale it evaluates the grid transform of f on A*^j eta
/// (separable DFTs) and recovers every k with one inverse FFT. Auto takes it
/// whenever it applies.
CVector analysis_coefficients(const FrameSystem& sys, const GridFunction& f, AnalysisPath path = AnalysisPath::Auto);
/// sum_Q c_Q psi_Q sampled on `grid`.
GridFunction synthesize(const FrameSystem& sys, const CVector& coeffs, const GridSpec& grid);
/// Fraction of coefficient energy carried by window-boundary indices.
double boundary_energy_fraction(const TruncationWindow& w, const CVector& coeffs);

/// U f = sum_Q <f, phi_Q> psi_Q on f's grid. Throws WindowTooSmall when the
/// boundary indices carry more than `gate` of the coefficient energy.
GridFunction frame_apply(const FrameSystem& sys, const GridFunction& f, double gate = 0.01);

struct PowerIterationResult {
  double sigma = 0.0;
  int iterations = 0;
};

/// Largest singular value of E via power iteration on E^H E from a seeded
/// start vector; stops when the Rayleigh value moves by < tol (relative).
PowerIterationResult spectral_norm(const CMatrix& E, double tol = 1e-10, int max_iter = 10000,
                                   std::uint64_t seed = 20240607);

struct AlmostDiagonalParams {
  double delta = 1.0;
  double eps = 0.5;
  double p = 1.0;
};

struct Deviation {
  double spectral = 0.0;
  double algebra_proxy = 0.0;
  int iterations = 0;
};

/// (ref I - S) / ref measured in the spectral norm and by its C_M fit.
Deviation deviation_from_identity(const GramMatrix& S, double ref_diag, const DilationInfo& d,
                                  const AlmostDiagonalParams& ad = {}, std::uint64_t seed = 20240607);

struct NeumannResult {
  CMatrix inverse;
  int terms_used = 0;
  double tail_bound = 0.0;
  double q = 0.0;
};

/// S^-1 ~ ref^-1 sum_{m=0}^{N} (I - S/ref)^m with the smallest N giving
/// q^{N+1}/(1-q) < tol, capped at max_terms - 1.
NeumannResult neumann_invert(const CMatrix& S, double ref_diag, double q_bound, double tol, int max_terms);

/// Hermitian perturbation with entries u_{QP} omega(Q, P), u uniform on
/// [-1, 1]^2 from a seeded engine, scaled to unit spectral norm.
CMatrix almost_diagonal_noise(const TruncationWindow& w, const DilationInfo& d, const AlmostDiagonalParams& ad,
                              std::uint64_t seed);

struct DualReport {
  std::vector<GridFunction> dual_samples;
  std::vector<long> sampled_indices;
  AlmostDiagonalFit fit_S;
  AlmostDiagonalFit fit_Sinv;
};

/// phi*_Q = sum_P (S^-1)_{Q,P} phi_P on `grid` for the requested rows (all
/// rows when `which` is empty), plus decay fits of S and S^-1.
DualReport dual_from_inverse(const CMatrix& S_inv, const CMatrix& S, const FrameSystem& sys, const GridSpec& grid,
                             const AlmostDiagonalParams& ad = {}, const std::vector<long>& which = {});

}  // namespace aniframe
