#pragma once

// Hot loops in two builds: `omp` (OpenMP work sharing) and `serial` (the
// reference used by tests and the benchmark). Both namespaces expose the same
// signatures and produce identical results up to floating-point reassociation;
// reductions are folded in index order in both.

#include "aniframe/generators.hpp"

#include <vector>

namespace aniframe {

enum class InnerProductMethod { Auto, Fourier, Spatial };

#define ANIFRAME_KERNEL_DECLS                                                                              \
  /* D(xi) = norm * sum_m |g^(T_m xi)|^2 for every point. */                                              \
  std::vector<double> calderon_values(const Generator& g, const std::vector<Mat>& transforms,            \
                                      const std::vector<Vec>& points, double norm);                       \
  /* Samples of d^beta g (beta empty: plain values) on every grid node. */                                \
  std::vector<cplx> sample(const Generator& g, const GridSpec& grid, const MultiIndex& beta);             \
  /* Grid x N matrix whose column c is scale * d^beta cols[c] on the grid. */                              \
  CMatrix sample_columns(const std::vector<Generator>& cols, const GridSpec& grid, const MultiIndex& beta, \
                         double scale);                                                                    \
  /* Entry (r, c) = <synth[c], anal[r]> by per-entry adaptive quadrature. */                               \
  CMatrix gram_direct(const std::vector<Generator>& synth, const std::vector<Generator>& anal,            \
                      InnerProductMethod method, double tol);                                             \
  /* sum_x w(x) |v(x)| */                                                                                  \
  double weighted_abs_sum(const CVector& v, const std::vector<double>& w);                                \
  /* sum over consecutive pairs along the last axis (runs of length `run`) of                              \
     (w_i + w_{i+1}) / 2 * int_0^1 |v_i + t (v_{i+1} - v_i)| dt, i.e. |.| integrated                       \
     exactly for the piecewise-linear interpolant; in units of the last-axis spacing. */                   \
  double weighted_abs_segments(const CVector& v, const std::vector<double>& w, long run);

namespace kernels::omp {
ANIFRAME_KERNEL_DECLS
}
namespace kernels::serial {
ANIFRAME_KERNEL_DECLS
}

#undef ANIFRAME_KERNEL_DECLS

}  // namespace aniframe
