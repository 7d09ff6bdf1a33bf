#pragma once

#include "aniframe/types.hpp"

#include <span>
#include <vector>

namespace aniframe {

enum class QuasiNormMode { Step, Smooth };

/// A validated expansive dilation matrix together with the spectral data
/// every other module needs. Immutable once built by validate_dilation().
struct DilationInfo {
  Mat matrix;
  Mat inverse;
  int dimension = 0;
  double determinant_abs = 0.0;  // b = |det A|
  std::vector<cplx> eigenvalues;  // ascending modulus
  double lambda_min_mod = 0.0;
  double lambda_max_mod = 0.0;
  double condition_number = 0.0;  // spectral-norm kappa
  QuasiNormMode quasi_norm_mode = QuasiNormMode::Step;
  Mat shape_matrix;  // M = sum_m (A^-m)^T A^-m
  int shape_terms = 0;

  // Real eigendecomposition A = V diag(lambda) V^-1, present only when A is
  // real-diagonalizable (needed by Smooth mode).
  bool real_diagonalizable = false;
  Mat eigvec;
  Mat eigvec_inv;
  Vec real_eigenvalues;

  bool is_integer = false;  // all entries integral (enables lattice-exact FFT paths)

  /// A^j for any integer j.
  Mat power(int j) const;
  /// The transposed dilation A* with the same mode.
  DilationInfo transpose() const;
};

struct QuasiNormValue {
  double value = 0.0;
  int integer_scale = 0;  // meaningful in Step mode
  bool has_integer_scale = false;
};

DilationInfo validate_dilation(const Mat& matrix, QuasiNormMode mode = QuasiNormMode::Step);
DilationInfo validate_dilation(const std::vector<std::vector<double>>& rows,
                               QuasiNormMode mode = QuasiNormMode::Step);

/// Anisotropic quasi-norm rho_A in the mode recorded in d.
QuasiNormValue quasi_norm(const DilationInfo& d, const Vec& x);
QuasiNormValue quasi_norm(const DilationInfo& d, const Vec& x, QuasiNormMode mode);

/// Continuous scale coordinate tau with tau(A x) = tau(x) + 1. Equals
/// log_b rho_A in Smooth mode; for matrices without a real eigenbasis it
/// interpolates log-linearly inside each shell of the step quasi-norm.
double level_function(const DilationInfo& d, const Vec& x);

/// M-norm ||y||_M = sqrt(y^T M y).
double shape_norm(const DilationInfo& d, const Vec& y);

int max_vanishing_order(double p, const DilationInfo& d);

struct DistortionReport {
  double lower_exponent = 0.0;  // ln b / ln|lambda_1|
  double upper_exponent = 0.0;  // ln b / ln|lambda_n|
  double constant = 1.0;        // smallest C making the sandwich hold
  std::vector<double> rho;
  std::vector<double> euclid;
};

DistortionReport distortion_check(const DilationInfo& d, std::span<const Vec> samples);

/// Exact spectral condition number of a 2x2 matrix via its singular values.
double condition_number_2x2(const Mat& m);

}  // namespace aniframe
