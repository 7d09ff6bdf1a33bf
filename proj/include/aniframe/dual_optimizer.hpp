#pragma once

#include "aniframe/frame_ops.hpp"
#include "aniframe/molecular.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace aniframe {

/// Column Q holds psi_Q sampled on `grid`, times sqrt(cell volume), so that
/// matrix l2 norms approximate L2 norms.
struct SynthesisMatrix {
  TruncationWindow window;
  GridSpec grid;
  CMatrix entries;
  std::vector<Generator> elements;
  double sqrt_vol = 1.0;
};

/// Throws GridTooCoarse when the grid spacing exceeds twice the finest
/// element's trapezoid step.
SynthesisMatrix discretize_synthesis(const Generator& psi, const DilationInfo& d, const TruncationWindow& w,
                                     const GridSpec& grid);

/// Spectral data of a synthesis matrix, from a thin QR followed by an SVD of R.
struct SynthesisSvd {
  Eigen::VectorXd sigma;  // descending
  CMatrix V;              // right singular vectors, columns
};
SynthesisSvd synthesis_svd(const SynthesisMatrix& S);

struct CanonicalDual {
  std::vector<GridFunction> duals;  // function samples, one per window index
  CMatrix coefficients;             // column Q: expansion of the dual in the psi_P
  double condition_number = 0.0;    // sigma_max / sigma_min over all singular values
  bool rank_deficient = false;
  std::vector<std::string> warnings;
};

/// Least-squares (normal-equation) duals phi_Q = sum_P psi_P [(S^H S + mu)^-1]_{P,Q},
/// the inverse taken on the range of S^H S; mu = 1e-10 sigma_max^2.
CanonicalDual canonical_dual(const SynthesisMatrix& S, double kernel_tol = 1e-8);

struct KernelBasis {
  CMatrix vectors;  // orthonormal columns spanning ker S
  int dimension = 0;
};

/// Right singular vectors with sigma <= tol * sigma_max.
KernelBasis kernel_basis(const SynthesisMatrix& S, double tol = 1e-8);

enum class ObjectiveKind { MolecularNorm, AlgebraProxy };
const char* to_string(ObjectiveKind k);
ObjectiveKind objective_kind_from_string(const std::string& s);

struct OptimizerOptions {
  ObjectiveKind kind = ObjectiveKind::MolecularNorm;
  MolecularParams molecular;
  AlmostDiagonalParams ad;
  int max_iter = 200;
  double el_tol = 1e-4;
  double fd_step = 1e-5;  // relative central-difference step
  double kernel_tol = 1e-8;
  long reference = -1;    // window position of the optimized dual; -1: first (0, 0)
};

/// Objective over the real coordinates (Re c_1, Im c_1, Re c_2, ...) of the
/// kernel coefficients. `parts` returns the competing terms whose maximum is
/// the objective (one per multi-index for MolecularNorm, a single term
/// otherwise); `offset` is added to that maximum.
class DualObjective {
 public:
  DualObjective(const Generator& psi, const DilationInfo& d, const TruncationWindow& w, const GridSpec& grid,
                const OptimizerOptions& opt);

  int dimension() const { return 2 * kernel_.dimension; }
  const KernelBasis& kernel() const { return kernel_; }
  const CanonicalDual& canonical() const { return canonical_; }
  long reference() const { return ref_; }
  double offset() const { return offset_; }

  std::vector<double> parts(const Eigen::VectorXd& x) const;
  double operator()(const Eigen::VectorXd& x) const;
  /// Expansion coefficients of the reference dual in the psi_P.
  CVector dual_coefficients(const Eigen::VectorXd& x) const;
  GridFunction dual_samples(const Eigen::VectorXd& x) const;
  /// Central-difference gradient; where several parts tie for the maximum
  /// within 1e-12 (relative) their gradients are averaged. `active` receives
  /// the index of the maximal part.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x, double rel_step, int* active = nullptr) const;

 private:
  ObjectiveKind kind_;
  SynthesisMatrix S_;
  CanonicalDual canonical_;
  KernelBasis kernel_;
  long ref_ = 0;
  double offset_ = 0.0;
  CVector base_coef_;
  CMatrix dir_coef_;  // column i: coefficient direction of kernel coordinate i
  // MolecularNorm
  std::vector<CVector> base_deriv_;  // per multi-index: d^beta of the canonical dual on the grid
  std::vector<CMatrix> dir_deriv_;   // per multi-index: d^beta of each direction
  std::vector<double> weights_;
  double vol_ = 1.0;
  long run_ = 2;
  // AlgebraProxy
  CMatrix gram_;
  DilationInfo dil_;
  AlmostDiagonalParams ad_;
};

/// max_i |dJ/dx_i| / J by central differences of step rel_step (relative);
/// 0 for an empty kernel.
double el_residual(const DualObjective& J, const Eigen::VectorXd& x, double rel_step);

struct OptimizationResult {
  GridFunction dual_samples;
  CVector kernel_coefficients;
  CVector dual_coefficients;
  std::vector<double> objective_trace;
  double el_residual = 0.0;
  int iterations = 0;
  ObjectiveKind objective_kind = ObjectiveKind::MolecularNorm;
  int kernel_dim = 0;
  bool converged = false;
  bool no_descent = false;
  int active_changes = 0;  // iterations where the maximal multi-index switched
  std::vector<std::string> warnings;
};

/// Armijo gradient descent on the affine dual slice phi_can + span(kernel
/// directions). `start` (length kernel_dim, empty for zero) seeds the
/// coefficients.
OptimizationResult optimize_dual(const DualObjective& J, const OptimizerOptions& opt, const CVector& start = {});
OptimizationResult optimize_dual(const Generator& psi, const DilationInfo& d, const TruncationWindow& w,
                                 const GridSpec& grid, const OptimizerOptions& opt, const CVector& start = {});

/// `count` seeded start vectors, entries uniform on [-scale, scale]^2.
std::vector<CVector> random_starts(int kernel_dim, int count, double scale, std::uint64_t seed);

/// Appends a second copy of the first (0, 0) index, which makes the window
/// redundant with a one-dimensional kernel.
TruncationWindow with_duplicate_reference(const TruncationWindow& w);

struct PowerLawFit {
  double exponent = 0.0;
  double log_constant = 0.0;
  double r_squared = 0.0;
};

/// Least squares of log y against log x; needs >= 3 distinct x.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingRow {
  Mat dilation;
  double kappa = 1.0;
  double M = 0.0;
  double el_residual = 0.0;
  int iterations = 0;
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  bool fit_available = false;
  double alpha = 0.0;
  double r_squared = 0.0;
  std::vector<std::string> warnings;
};

/// For each dilation: optimize the reference dual on `window` (with the
/// duplicate reference appended) and record M = ||psi|| + ||phi*||. The
/// molecular parameters default per dilation unless `molecular` is given.
ScalingResult kappa_scaling_experiment(const Generator& psi, double p, const std::vector<DilationInfo>& dilations,
                                       const TruncationWindow& window, const GridSpec& grid,
                                       const OptimizerOptions& opt, bool per_dilation_defaults = true);

}  // namespace aniframe
