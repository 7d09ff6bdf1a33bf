#pragma once

#include "aniframe/geometry.hpp"
#include "aniframe/grid.hpp"

#include <memory>
#include <optional>
#include <string>

namespace aniframe {

enum class GeneratorKind { MexicanHat2D, GaussianDeriv, MeyerPartition, SampledGrid };

const char* to_string(GeneratorKind kind);

/// Where a generator lives, used to seed box-doubling quadrature.
struct QuadHints {
  Vec center;                    // spatial centre of mass
  double radius = 8.0;           // spatial half-width holding the essential support
  double step = 0.25;            // spatial trapezoid step
  double freq_radius = 10.0;     // frequency half-width
  double freq_step = 0.25;       // frequency trapezoid step
  bool band_limited = false;     // fourier() vanishes outside the freq_radius cube
  bool zero_near_origin = false; // fourier() vanishes identically near 0
};

class GeneratorModel {
 public:
  virtual ~GeneratorModel() = default;
  virtual GeneratorKind kind() const = 0;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual cplx value(const Vec& x) const = 0;
  virtual bool has_fourier() const { return false; }
  virtual cplx fourier(const Vec& xi) const;
  /// Highest |beta| for which derivative() is available.
  virtual int max_derivative_order() const { return 0; }
  virtual cplx derivative(const MultiIndex& beta, const Vec& x) const;
  virtual QuadHints hints() const = 0;
};

/// Immutable handle to a generator model; cheap to copy and safe to share
/// across threads.
class Generator {
 public:
  Generator() = default;
  explicit Generator(std::shared_ptr<const GeneratorModel> model) : model_(std::move(model)) {}

  GeneratorKind kind() const { return model_->kind(); }
  std::string name() const { return model_->name(); }
  int dim() const { return model_->dim(); }
  cplx value(const Vec& x) const { return model_->value(x); }
  cplx operator()(const Vec& x) const { return model_->value(x); }
  bool has_fourier() const { return model_->has_fourier(); }
  cplx fourier(const Vec& xi) const { return model_->fourier(xi); }
  int max_derivative_order() const { return model_->max_derivative_order(); }
  /// Throws DerivativeUnavailable above max_derivative_order().
  cplx derivative(const MultiIndex& beta, const Vec& x) const;
  QuadHints hints() const { return model_->hints(); }
  const GeneratorModel& model() const { return *model_; }
  explicit operator bool() const { return static_cast<bool>(model_); }

 private:
  std::shared_ptr<const GeneratorModel> model_;
};

/// psi(x) = (2 - |x|^2) exp(-|x|^2 / 2) on R^2.
Generator mexican_hat_2d();
/// d^alpha of exp(-|x|^2 / 2); alpha = 0 gives the plain Gaussian.
Generator gaussian_deriv(const MultiIndex& alpha);

/// Parameters of a Meyer-type partition generator. The Fourier transform is
/// w(tau(xi)) with tau the continuous scale coordinate of A*, and w supported
/// on (u0, u0 + 2).
struct MeyerParams {
  int order = 3;
  double u0 = 0.0;
  double rho_inner = 0.0;  // rho_{A*} below which fourier() is zero
  double rho_outer = 0.0;  // rho_{A*} above which fourier() is zero
  Mat dilation;            // the A the partition was built for
};

Generator meyer_partition(const DilationInfo& d, int order = 3);
std::optional<MeyerParams> meyer_params(const Generator& g);

/// Transition profile w; exposed for tests.
double meyer_window(double u, double u0, int order);

/// Sampled generator; values by multilinear interpolation (zero outside the
/// grid), derivatives by 4th-order finite differences.
Generator sampled_grid(GridFunction grid);

/// x -> b^{j/2} g(A^j x - k).
Generator dilate_translate(const Generator& g, const DilationInfo& d, int j, const IVec& k);

/// Linear combination sum_i c_i g_i of generators of equal dimension.
Generator linear_combination(const std::vector<std::pair<cplx, Generator>>& terms);
Generator scaled(const Generator& g, cplx c);

/// Moments int g(x) x^gamma dx for |gamma| <= up_to (graded, then gamma_0
/// descending) by trapezoid on the box doubled once; the doubling must not
/// move any moment by more than tol.
struct MomentTable {
  std::vector<MultiIndex> gammas;
  std::vector<cplx> values;
  int vanishing_order = -1;
};
MomentTable moment_table(const Generator& g, int up_to, double box_half_width, double tol);

/// Largest m <= up_to such that every moment of total degree <= m vanishes
/// within tol (absolute); -1 if the mean does not vanish.
int vanishing_moments(const Generator& g, int up_to, double box_half_width, double tol);

/// Probabilists' Hermite polynomial He_k(x).
double hermite_he(int k, double x);

}  // namespace aniframe
