#include "aniframe/dual_optimizer.hpp"

#include "aniframe/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace aniframe {

SynthesisMatrix discretize_synthesis(const Generator& psi, const DilationInfo& d, const TruncationWindow& w,
                                     const GridSpec& grid) {
  grid.check();
  if (w.size() == 0) throw Error(ErrorKind::EmptyMatrix, "synthesis over an empty window");
  if (grid.dim() != psi.dim() || psi.dim() != d.dimension)
    throw Error(ErrorKind::InvalidArgument, "grid, generator and dilation dimensions differ");
  SynthesisMatrix S;
  S.window = w;
  S.grid = grid;
  S.elements = window_elements(psi, d, w);
  double finest = std::numeric_limits<double>::infinity();
  for (const auto& e : S.elements) finest = std::min(finest, e.hints().step);
  const double h = grid.spacing.maxCoeff();
  if (h > 2.0 * finest) {
    std::ostringstream msg;
    msg << "grid spacing " << h << " exceeds twice the finest element step " << finest;
    throw Error(ErrorKind::GridTooCoarse, msg.str());
  }
  S.sqrt_vol = std::sqrt(grid.cell_volume());
  S.entries = kernels::omp::sample_columns(S.elements, grid, {}, S.sqrt_vol);
  return S;
}

SynthesisSvd synthesis_svd(const SynthesisMatrix& S) {
  const long rows = S.entries.rows(), cols = S.entries.cols();
  SynthesisSvd out;
  out.sigma = Eigen::VectorXd::Zero(cols);
  if (rows >= cols) {
    // QR first: the SVD of the small triangular factor resolves singular
    // values down to rounding level of the largest one
    Eigen::HouseholderQR<CMatrix> qr(S.entries);
    const CMatrix R = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<CMatrix> svd(R, Eigen::ComputeFullV);
    out.sigma = svd.singularValues();
    out.V = svd.matrixV();
  } else {
    Eigen::JacobiSVD<CMatrix> svd(S.entries, Eigen::ComputeFullV);
    out.sigma.head(rows) = svd.singularValues();
    out.V = svd.matrixV();
  }
  return out;
}

CanonicalDual canonical_dual(const SynthesisMatrix& S, double kernel_tol) {
  const SynthesisSvd svd = synthesis_svd(S);
  const long K = svd.sigma.size();
  const double smax = svd.sigma.maxCoeff();
  if (!(smax > 0.0)) throw Error(ErrorKind::ZeroNorm, "synthesis matrix vanishes");
  const double mu = 1e-10 * smax * smax;

  CanonicalDual out;
  out.condition_number = svd.sigma.minCoeff() > 0.0 ? smax / svd.sigma.minCoeff() : std::numeric_limits<double>::infinity();
  Eigen::VectorXd filt = Eigen::VectorXd::Zero(K);
  for (long i = 0; i < K; ++i) {
    if (svd.sigma[i] > kernel_tol * smax)
      filt[i] = 1.0 / (svd.sigma[i] * svd.sigma[i] + mu);
    else
      out.rank_deficient = true;
  }
  if (out.condition_number > 1e8) {
    std::ostringstream msg;
    msg << "IllConditioned: synthesis condition number " << out.condition_number;
    out.warnings.push_back(msg.str());
  }
  out.coefficients = svd.V * filt.asDiagonal() * svd.V.adjoint();
  const CMatrix samples = S.entries * out.coefficients / S.sqrt_vol;
  for (long q = 0; q < K; ++q) {
    GridFunction g(S.grid);
    for (long i = 0; i < samples.rows(); ++i) g[i] = samples(i, q);
    out.duals.push_back(std::move(g));
  }
  return out;
}

KernelBasis kernel_basis(const SynthesisMatrix& S, double tol) {
  const SynthesisSvd svd = synthesis_svd(S);
  const double smax = svd.sigma.maxCoeff();
  std::vector<long> cols;
  for (long i = 0; i < svd.sigma.size(); ++i)
    if (svd.sigma[i] <= tol * smax) cols.push_back(i);
  KernelBasis kb;
  kb.dimension = static_cast<int>(cols.size());
  kb.vectors = CMatrix(svd.V.rows(), kb.dimension);
  for (int c = 0; c < kb.dimension; ++c) kb.vectors.col(c) = svd.V.col(cols[c]);
  return kb;
}

const char* to_string(ObjectiveKind k) { return k == ObjectiveKind::MolecularNorm ? "MolecularNorm" : "AlgebraProxy"; }

ObjectiveKind objective_kind_from_string(const std::string& s) {
  if (s == "MolecularNorm") return ObjectiveKind::MolecularNorm;
  if (s == "AlgebraProxy") return ObjectiveKind::AlgebraProxy;
  throw Error(ErrorKind::InvalidArgument, "unknown objective kind '" + s + "'");
}

namespace {

long reference_position(const TruncationWindow& w, long requested) {
  if (requested >= 0) {
    if (requested >= w.size()) throw Error(ErrorKind::InvalidArgument, "reference index outside the window");
    return requested;
  }
  for (long i = 0; i < w.size(); ++i)
    if (w[i].j == 0 && w[i].k.isZero()) return i;
  return 0;
}

}  // namespace

DualObjective::DualObjective(const Generator& psi, const DilationInfo& d, const TruncationWindow& w,
                             const GridSpec& grid, const OptimizerOptions& opt)
    : kind_(opt.kind), dil_(d), ad_(opt.ad) {
  S_ = discretize_synthesis(psi, d, w, grid);
  canonical_ = canonical_dual(S_, opt.kernel_tol);
  kernel_ = kernel_basis(S_, opt.kernel_tol);
  ref_ = reference_position(w, opt.reference);
  base_coef_ = canonical_.coefficients.col(ref_);

  const long K = w.size();
  const int kd = kernel_.dimension;
  dir_coef_ = CMatrix::Zero(K, 2 * kd);
  for (int i = 0; i < kd; ++i) {
    const CVector v = kernel_.vectors.col(i);
    const CVector u = v.cwiseAbs().cast<cplx>();
    const double nrm = (S_.entries * u).norm();
    if (!(nrm > 0.0) || std::abs(v[ref_]) == 0.0) {
      canonical_.warnings.push_back("kernel direction " + std::to_string(i) + " does not move the reference dual");
      continue;
    }
    dir_coef_.col(2 * i) = std::conj(v[ref_]) * u / nrm;
    dir_coef_.col(2 * i + 1) = cplx(0.0, 1.0) * dir_coef_.col(2 * i);
  }

  if (kind_ == ObjectiveKind::MolecularNorm) {
    const MolecularParams& mp = opt.molecular;
    if (mp.N > psi.max_derivative_order())
      throw Error(ErrorKind::DerivativeUnavailable, "generator lacks derivatives of order " + std::to_string(mp.N));
    offset_ = molecular_norm(psi, d, mp);
    weights_ = molecular_weights(d, grid, mp.D);
    vol_ = grid.cell_volume();
    run_ = grid.extents.back();
    for (const auto& beta : multi_indices(psi.dim(), mp.N)) {
      const bool zero = std::all_of(beta.begin(), beta.end(), [](int v) { return v == 0; });
      const CMatrix Db = kernels::omp::sample_columns(S_.elements, grid, zero ? MultiIndex{} : beta, 1.0);
      base_deriv_.push_back(Db * base_coef_);
      dir_deriv_.push_back(Db * dir_coef_);
    }
  } else {
    gram_ = S_.entries.adjoint() * S_.entries;
  }
}

std::vector<double> DualObjective::parts(const Eigen::VectorXd& x) const {
  if (x.size() != dimension()) throw Error(ErrorKind::InvalidArgument, "coordinate vector has the wrong length");
  const CVector xc = x.cast<cplx>();
  std::vector<double> out;
  if (kind_ == ObjectiveKind::MolecularNorm) {
    for (size_t b = 0; b < base_deriv_.size(); ++b) {
      const CVector v = base_deriv_[b] + dir_deriv_[b] * xc;
      out.push_back(vol_ * kernels::omp::weighted_abs_segments(v, weights_, run_));
    }
    return out;
  }
  // AlgebraProxy: every dual column moves along its own share of the kernel directions
  CMatrix C = canonical_.coefficients;
  for (int i = 0; i < kernel_.dimension; ++i) {
    const CVector v = kernel_.vectors.col(i);
    const CVector u = v.cwiseAbs().cast<cplx>();
    const double nrm = (S_.entries * u).norm();
    if (!(nrm > 0.0)) continue;
    const cplx c(x[2 * i], x[2 * i + 1]);
    C += c * u * v.adjoint() / nrm;
  }
  const CMatrix E = CMatrix::Identity(C.cols(), C.cols()) - C.adjoint() * gram_;
  out.push_back(almost_diagonal_fit(E, S_.window, ad_.delta, ad_.eps, ad_.p, dil_).C_M);
  return out;
}

double DualObjective::operator()(const Eigen::VectorXd& x) const {
  const auto p = parts(x);
  return offset_ + *std::max_element(p.begin(), p.end());
}

CVector DualObjective::dual_coefficients(const Eigen::VectorXd& x) const {
  return base_coef_ + dir_coef_ * x.cast<cplx>();
}

GridFunction DualObjective::dual_samples(const Eigen::VectorXd& x) const {
  const CVector s = S_.entries * dual_coefficients(x) / S_.sqrt_vol;
  GridFunction g(S_.grid);
  for (long i = 0; i < s.size(); ++i) g[i] = s[i];
  return g;
}

Eigen::VectorXd DualObjective::gradient(const Eigen::VectorXd& x, double rel_step, int* active) const {
  const auto p0 = parts(x);
  const double pmax = *std::max_element(p0.begin(), p0.end());
  std::vector<size_t> act;
  for (size_t b = 0; b < p0.size(); ++b)
    if (p0[b] >= pmax - 1e-12 * std::abs(pmax)) act.push_back(b);
  if (active) *active = static_cast<int>(std::max_element(p0.begin(), p0.end()) - p0.begin());

  Eigen::VectorXd g(x.size());
  for (long m = 0; m < x.size(); ++m) {
    const double h = rel_step * std::max(1.0, std::abs(x[m]));
    Eigen::VectorXd xp = x, xm = x;
    xp[m] += h;
    xm[m] -= h;
    const auto pp = parts(xp), pm = parts(xm);
    double acc = 0.0;
    for (size_t b : act) acc += (pp[b] - pm[b]) / (2.0 * h);
    g[m] = acc / static_cast<double>(act.size());
  }
  return g;
}

double el_residual(const DualObjective& J, const Eigen::VectorXd& x, double rel_step) {
  if (J.dimension() == 0) return 0.0;
  const Eigen::VectorXd g = J.gradient(x, rel_step);
  return g.cwiseAbs().maxCoeff() / std::abs(J(x));
}

namespace {

Eigen::VectorXd to_real(const CVector& c, int kd) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * kd);
  if (c.size() == 0) return x;
  if (c.size() != kd) throw Error(ErrorKind::InvalidArgument, "start vector length differs from the kernel dimension");
  for (int i = 0; i < kd; ++i) {
    x[2 * i] = c[i].real();
    x[2 * i + 1] = c[i].imag();
  }
  return x;
}

CVector to_complex(const Eigen::VectorXd& x) {
  CVector c(x.size() / 2);
  for (long i = 0; i < c.size(); ++i) c[i] = cplx(x[2 * i], x[2 * i + 1]);
  return c;
}

}  // namespace

OptimizationResult optimize_dual(const DualObjective& J, const OptimizerOptions& opt, const CVector& start) {
  OptimizationResult r;
  r.objective_kind = opt.kind;
  r.kernel_dim = J.kernel().dimension;
  r.warnings = J.canonical().warnings;
  Eigen::VectorXd x = to_real(start, r.kernel_dim);
  double f = J(x);
  r.objective_trace.push_back(f);

  if (r.kernel_dim == 0) {
    r.converged = true;
  } else {
    double t = -1.0;
    int last_active = -1;
    Eigen::VectorXd x_prev, g_prev;
    for (;;) {
      int active = 0;
      const Eigen::VectorXd g = J.gradient(x, opt.fd_step, &active);
      if (last_active >= 0 && active != last_active) ++r.active_changes;
      last_active = active;
      r.el_residual = g.cwiseAbs().maxCoeff() / std::abs(f);
      if (r.el_residual <= opt.el_tol) {
        r.converged = true;
        break;
      }
      if (r.iterations >= opt.max_iter) break;
      const double g2 = g.squaredNorm();
      // trial step: Barzilai-Borwein length when curvature is positive, else grow the last step
      if (t < 0.0) {
        t = 1.0 / std::sqrt(g2);
      } else {
        const Eigen::VectorXd s = x - x_prev, y = g - g_prev;
        const double sy = s.dot(y);
        t = sy > 0.0 ? s.squaredNorm() / sy : std::min(4.0 * t, 1e12);
      }
      x_prev = x;
      g_prev = g;
      int fails = 0;
      bool accepted = false;
      while (fails < 60) {
        const Eigen::VectorXd xn = x - t * g;
        const double fn = J(xn);
        if (fn <= f - 1e-4 * t * g2) {
          x = xn;
          f = fn;
          accepted = true;
          break;
        }
        t *= 0.5;
        ++fails;
      }
      if (!accepted) {
        r.no_descent = true;
        r.warnings.push_back("NoDescent: Armijo backtracking failed 60 consecutive times");
        break;
      }
      ++r.iterations;
      r.objective_trace.push_back(f);
    }
    if (r.active_changes > 0)
      r.warnings.push_back("maximal multi-index switched " + std::to_string(r.active_changes) + " times");
  }
  r.kernel_coefficients = to_complex(x);
  r.dual_coefficients = J.dual_coefficients(x);
  r.dual_samples = J.dual_samples(x);
  return r;
}

OptimizationResult optimize_dual(const Generator& psi, const DilationInfo& d, const TruncationWindow& w,
                                 const GridSpec& grid, const OptimizerOptions& opt, const CVector& start) {
  const DualObjective J(psi, d, w, grid, opt);
  return optimize_dual(J, opt, start);
}

std::vector<CVector> random_starts(int kernel_dim, int count, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto unit = [&] { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
  std::vector<CVector> out;
  for (int c = 0; c < count; ++c) {
    CVector v(kernel_dim);
    for (int i = 0; i < kernel_dim; ++i) {
      const double re = unit();
      v[i] = scale * cplx(re, unit());
    }
    out.push_back(v);
  }
  return out;
}

TruncationWindow with_duplicate_reference(const TruncationWindow& w) {
  std::vector<LatticeIndex> idx = w.indices;
  const long ref = reference_position(w, -1);
  idx.push_back(w[ref]);
  TruncationWindow out = window_from_indices(w.dim, std::move(idx));
  return out;
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::InvalidArgument, "fit inputs differ in length");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, "power-law fit needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  std::vector<double> s = lx;
  std::sort(s.begin(), s.end());
  const auto distinct = std::unique(s.begin(), s.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }) - s.begin();
  if (distinct < 3) throw Error(ErrorKind::InsufficientData, "power-law fit needs >= 3 distinct abscissae");

  const double m = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / m;
    my += ly[i] / m;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.log_constant = my - fit.exponent * mx;
  double ss_res = 0;
  for (size_t i = 0; i < lx.size(); ++i) ss_res += std::pow(ly[i] - fit.log_constant - fit.exponent * lx[i], 2);
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

ScalingResult kappa_scaling_experiment(const Generator& psi, double p, const std::vector<DilationInfo>& dilations,
                                       const TruncationWindow& window, const GridSpec& grid,
                                       const OptimizerOptions& opt, bool per_dilation_defaults) {
  ScalingResult out;
  const TruncationWindow w = with_duplicate_reference(window);
  std::vector<double> kap, M;
  for (const auto& d : dilations) {
    OptimizerOptions o = opt;
    o.kind = ObjectiveKind::MolecularNorm;
    o.reference = -1;
    if (per_dilation_defaults) {
      const MolecularParams def = default_molecular_params(d, p);
      o.molecular.D = def.D;
      o.molecular.N = def.N;
    }
    const DualObjective J(psi, d, w, grid, o);
    const OptimizationResult r = optimize_dual(J, o);
    ScalingRow row;
    row.dilation = d.matrix;
    row.kappa = d.condition_number;
    row.M = r.objective_trace.back();
    row.el_residual = r.el_residual;
    row.iterations = r.iterations;
    out.rows.push_back(row);
    if (!r.converged) out.warnings.push_back("optimizer did not reach el_tol for kappa = " + std::to_string(row.kappa));
    kap.push_back(row.kappa);
    M.push_back(row.M);
  }
  try {
    const PowerLawFit fit = fit_power_law(kap, M);
    out.fit_available = true;
    out.alpha = fit.exponent;
    out.r_squared = fit.r_squared;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientData) throw;
    out.warnings.push_back(std::string("alpha fit unavailable: ") + e.what());
  }
  return out;
}

}  // namespace aniframe
