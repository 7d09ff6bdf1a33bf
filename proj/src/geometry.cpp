#include "aniframe/geometry.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>

namespace aniframe {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotExpansive: return "NotExpansive";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::InvalidExponent: return "InvalidExponent";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SmoothModeUnavailable: return "SmoothModeUnavailable";
    case ErrorKind::SampleTooSmall: return "SampleTooSmall";
    case ErrorKind::ShearDegenerate: return "ShearDegenerate";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DerivativeUnavailable: return "DerivativeUnavailable";
    case ErrorKind::ZeroFrequency: return "ZeroFrequency";
    case ErrorKind::ZeroNorm: return "ZeroNorm";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::PowerIterationStalled: return "PowerIterationStalled";
    case ErrorKind::NotContractive: return "NotContractive";
    case ErrorKind::NoDescent: return "NoDescent";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) {
  return kind == ErrorKind::QuadratureNotConverged || kind == ErrorKind::PowerIterationStalled ||
         kind == ErrorKind::NotContractive || kind == ErrorKind::NoDescent;
}

namespace {

constexpr double kExpansiveTol = 1e-12;
constexpr double kShapeTailTol = 1e-12;

Mat matrix_power(const Mat& a, const Mat& a_inv, int j) {
  const Mat& base = j >= 0 ? a : a_inv;
  int e = std::abs(j);
  Mat result = Mat::Identity(a.rows(), a.cols());
  Mat sq = base;
  while (e > 0) {
    if (e & 1) result = result * sq;
    sq = sq * sq;
    e >>= 1;
  }
  return result;
}

// Smallest j with ||A^-j x||_M <= 1; the M-norm of A^-j x is strictly
// decreasing in j, so bracketing followed by bisection is exact.
int step_scale(const DilationInfo& d, const Vec& x) {
  auto inside = [&](int j) { return shape_norm(d, matrix_power(d.matrix, d.inverse, -j) * x) <= 1.0; };
  int lo = 0;
  int hi = 0;
  if (inside(0)) {
    int step = 1;
    lo = -1;
    while (inside(lo)) {
      hi = lo;
      step *= 2;
      lo = -step;
      if (step > (1 << 20)) throw Error(ErrorKind::InvalidArgument, "quasi_norm: point too close to origin");
    }
  } else {
    int step = 1;
    hi = 1;
    while (!inside(hi)) {
      lo = hi;
      step *= 2;
      hi = step;
      if (step > (1 << 20)) throw Error(ErrorKind::InvalidArgument, "quasi_norm: point too far from origin");
    }
  }
  // invariant: !inside(lo), inside(hi)
  while (hi - lo > 1) {
    int mid = lo + (hi - lo) / 2;
    if (inside(mid)) hi = mid; else lo = mid;
  }
  return hi;
}

bool has_positive_eigenbasis(const DilationInfo& d) {
  if (!d.real_diagonalizable) return false;
  for (int i = 0; i < d.real_eigenvalues.size(); ++i)
    if (d.real_eigenvalues[i] <= 0.0) return false;
  return true;
}

// t with ||A^-t x||_2 = 1, computed in the eigenbasis.
double smooth_exponent(const DilationInfo& d, const Vec& x) {
  Vec z = d.eigvec_inv * x;
  Vec logs = d.real_eigenvalues.array().log();
  auto f = [&](double t) {
    Vec scaled = z;
    for (int i = 0; i < scaled.size(); ++i) scaled[i] *= std::exp(-t * logs[i]);
    return std::log((d.eigvec * scaled).norm());
  };
  double lo = -1.0;
  double hi = 1.0;
  for (int it = 0; f(lo) < 0.0; ++it) {
    lo *= 2.0;
    if (it > 60) throw Error(ErrorKind::InvalidArgument, "smooth quasi_norm: bracket failure");
  }
  for (int it = 0; f(hi) > 0.0; ++it) {
    hi *= 2.0;
    if (it > 60) throw Error(ErrorKind::InvalidArgument, "smooth quasi_norm: bracket failure");
  }
  boost::uintmax_t max_iter = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12; };
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, tol, max_iter);
  return 0.5 * (a + b);
}

}  // namespace

Mat DilationInfo::power(int j) const { return matrix_power(matrix, inverse, j); }

DilationInfo DilationInfo::transpose() const {
  return validate_dilation(Mat(matrix.transpose()), quasi_norm_mode);
}

double shape_norm(const DilationInfo& d, const Vec& y) {
  return std::sqrt(std::max(0.0, y.dot(d.shape_matrix * y)));
}

DilationInfo validate_dilation(const Mat& matrix, QuasiNormMode mode) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1)
    throw Error(ErrorKind::InvalidArgument, "dilation matrix must be square");
  if (matrix.rows() > kMaxDim)
    throw Error(ErrorKind::InvalidArgument, "dimension above supported maximum");
  if (!matrix.allFinite()) throw Error(ErrorKind::InvalidArgument, "dilation matrix has non-finite entries");

  DilationInfo d;
  d.matrix = matrix;
  d.dimension = static_cast<int>(matrix.rows());
  d.quasi_norm_mode = mode;

  Eigen::MatrixXd dense = matrix;
  const double det = dense.determinant();
  if (det == 0.0) throw Error(ErrorKind::Singular, "dilation matrix is singular");
  d.determinant_abs = std::abs(det);
  d.inverse = dense.inverse();

  Eigen::EigenSolver<Eigen::MatrixXd> es(dense);
  Eigen::VectorXcd ev = es.eigenvalues();
  std::vector<int> order(ev.size());
  for (int i = 0; i < ev.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(ev[a]) < std::abs(ev[b]); });
  for (int i : order) d.eigenvalues.push_back(ev[i]);
  for (const auto& lambda : d.eigenvalues) {
    if (std::abs(lambda) <= 1.0 + kExpansiveTol)
      throw Error(ErrorKind::NotExpansive,
                  "eigenvalue modulus " + std::to_string(std::abs(lambda)) + " is not > 1");
  }
  d.lambda_min_mod = std::abs(d.eigenvalues.front());
  d.lambda_max_mod = std::abs(d.eigenvalues.back());

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense);
  const auto& sv = svd.singularValues();
  d.condition_number = sv[0] / sv[sv.size() - 1];

  // Real eigenbasis (Smooth mode and the Meyer level function).
  bool all_real = true;
  for (const auto& lambda : ev)
    if (std::abs(lambda.imag()) > 1e-12 * std::abs(lambda)) all_real = false;
  if (all_real) {
    Eigen::MatrixXd v = es.eigenvectors().real();
    Eigen::JacobiSVD<Eigen::MatrixXd> vsvd(v);
    const auto& vs = vsvd.singularValues();
    if (vs[vs.size() - 1] > 1e-10 * vs[0]) {
      d.real_diagonalizable = true;
      d.eigvec = v;
      d.eigvec_inv = v.inverse();
      d.real_eigenvalues = ev.real();
    }
  }

  // Shape matrix: truncated contractive-power series with a geometric tail estimate.
  const int n = d.dimension;
  d.shape_matrix = Mat::Identity(n, n);
  Mat p = Mat::Identity(n, n);
  double prev = 1.0;
  int m = 0;
  for (m = 1; m < 100000; ++m) {
    p = d.inverse * p;
    Mat term = p.transpose() * p;
    d.shape_matrix += term;
    const double tn = term.norm();
    const double ratio = tn / prev;
    prev = tn;
    if (ratio < 1.0 && tn * ratio / (1.0 - ratio) < kShapeTailTol) break;
  }
  d.shape_terms = m;
  d.shape_matrix = 0.5 * (d.shape_matrix + d.shape_matrix.transpose()).eval();

  d.is_integer = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (matrix(i, j) != std::round(matrix(i, j))) d.is_integer = false;
  return d;
}

DilationInfo validate_dilation(const std::vector<std::vector<double>>& rows, QuasiNormMode mode) {
  const auto n = static_cast<int>(rows.size());
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "empty dilation matrix");
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n)
      throw Error(ErrorKind::InvalidArgument, "dilation matrix must be square");
    for (int j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return validate_dilation(m, mode);
}

QuasiNormValue quasi_norm(const DilationInfo& d, const Vec& x) {
  return quasi_norm(d, x, d.quasi_norm_mode);
}

QuasiNormValue quasi_norm(const DilationInfo& d, const Vec& x, QuasiNormMode mode) {
  QuasiNormValue out;
  if (x.isZero(0.0)) {
    out.has_integer_scale = mode == QuasiNormMode::Step;
    return out;
  }
  if (mode == QuasiNormMode::Step) {
    const int j = step_scale(d, x);
    out.integer_scale = j;
    out.has_integer_scale = true;
    out.value = std::pow(d.determinant_abs, j);
    return out;
  }
  if (!has_positive_eigenbasis(d))
    throw Error(ErrorKind::SmoothModeUnavailable, "Smooth mode needs a real positive eigenbasis");
  out.value = std::pow(d.determinant_abs, smooth_exponent(d, x));
  return out;
}

double level_function(const DilationInfo& d, const Vec& x) {
  if (x.isZero(0.0)) return -std::numeric_limits<double>::infinity();
  if (has_positive_eigenbasis(d)) return smooth_exponent(d, x);
  const int j = step_scale(d, x);
  Vec y = d.power(-j) * x;
  const double inner = std::log(shape_norm(d, y));
  const double outer = std::log(shape_norm(d, d.matrix * y));
  return (j - 1) + outer / (outer - inner);
}

int max_vanishing_order(double p, const DilationInfo& d) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidExponent, "p must lie in (0, 1]");
  const double v = (1.0 / p - 1.0) * std::log(d.determinant_abs) / std::log(d.lambda_min_mod);
  // absorb rounding in 1/p for exact rational inputs such as p = 2/3
  return static_cast<int>(std::floor(v + 1e-9));
}

DistortionReport distortion_check(const DilationInfo& d, std::span<const Vec> samples) {
  DistortionReport r;
  const double lb = std::log(d.determinant_abs);
  r.lower_exponent = lb / std::log(d.lambda_min_mod);
  r.upper_exponent = lb / std::log(d.lambda_max_mod);
  double c = 1.0;
  for (const Vec& x : samples) {
    const double rho = quasi_norm(d, x).value;
    if (rho < 1.0) throw Error(ErrorKind::SampleTooSmall, "distortion_check needs rho_A(x) >= 1");
    const double e = x.norm();
    c = std::max(c, std::pow(e, r.lower_exponent) / rho);
    c = std::max(c, rho / std::pow(e, r.upper_exponent));
    r.rho.push_back(rho);
    r.euclid.push_back(e);
  }
  r.constant = c;
  return r;
}

double condition_number_2x2(const Mat& m) {
  const double f2 = m.squaredNorm();
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double disc = std::sqrt(std::max(0.0, f2 * f2 - 4.0 * det * det));
  const double s1 = 0.5 * (f2 + disc);
  const double s2 = 0.5 * (f2 - disc);
  // s2 = det^2 / s1 avoids cancellation
  return std::sqrt(s1 / (det * det / s1));
}

}  // namespace aniframe
