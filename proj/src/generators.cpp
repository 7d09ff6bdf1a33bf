#include "aniframe/generators.hpp"

#include "aniframe/quadrature.hpp"

#include <boost/math/special_functions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace aniframe {

const char* to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::MexicanHat2D: return "MexicanHat2D";
    case GeneratorKind::GaussianDeriv: return "GaussianDeriv";
    case GeneratorKind::MeyerPartition: return "MeyerPartition";
    case GeneratorKind::SampledGrid: return "SampledGrid";
  }
  return "Unknown";
}

cplx GeneratorModel::fourier(const Vec&) const {
  throw Error(ErrorKind::InvalidArgument, name() + " has no Fourier access");
}

cplx GeneratorModel::derivative(const MultiIndex& beta, const Vec& x) const {
  for (int b : beta)
    if (b != 0) throw Error(ErrorKind::DerivativeUnavailable, name() + " has no derivative access");
  return value(x);
}

cplx Generator::derivative(const MultiIndex& beta, const Vec& x) const {
  int order = 0;
  for (int b : beta) order += b;
  if (static_cast<int>(beta.size()) != dim())
    throw Error(ErrorKind::InvalidArgument, "multi-index dimension mismatch");
  if (order > model_->max_derivative_order())
    throw Error(ErrorKind::DerivativeUnavailable,
                name() + ": derivative of order " + std::to_string(order) + " unavailable");
  return model_->derivative(beta, x);
}

double hermite_he(int k, double x) {
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int m = 1; m < k; ++m) {
    const double next = x * cur - m * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace {

cplx ipow(const Vec& xi, const MultiIndex& beta) {
  cplx f(1.0, 0.0);
  for (int l = 0; l < xi.size(); ++l)
    for (int r = 0; r < beta[l]; ++r) f *= cplx(0.0, xi[l]);
  return f;
}

int total_order(const MultiIndex& beta) {
  int s = 0;
  for (int b : beta) s += b;
  return s;
}

// ---------------------------------------------------------------- Gaussian types

class GaussianDerivModel final : public GeneratorModel {
 public:
  explicit GaussianDerivModel(MultiIndex alpha) : alpha_(std::move(alpha)) {}
  GeneratorKind kind() const override { return GeneratorKind::GaussianDeriv; }
  std::string name() const override {
    std::ostringstream s;
    s << "gaussian_deriv(";
    for (size_t i = 0; i < alpha_.size(); ++i) s << (i ? "," : "") << alpha_[i];
    s << ')';
    return s.str();
  }
  int dim() const override { return static_cast<int>(alpha_.size()); }
  cplx value(const Vec& x) const override { return eval(alpha_, x); }
  bool has_fourier() const override { return true; }
  cplx fourier(const Vec& xi) const override {
    const int n = dim();
    return ipow(xi, alpha_) * std::pow(2.0 * kPi, 0.5 * n) * std::exp(-0.5 * xi.squaredNorm());
  }
  int max_derivative_order() const override { return 16; }
  cplx derivative(const MultiIndex& beta, const Vec& x) const override {
    MultiIndex s = alpha_;
    for (size_t i = 0; i < s.size(); ++i) s[i] += beta[i];
    return eval(s, x);
  }
  QuadHints hints() const override {
    QuadHints h;
    h.center = Vec::Zero(dim());
    h.radius = 8.0 + std::sqrt(static_cast<double>(total_order(alpha_)));
    h.freq_radius = h.radius + 2.0;
    return h;
  }

 private:
  static cplx eval(const MultiIndex& a, const Vec& x) {
    double p = (total_order(a) % 2 == 0) ? 1.0 : -1.0;
    for (int l = 0; l < x.size(); ++l) p *= hermite_he(a[l], x[l]);
    return p * std::exp(-0.5 * x.squaredNorm());
  }
  MultiIndex alpha_;
};

class MexicanHatModel final : public GeneratorModel {
 public:
  GeneratorKind kind() const override { return GeneratorKind::MexicanHat2D; }
  std::string name() const override { return "mexican_hat_2d"; }
  int dim() const override { return 2; }
  cplx value(const Vec& x) const override {
    const double r2 = x.squaredNorm();
    return (2.0 - r2) * std::exp(-0.5 * r2);
  }
  bool has_fourier() const override { return true; }
  cplx fourier(const Vec& xi) const override {
    const double r2 = xi.squaredNorm();
    return 2.0 * kPi * r2 * std::exp(-0.5 * r2);
  }
  int max_derivative_order() const override { return 16; }
  // psi = -Laplacian of the Gaussian, so d^beta psi = -sum_i d^{beta + 2 e_i} g.
  cplx derivative(const MultiIndex& beta, const Vec& x) const override {
    const double sign = (total_order(beta) % 2 == 0) ? -1.0 : 1.0;
    double acc = 0.0;
    for (int i = 0; i < 2; ++i) {
      double p = 1.0;
      for (int l = 0; l < 2; ++l) p *= hermite_he(beta[l] + (l == i ? 2 : 0), x[l]);
      acc += p;
    }
    return sign * acc * std::exp(-0.5 * x.squaredNorm());
  }
  QuadHints hints() const override {
    QuadHints h;
    h.center = Vec::Zero(2);
    return h;
  }
};

// ---------------------------------------------------------------- Meyer partition

double smoothstep(double t, int order) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  // S_N(t) = t^{N+1} sum_k C(N+k, k) C(2N+1, N-k) (-t)^k
  const int N = order;
  double acc = 0.0;
  double tk = 1.0;
  for (int k = 0; k <= N; ++k) {
    acc += boost::math::binomial_coefficient<double>(N + k, k) *
           boost::math::binomial_coefficient<double>(2 * N + 1, N - k) * tk;
    tk *= -t;
  }
  return std::pow(t, N + 1) * acc;
}

// Spatial table on a uniform tensor grid, interpolated with 6-point Lagrange.
struct SpatialTable {
  int dim = 0;
  long count = 0;
  double lo = 0.0;
  double h = 0.0;
  std::vector<cplx> values;
};

constexpr double kMeyerTableHalfWidth = 40.0;
constexpr double kMeyerTableStep = 1.0 / 16.0;
constexpr long kMeyerFreqPerAxis = 256;
constexpr long kMeyerFreqPerAxisHighDim = 48;

class MeyerModel final : public GeneratorModel {
 public:
  MeyerModel(const DilationInfo& d, int order) : dstar_(d.transpose()), order_(order), n_(d.dimension) {
    if (order < 1) throw Error(ErrorKind::InvalidArgument, "Meyer transition order must be >= 1");
    params_.order = order;
    params_.dilation = d.matrix;
    params_.u0 = boundary_min_level() - 2.0 - 1e-9;
    params_.rho_inner = std::pow(dstar_.determinant_abs, params_.u0);
    params_.rho_outer = std::pow(dstar_.determinant_abs, params_.u0 + 2.0);
    nf_ = n_ <= 2 ? kMeyerFreqPerAxis : kMeyerFreqPerAxisHighDim;
  }

  GeneratorKind kind() const override { return GeneratorKind::MeyerPartition; }
  std::string name() const override { return "meyer_partition(order=" + std::to_string(order_) + ")"; }
  int dim() const override { return n_; }
  bool has_fourier() const override { return true; }

  cplx fourier(const Vec& xi) const override {
    if (xi.cwiseAbs().maxCoeff() >= kPi) return 0.0;
    if (xi.isZero(0.0)) return 0.0;
    return meyer_window(level_function(dstar_, xi), params_.u0, order_);
  }

  cplx value(const Vec& x) const override { return spatial(MultiIndex(n_, 0), x); }
  int max_derivative_order() const override { return 8; }
  cplx derivative(const MultiIndex& beta, const Vec& x) const override { return spatial(beta, x); }

  QuadHints hints() const override {
    QuadHints h;
    h.center = Vec::Zero(n_);
    h.radius = kMeyerTableHalfWidth;
    h.step = 0.5;
    h.freq_radius = kPi;
    h.freq_step = 2.0 * kPi / 128.0;
    h.band_limited = true;
    h.zero_near_origin = true;
    return h;
  }

  const MeyerParams& params() const { return params_; }

 private:
  // min of tau over the boundary of [-pi, pi]^n, so supp w(tau) fits in the cube
  double boundary_min_level() const {
    const long m = n_ == 1 ? 1 : (n_ == 2 ? 8193 : 257);
    double best = std::numeric_limits<double>::infinity();
    Vec xi(n_);
    for (int face = 0; face < n_; ++face) {
      for (double side : {-kPi, kPi}) {
        long total = 1;
        for (int a = 0; a < n_ - 1; ++a) total *= m;
        for (long i = 0; i < total; ++i) {
          long r = i;
          for (int a = 0; a < n_; ++a) {
            if (a == face) {
              xi[a] = side;
              continue;
            }
            const long c = r % m;
            r /= m;
            xi[a] = m == 1 ? 0.0 : -kPi + 2.0 * kPi * static_cast<double>(c) / static_cast<double>(m - 1);
          }
          best = std::min(best, level_function(dstar_, xi));
        }
      }
    }
    return best;
  }

  double freq_node(long a) const { return -kPi + 2.0 * kPi * static_cast<double>(a) / static_cast<double>(nf_); }

  const std::vector<double>& freq_samples() const {
    std::call_once(freq_once_, [this] {
      long total = 1;
      for (int a = 0; a < n_; ++a) total *= nf_;
      fhat_.resize(total);
      Vec xi(n_);
      for (long i = 0; i < total; ++i) {
        long r = i;
        for (int a = n_ - 1; a >= 0; --a) {
          xi[a] = freq_node(r % nf_);
          r /= nf_;
        }
        fhat_[i] = fourier(xi).real();
      }
    });
    return fhat_;
  }

  std::shared_ptr<const SpatialTable> table(const MultiIndex& beta) const {
    std::lock_guard<std::mutex> lock(table_mutex_);
    auto it = tables_.find(beta);
    if (it != tables_.end()) return it->second;
    auto t = build_table(beta);
    tables_.emplace(beta, t);
    return t;
  }

  // psi_beta(x) = (2 pi)^-n int (i xi)^beta psi^(xi) e^{i x xi} d xi on the
  // separable trapezoid grid, evaluated as F * Psi * F^T.
  std::shared_ptr<SpatialTable> build_table(const MultiIndex& beta) const {
    const auto& fh = freq_samples();
    auto t = std::make_shared<SpatialTable>();
    t->dim = n_;
    t->lo = -kMeyerTableHalfWidth;
    t->h = kMeyerTableStep;
    t->count = static_cast<long>(std::lround(2.0 * kMeyerTableHalfWidth / kMeyerTableStep)) + 1;
    const double dxi = 2.0 * kPi / static_cast<double>(nf_);
    const double norm = std::pow(dxi / (2.0 * kPi), n_);

    Eigen::MatrixXcd F(t->count, nf_);
    for (long i = 0; i < t->count; ++i) {
      const double x = t->lo + t->h * static_cast<double>(i);
      for (long a = 0; a < nf_; ++a) F(i, a) = std::polar(1.0, x * freq_node(a));
    }
    if (n_ == 1) {
      Eigen::VectorXcd psi(nf_);
      for (long a = 0; a < nf_; ++a) {
        Vec xi(1);
        xi[0] = freq_node(a);
        psi[a] = fh[a] * ipow(xi, beta);
      }
      Eigen::VectorXcd out = norm * (F * psi);
      t->values.assign(out.data(), out.data() + out.size());
    } else {
      Eigen::MatrixXcd psi(nf_, nf_);
      Vec xi(2);
      for (long a = 0; a < nf_; ++a)
        for (long b = 0; b < nf_; ++b) {
          xi << freq_node(a), freq_node(b);
          psi(a, b) = fh[a * nf_ + b] * ipow(xi, beta);
        }
      Eigen::MatrixXcd tmp = F * psi;
      Eigen::MatrixXcd out = norm * (tmp * F.transpose());
      t->values.resize(out.size());
      for (long i = 0; i < t->count; ++i)
        for (long j = 0; j < t->count; ++j) t->values[i * t->count + j] = out(i, j);
    }
    return t;
  }

  static void lagrange6(double t, double w[6]) {
    // nodes at -2..3, t in [0, 1)
    for (int m = 0; m < 6; ++m) {
      double num = 1.0;
      double den = 1.0;
      for (int q = 0; q < 6; ++q) {
        if (q == m) continue;
        num *= t - (q - 2);
        den *= (m - q);
      }
      w[m] = num / den;
    }
  }

  cplx spatial(const MultiIndex& beta, const Vec& x) const {
    if (n_ > 2) return direct(beta, x);
    auto t = table(beta);
    long base[2] = {0, 0};
    double w[2][6] = {};
    for (int a = 0; a < n_; ++a) {
      const double pos = (x[a] - t->lo) / t->h;
      const double fl = std::floor(pos);
      base[a] = static_cast<long>(fl) - 2;
      // truncated beyond the table: |psi| there is far below quadrature tolerances
      if (base[a] < 0 || base[a] + 5 >= t->count) return 0.0;
      lagrange6(pos - fl, w[a]);
    }
    if (n_ == 1) {
      cplx acc = 0.0;
      for (int m = 0; m < 6; ++m) acc += w[0][m] * t->values[base[0] + m];
      return acc;
    }
    cplx acc = 0.0;
    for (int m = 0; m < 6; ++m) {
      cplx row = 0.0;
      const long off = (base[0] + m) * t->count + base[1];
      for (int q = 0; q < 6; ++q) row += w[1][q] * t->values[off + q];
      acc += w[0][m] * row;
    }
    return acc;
  }

  cplx direct(const MultiIndex& beta, const Vec& x) const {
    const auto& fh = freq_samples();
    const double dxi = 2.0 * kPi / static_cast<double>(nf_);
    cplx acc = 0.0;
    Vec xi(n_);
    for (long i = 0; i < static_cast<long>(fh.size()); ++i) {
      if (fh[i] == 0.0) continue;
      long r = i;
      for (int a = n_ - 1; a >= 0; --a) {
        xi[a] = freq_node(r % nf_);
        r /= nf_;
      }
      acc += fh[i] * ipow(xi, beta) * std::polar(1.0, x.dot(xi));
    }
    return acc * std::pow(dxi / (2.0 * kPi), n_);
  }

  DilationInfo dstar_;
  int order_;
  int n_;
  long nf_;
  MeyerParams params_;

  mutable std::once_flag freq_once_;
  mutable std::vector<double> fhat_;
  mutable std::mutex table_mutex_;
  mutable std::map<MultiIndex, std::shared_ptr<const SpatialTable>> tables_;
};

// ---------------------------------------------------------------- sampled grids

class SampledGridModel final : public GeneratorModel {
 public:
  explicit SampledGridModel(GridFunction g) : g_(std::move(g)) { g_.spec.check(); }
  GeneratorKind kind() const override { return GeneratorKind::SampledGrid; }
  std::string name() const override { return "sampled_grid"; }
  int dim() const override { return g_.spec.dim(); }
  cplx value(const Vec& x) const override { return interpolate(g_.values, x); }
  int max_derivative_order() const override { return 4; }
  cplx derivative(const MultiIndex& beta, const Vec& x) const override {
    if (total_order(beta) == 0) return value(x);
    return interpolate(*deriv_grid(beta), x);
  }
  QuadHints hints() const override {
    QuadHints h;
    const int n = dim();
    h.center.resize(n);
    h.radius = 0.0;
    h.step = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      const double len = g_.spec.spacing[a] * static_cast<double>(g_.spec.extents[a] - 1);
      h.center[a] = g_.spec.origin[a] + 0.5 * len;
      h.radius = std::max(h.radius, 0.5 * len);
      h.step = std::min(h.step, g_.spec.spacing[a]);
    }
    return h;
  }

 private:
  cplx interpolate(const std::vector<cplx>& v, const Vec& x) const {
    const int n = dim();
    std::vector<long> lo(n);
    std::vector<double> frac(n);
    for (int a = 0; a < n; ++a) {
      const double pos = (x[a] - g_.spec.origin[a]) / g_.spec.spacing[a];
      if (pos < 0.0 || pos > static_cast<double>(g_.spec.extents[a] - 1)) return 0.0;
      lo[a] = std::min(static_cast<long>(std::floor(pos)), g_.spec.extents[a] - 2);
      lo[a] = std::max(lo[a], 0L);
      frac[a] = pos - static_cast<double>(lo[a]);
    }
    cplx acc = 0.0;
    std::vector<long> idx(n);
    for (int corner = 0; corner < (1 << n); ++corner) {
      double w = 1.0;
      for (int a = 0; a < n; ++a) {
        const bool up = (corner >> a) & 1;
        idx[a] = std::min(lo[a] + (up ? 1 : 0), g_.spec.extents[a] - 1);
        w *= up ? frac[a] : 1.0 - frac[a];
      }
      if (w != 0.0) acc += w * v[g_.spec.ravel(idx)];
    }
    return acc;
  }

  // 4th-order first derivative along `axis`, one-sided 5-point stencils at the ends.
  std::vector<cplx> diff_axis(const std::vector<cplx>& v, int axis) const {
    const auto& s = g_.spec;
    const long N = s.extents[axis];
    if (N < 5) throw Error(ErrorKind::DerivativeUnavailable, "sampled grid too small for 4th-order stencils");
    long stride = 1;
    for (int a = s.dim() - 1; a > axis; --a) stride *= s.extents[a];
    const double h = s.spacing[axis];
    std::vector<cplx> out(v.size());
    for (long i = 0; i < s.size(); ++i) {
      const long p = (i / stride) % N;
      auto at = [&](long q) { return v[i + (q - p) * stride]; };
      cplx d;
      if (p >= 2 && p <= N - 3) {
        d = (at(p - 2) - 8.0 * at(p - 1) + 8.0 * at(p + 1) - at(p + 2)) / (12.0 * h);
      } else if (p < 2) {
        const long q = p;  // forward stencil anchored at 0
        const double c[5][5] = {{-25, 48, -36, 16, -3}, {-3, -10, 18, -6, 1}};
        d = 0.0;
        for (int m = 0; m < 5; ++m) d += c[q][m] * at(m);
        d /= 12.0 * h;
      } else {
        const long q = N - 1 - p;
        const double c[5][5] = {{25, -48, 36, -16, 3}, {3, 10, -18, 6, -1}};
        d = 0.0;
        for (int m = 0; m < 5; ++m) d += c[q][m] * at(N - 1 - m);
        d /= 12.0 * h;
      }
      out[i] = d;
    }
    return out;
  }

  std::shared_ptr<const std::vector<cplx>> deriv_grid(const MultiIndex& beta) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(beta);
    if (it != cache_.end()) return it->second;
    std::vector<cplx> v = g_.values;
    for (int a = 0; a < dim(); ++a)
      for (int r = 0; r < beta[a]; ++r) v = diff_axis(v, a);
    auto p = std::make_shared<const std::vector<cplx>>(std::move(v));
    cache_.emplace(beta, p);
    return p;
  }

  GridFunction g_;
  mutable std::mutex mutex_;
  mutable std::map<MultiIndex, std::shared_ptr<const std::vector<cplx>>> cache_;
};

// ---------------------------------------------------------------- affine images

// d^beta [f(L x)] = sum_gamma c_gamma (d^gamma f)(L x), from d/dx_i = sum_l L_li d_l.
std::vector<std::pair<MultiIndex, double>> chain_rule_terms(const Mat& L, const MultiIndex& beta) {
  const int n = static_cast<int>(beta.size());
  std::map<MultiIndex, double> acc;
  acc[MultiIndex(n, 0)] = 1.0;
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < beta[i]; ++r) {
      std::map<MultiIndex, double> next;
      for (const auto& [gamma, c] : acc) {
        for (int l = 0; l < n; ++l) {
          if (L(l, i) == 0.0) continue;
          MultiIndex g2 = gamma;
          ++g2[l];
          next[g2] += c * L(l, i);
        }
      }
      acc.swap(next);
    }
  }
  return {acc.begin(), acc.end()};
}

class DilatedModel final : public GeneratorModel {
 public:
  DilatedModel(Generator base, const DilationInfo& d, int j, IVec k)
      : base_(std::move(base)), j_(j), k_(std::move(k)) {
    if (base_.dim() != d.dimension) throw Error(ErrorKind::InvalidArgument, "generator/dilation dimension mismatch");
    aj_ = d.power(j);
    ainv_j_ = d.power(-j);
    astar_inv_j_ = ainv_j_.transpose();
    amp_ = std::pow(d.determinant_abs, 0.5 * j);
    shift_ = ainv_j_ * k_.cast<double>();
  }
  GeneratorKind kind() const override { return base_.kind(); }
  std::string name() const override {
    std::ostringstream s;
    s << base_.name() << "[j=" << j_ << ",k=(";
    for (int i = 0; i < k_.size(); ++i) s << (i ? "," : "") << k_[i];
    s << ")]";
    return s.str();
  }
  int dim() const override { return base_.dim(); }
  cplx value(const Vec& x) const override { return amp_ * base_.value(inner(x)); }
  bool has_fourier() const override { return base_.has_fourier(); }
  cplx fourier(const Vec& xi) const override {
    return std::polar(1.0 / amp_, -shift_.dot(xi)) * base_.fourier(astar_inv_j_ * xi);
  }
  int max_derivative_order() const override { return base_.max_derivative_order(); }
  cplx derivative(const MultiIndex& beta, const Vec& x) const override {
    const Vec y = inner(x);
    cplx acc = 0.0;
    for (const auto& [gamma, c] : chain_rule_terms(aj_, beta)) acc += c * base_.derivative(gamma, y);
    return amp_ * acc;
  }
  QuadHints hints() const override {
    QuadHints b = base_.hints();
    QuadHints h = b;
    const double n_inv = ainv_j_.operatorNorm();
    const double n_fwd = aj_.operatorNorm();
    h.center = ainv_j_ * (b.center + k_.cast<double>());
    h.radius = b.radius * n_inv;
    h.step = b.step / n_fwd;
    h.freq_radius = b.freq_radius * n_fwd;
    h.freq_step = b.freq_step / n_inv;
    if (b.band_limited) h.freq_radius = b.freq_radius * std::sqrt(static_cast<double>(dim())) * n_fwd;
    return h;
  }

 private:
  Vec inner(const Vec& x) const { return aj_ * x - k_.cast<double>(); }

  Generator base_;
  int j_;
  IVec k_;
  Mat aj_;
  Mat ainv_j_;
  Mat astar_inv_j_;
  double amp_;
  Vec shift_;
};

class LinearCombinationModel final : public GeneratorModel {
 public:
  explicit LinearCombinationModel(std::vector<std::pair<cplx, Generator>> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw Error(ErrorKind::InvalidArgument, "empty linear combination");
    for (const auto& t : terms_)
      if (t.second.dim() != terms_.front().second.dim())
        throw Error(ErrorKind::InvalidArgument, "linear combination of mixed dimensions");
  }
  GeneratorKind kind() const override { return terms_.front().second.kind(); }
  std::string name() const override {
    std::ostringstream s;
    for (size_t i = 0; i < terms_.size(); ++i)
      s << (i ? " + " : "") << "(" << terms_[i].first.real() << "," << terms_[i].first.imag() << ")*"
        << terms_[i].second.name();
    return s.str();
  }
  int dim() const override { return terms_.front().second.dim(); }
  cplx value(const Vec& x) const override {
    cplx acc = 0.0;
    for (const auto& [c, g] : terms_) acc += c * g.value(x);
    return acc;
  }
  bool has_fourier() const override {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.second.has_fourier(); });
  }
  cplx fourier(const Vec& xi) const override {
    cplx acc = 0.0;
    for (const auto& [c, g] : terms_) acc += c * g.fourier(xi);
    return acc;
  }
  int max_derivative_order() const override {
    int m = 1 << 20;
    for (const auto& t : terms_) m = std::min(m, t.second.max_derivative_order());
    return m;
  }
  cplx derivative(const MultiIndex& beta, const Vec& x) const override {
    cplx acc = 0.0;
    for (const auto& [c, g] : terms_) acc += c * g.derivative(beta, x);
    return acc;
  }
  QuadHints hints() const override {
    QuadHints h = terms_.front().second.hints();
    Vec lo = h.center.array() - h.radius;
    Vec hi = h.center.array() + h.radius;
    for (const auto& t : terms_) {
      const QuadHints q = t.second.hints();
      lo = lo.cwiseMin(Vec(q.center.array() - q.radius));
      hi = hi.cwiseMax(Vec(q.center.array() + q.radius));
      h.step = std::min(h.step, q.step);
      h.freq_radius = std::max(h.freq_radius, q.freq_radius);
      h.freq_step = std::min(h.freq_step, q.freq_step);
      h.band_limited = h.band_limited && q.band_limited;
      h.zero_near_origin = h.zero_near_origin && q.zero_near_origin;
    }
    h.center = 0.5 * (lo + hi);
    h.radius = 0.5 * (hi - lo).maxCoeff();
    return h;
  }

 private:
  std::vector<std::pair<cplx, Generator>> terms_;
};

}  // namespace

double meyer_window(double u, double u0, int order) {
  const double t = u - u0;
  if (t <= 0.0 || t >= 2.0) return 0.0;
  if (t <= 1.0) return std::sin(0.5 * kPi * smoothstep(t, order));
  return std::cos(0.5 * kPi * smoothstep(t - 1.0, order));
}

Generator mexican_hat_2d() { return Generator(std::make_shared<MexicanHatModel>()); }

Generator gaussian_deriv(const MultiIndex& alpha) {
  if (alpha.empty() || static_cast<int>(alpha.size()) > kMaxDim)
    throw Error(ErrorKind::InvalidArgument, "gaussian_deriv: dimension out of range");
  for (int a : alpha)
    if (a < 0) throw Error(ErrorKind::InvalidArgument, "gaussian_deriv: negative order");
  return Generator(std::make_shared<GaussianDerivModel>(alpha));
}

Generator meyer_partition(const DilationInfo& d, int order) {
  return Generator(std::make_shared<MeyerModel>(d, order));
}

std::optional<MeyerParams> meyer_params(const Generator& g) {
  if (auto* m = dynamic_cast<const MeyerModel*>(&g.model())) return m->params();
  return std::nullopt;
}

Generator sampled_grid(GridFunction grid) { return Generator(std::make_shared<SampledGridModel>(std::move(grid))); }

Generator dilate_translate(const Generator& g, const DilationInfo& d, int j, const IVec& k) {
  if (k.size() != d.dimension) throw Error(ErrorKind::InvalidArgument, "translation dimension mismatch");
  return Generator(std::make_shared<DilatedModel>(g, d, j, k));
}

Generator linear_combination(const std::vector<std::pair<cplx, Generator>>& terms) {
  return Generator(std::make_shared<LinearCombinationModel>(terms));
}

Generator scaled(const Generator& g, cplx c) { return linear_combination({{c, g}}); }

MomentTable moment_table(const Generator& g, int up_to, double box_half_width, double tol) {
  if (up_to < 0) throw Error(ErrorKind::InvalidArgument, "up_to must be >= 0");
  const QuadHints h = g.hints();
  const int n = g.dim();
  MomentTable t;
  for (int order = 0; order <= up_to; ++order) {
    MultiIndex cur(n, 0);
    std::function<void(int, int)> rec = [&](int axis, int left) {
      if (axis == n - 1) {
        cur[axis] = left;
        t.gammas.push_back(cur);
        return;
      }
      for (int v = left; v >= 0; --v) {
        cur[axis] = v;
        rec(axis + 1, left - v);
      }
    };
    rec(0, order);
  }
  // a transform vanishing near 0 kills every moment
  if (h.zero_near_origin) {
    t.values.assign(t.gammas.size(), 0.0);
    t.vanishing_order = up_to;
    return t;
  }

  auto moments = [&](double half) {
    std::vector<cplx> m(t.gammas.size(), 0.0);
    BoxRule rule{Vec::Zero(n), half, h.step};
    for_each_node(rule, [&](const Vec& x, double w) {
      const cplx v = g.value(x) * w;
      for (size_t i = 0; i < t.gammas.size(); ++i) {
        double p = 1.0;
        for (int a = 0; a < n; ++a) p *= std::pow(x[a], t.gammas[i][a]);
        m[i] += v * p;
      }
    });
    return m;
  };
  const auto m1 = moments(box_half_width);
  t.values = moments(2.0 * box_half_width);
  for (size_t i = 0; i < t.gammas.size(); ++i)
    if (std::abs(t.values[i] - m1[i]) > tol)
      throw Error(ErrorKind::QuadratureNotConverged, "moment changed under box doubling");

  t.vanishing_order = -1;
  for (int order = 0; order <= up_to; ++order) {
    for (size_t i = 0; i < t.gammas.size(); ++i)
      if (total_order(t.gammas[i]) == order && std::abs(t.values[i]) > tol) return t;
    t.vanishing_order = order;
  }
  return t;
}

int vanishing_moments(const Generator& g, int up_to, double box_half_width, double tol) {
  return moment_table(g, up_to, box_half_width, tol).vanishing_order;
}

}  // namespace aniframe
