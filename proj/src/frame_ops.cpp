#include "aniframe/frame_ops.hpp"

#include "aniframe/quadrature.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>

namespace aniframe {

cplx inner_product(const Generator& f, const Generator& g, InnerProductMethod method, double tol) {
  if (f.dim() != g.dim()) throw Error(ErrorKind::InvalidArgument, "inner_product: dimension mismatch");
  const int n = f.dim();
  const bool both_fourier = f.has_fourier() && g.has_fourier();
  if (method == InnerProductMethod::Fourier && !both_fourier)
    throw Error(ErrorKind::InvalidArgument, "inner_product: Fourier method needs Fourier access on both");
  const bool use_fourier = method == InnerProductMethod::Fourier || (method == InnerProductMethod::Auto && both_fourier);

  const QuadHints hf = f.hints();
  const QuadHints hg = g.hints();
  AdaptiveOptions opt;
  opt.tol = tol;

  if (use_fourier) {
    BoxRule rule;
    rule.center = Vec::Zero(n);
    const bool bl = hf.band_limited || hg.band_limited;
    if (bl) {
      rule.half_width = std::numeric_limits<double>::infinity();
      if (hf.band_limited) rule.half_width = std::min(rule.half_width, hf.freq_radius);
      if (hg.band_limited) rule.half_width = std::min(rule.half_width, hg.freq_radius);
    } else {
      rule.half_width = std::max(hf.freq_radius, hg.freq_radius);
    }
    // the trapezoid in xi aliases the cross-correlation with period 2 pi / step
    const double extent = (hf.center - hg.center).norm() + hf.radius + hg.radius;
    rule.step = std::min({hf.freq_step, hg.freq_step, 2.0 * kPi / (1.25 * extent)});
    opt.fixed_box = bl;
    const PairIntegral r = adaptive_pair_integral([&](const Vec& xi) { return f.fourier(xi); },
                                                  [&](const Vec& xi) { return g.fourier(xi); }, rule, opt);
    return r.value / std::pow(2.0 * kPi, n);
  }

  Vec lo = (hf.center.array() - hf.radius).matrix().cwiseMin(Vec(hg.center.array() - hg.radius));
  Vec hi = (hf.center.array() + hf.radius).matrix().cwiseMax(Vec(hg.center.array() + hg.radius));
  BoxRule rule;
  rule.center = 0.5 * (lo + hi);
  rule.half_width = 0.5 * (hi - lo).maxCoeff();
  rule.step = std::min(hf.step, hg.step);
  const PairIntegral r =
      adaptive_pair_integral([&](const Vec& x) { return f.value(x); }, [&](const Vec& x) { return g.value(x); }, rule, opt);
  return r.value;
}

std::vector<Generator> window_elements(const Generator& g, const DilationInfo& d, const TruncationWindow& w) {
  std::vector<Generator> out;
  out.reserve(w.indices.size());
  for (const auto& q : w.indices) out.push_back(dilate_translate(g, d, q.j, q.k));
  return out;
}

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

long next_pow2(long v) {
  long p = 1;
  while (p < v) p <<= 1;
  return p;
}

// One (orientation, Delta) block of the lattice-exact path:
//   g(t) = (2 pi)^-n int H(eta) e^{-i <t, eta>} d eta,  t integer,
// with H periodized onto [-pi, pi)^n and the integral taken by an N^n FFT.
struct FftBlock {
  std::vector<std::pair<long, long>> pairs;  // (row, col)
  std::vector<IVec> t;
};

void run_fft_block(const Generator& psi, const Generator& phi, const DilationInfo& d, int delta, bool plus,
                   const FftBlock& blk, CMatrix& out) {
  const int n = d.dimension;
  const Mat ad = d.power(delta);
  const Mat ad_star = ad.transpose();
  const double amp = std::pow(d.determinant_abs, 0.5 * delta);
  const QuadHints hp = psi.hints();
  const QuadHints hq = phi.hints();

  // frequency half-width of H and spatial extent of g
  const double smin = 1.0 / d.power(-delta).operatorNorm();  // sigma_min(A^delta)
  const double r_plain = plus ? hq.freq_radius : hp.freq_radius;
  const double r_dil = (plus ? hp.freq_radius : hq.freq_radius) / smin;
  const double rh = std::min(r_plain, r_dil);
  const QuadHints& hs_dil = plus ? hp : hq;
  const QuadHints& hs_plain = plus ? hq : hp;
  const double extent = ad.operatorNorm() * (hs_dil.center.norm() + hs_dil.radius) + hs_plain.center.norm() + hs_plain.radius;

  long tmax = 0;
  for (const IVec& t : blk.t) tmax = std::max(tmax, t.cwiseAbs().maxCoeff());
  const long N = next_pow2(static_cast<long>(std::ceil(static_cast<double>(tmax) + extent)) + 64);
  const long M = std::max(0L, static_cast<long>(std::ceil((rh - kPi) / (2.0 * kPi) - 1e-12)));
  const long side = 2 * M + 1;
  long shifts = 1, total = 1;
  for (int a = 0; a < n; ++a) {
    shifts *= side;
    total *= N;
  }

  std::vector<cplx> H(total);
  bool any = false;
#pragma omp parallel for schedule(static) reduction(|| : any)
  for (long i = 0; i < total; ++i) {
    Vec eta0(n);
    long r = i;
    for (int a = n - 1; a >= 0; --a) {
      eta0[a] = -kPi + 2.0 * kPi * static_cast<double>(r % N) / static_cast<double>(N);
      r /= N;
    }
    cplx acc = 0.0;
    for (long s = 0; s < shifts; ++s) {
      Vec eta = eta0;
      long q = s;
      for (int a = n - 1; a >= 0; --a) {
        eta[a] += 2.0 * kPi * static_cast<double>(q % side - M);
        q /= side;
      }
      const cplx v = plus ? psi.fourier(ad_star * eta) * std::conj(phi.fourier(eta))
                          : psi.fourier(eta) * std::conj(phi.fourier(ad_star * eta));
      acc += v;
    }
    H[i] = acc;
    any = any || acc != cplx(0.0, 0.0);
  }
  if (!any) {
    for (const auto& [row, col] : blk.pairs) out(row, col) = 0.0;
    return;
  }

  std::vector<int> dims(n, static_cast<int>(N));
  auto* data = reinterpret_cast<fftw_complex*>(H.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(n, dims.data(), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  const double scale = amp / static_cast<double>(total);
  for (size_t e = 0; e < blk.pairs.size(); ++e) {
    const IVec& t = blk.t[e];
    long lin = 0;
    long tsum = 0;
    for (int a = 0; a < n; ++a) {
      lin = lin * N + ((t[a] % N) + N) % N;
      tsum += t[a];
    }
    const double sign = (tsum % 2 == 0) ? 1.0 : -1.0;  // e^{i pi sum t} from the [-pi, pi) origin
    out(blk.pairs[e].first, blk.pairs[e].second) = sign * scale * H[lin];
  }
}

CMatrix gram_fft(const FrameSystem& sys) {
  const auto& w = sys.window;
  const auto& d = sys.dilation;
  const long N = w.size();
  CMatrix out(N, N);
  std::map<std::pair<int, bool>, FftBlock> blocks;
  std::map<int, Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>> powers;
  auto ipower = [&](int delta) -> const auto& {
    auto it = powers.find(delta);
    if (it == powers.end()) it = powers.emplace(delta, d.power(delta).array().round().cast<long>().matrix()).first;
    return it->second;
  };
  for (long r = 0; r < N; ++r) {
    for (long c = 0; c < N; ++c) {
      const auto& q = w[r];  // analyzer
      const auto& p = w[c];  // synthesizer
      const bool plus = q.j >= p.j;
      const int delta = plus ? q.j - p.j : p.j - q.j;
      auto& blk = blocks[{delta, plus}];
      blk.pairs.emplace_back(r, c);
      blk.t.push_back(plus ? IVec(ipower(delta) * p.k - q.k) : IVec(p.k - ipower(delta) * q.k));
    }
  }
  // Meyer partitions of this dilation live on tau in (u0, u0 + 2) and
  // tau(A* xi) = tau(xi) + 1, so scale gaps >= 2 give exactly disjoint supports
  const auto mp = meyer_params(sys.synthesizer);
  const auto mq = meyer_params(sys.analyzer);
  const bool banded = mp && mq && mp->dilation == d.matrix && mq->dilation == d.matrix;
  for (const auto& [key, blk] : blocks) {
    if (banded && key.first >= 2) {
      for (const auto& [row, col] : blk.pairs) out(row, col) = 0.0;
      continue;
    }
    run_fft_block(sys.synthesizer, sys.analyzer, d, key.first, key.second, blk, out);
  }
  return out;
}

void check_system(const FrameSystem& sys) {
  if (sys.window.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty window");
  if (sys.synthesizer.dim() != sys.dilation.dimension || sys.analyzer.dim() != sys.dilation.dimension)
    throw Error(ErrorKind::InvalidArgument, "generator and dilation dimensions differ");
}

GramMatrix wrap(const FrameSystem& sys, CMatrix m, const char* method) {
  GramMatrix g;
  g.window = sys.window;
  g.entries = std::move(m);
  g.synthesizer = sys.synthesizer.name();
  g.analyzer = sys.analyzer.name();
  g.dilation = sys.dilation.matrix;
  g.method = method;
  return g;
}

constexpr long kColumnBlock = 64;

template <class F>
void for_column_blocks(long count, F&& f) {
  for (long start = 0; start < count; start += kColumnBlock) f(start, std::min(count, start + kColumnBlock));
}

}  // namespace

GramMatrix gram_matrix(const FrameSystem& sys, double tol, GramPath path) {
  check_system(sys);
  const bool fft_ok = sys.dilation.is_integer && sys.synthesizer.has_fourier() && sys.analyzer.has_fourier();
  if (path == GramPath::Fft && !fft_ok)
    throw Error(ErrorKind::InvalidArgument, "FFT Gram path needs an integer dilation and Fourier access");
  if (path == GramPath::Fft || (path == GramPath::Auto && fft_ok)) return wrap(sys, gram_fft(sys), "fft");
  auto synth = window_elements(sys.synthesizer, sys.dilation, sys.window);
  auto anal = window_elements(sys.analyzer, sys.dilation, sys.window);
  return wrap(sys, kernels::omp::gram_direct(synth, anal, InnerProductMethod::Auto, tol), "direct");
}

GramMatrix gram_matrix_reference(const FrameSystem& sys, double tol) {
  check_system(sys);
  auto synth = window_elements(sys.synthesizer, sys.dilation, sys.window);
  auto anal = window_elements(sys.analyzer, sys.dilation, sys.window);
  return wrap(sys, kernels::serial::gram_direct(synth, anal, InnerProductMethod::Auto, tol), "direct-serial");
}

namespace {

bool fourier_analysis_ok(const FrameSystem& sys) {
  const Mat& m = sys.dilation.matrix;
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      if (r != c && m(r, c) != 0.0) return false;
  const QuadHints h = sys.analyzer.hints();
  return sys.analyzer.has_fourier() && h.band_limited && h.freq_radius <= kPi * (1.0 + 1e-12);
}

// All coefficients of one scale:
//   <f, phi_{j,k}> = b^{j/2} (2 pi)^-n int_{[-pi,pi]^n} F(A*^j eta) conj(phi^(eta)) e^{i <k, eta>} d eta
// with F the grid transform h^n sum_x f(x) e^{-i <x, xi>}; the eta integral is
// an N^n trapezoid sum, i.e. an inverse FFT, exact up to aliasing of k mod N.
void analyze_scale_fourier(const FrameSystem& sys, const GridFunction& f, int j, const std::vector<long>& rows,
                           CVector& out) {
  const int n = sys.dilation.dimension;
  const auto& w = sys.window;
  const Mat aj = sys.dilation.power(j);
  const GridSpec& g = f.spec;

  // k range: window indices plus the image of f's box, with room for the analyzer's spread
  std::vector<long> N(n);
  long total = 1;
  for (int a = 0; a < n; ++a) {
    long lo = std::numeric_limits<long>::max(), hi = std::numeric_limits<long>::min();
    for (long r : rows) {
      lo = std::min<long>(lo, w[r].k[a]);
      hi = std::max<long>(hi, w[r].k[a]);
    }
    const double e0 = aj(a, a) * g.origin[a];
    const double e1 = aj(a, a) * (g.origin[a] + g.spacing[a] * static_cast<double>(g.extents[a] - 1));
    const double flo = std::min({e0, e1, static_cast<double>(lo)});
    const double fhi = std::max({e0, e1, static_cast<double>(hi)});
    N[a] = next_pow2(static_cast<long>(std::ceil(fhi - flo)) + 64);
    total *= N[a];
  }

  // separable grid transform: contract one axis at a time, row-major layout
  std::vector<cplx> cur(f.values.begin(), f.values.end());
  std::vector<long> dims(g.extents.begin(), g.extents.end());
  for (int a = 0; a < n; ++a) {
    const long na = dims[a];
    long outer = 1, inner = 1;
    for (int b = 0; b < a; ++b) outer *= dims[b];
    for (int b = a + 1; b < n; ++b) inner *= dims[b];
    CMatrix E(N[a], na);
    for (long l = 0; l < N[a]; ++l) {
      const double xi = aj(a, a) * (-kPi + 2.0 * kPi * static_cast<double>(l) / static_cast<double>(N[a]));
      for (long i = 0; i < na; ++i) E(l, i) = std::polar(g.spacing[a], -xi * (g.origin[a] + g.spacing[a] * static_cast<double>(i)));
    }
    std::vector<cplx> next(static_cast<size_t>(outer * N[a] * inner));
    for (long o = 0; o < outer; ++o) {
      const Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> in(
          cur.data() + o * na * inner, na, inner);
      Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> res(
          next.data() + o * N[a] * inner, N[a], inner);
      res.noalias() = E * in;
    }
    cur.swap(next);
    dims[a] = N[a];
  }

#pragma omp parallel for schedule(static)
  for (long i = 0; i < total; ++i) {
    Vec eta(n);
    long r = i;
    for (int a = n - 1; a >= 0; --a) {
      eta[a] = -kPi + 2.0 * kPi * static_cast<double>(r % N[a]) / static_cast<double>(N[a]);
      r /= N[a];
    }
    cur[i] *= std::conj(sys.analyzer.fourier(eta));
  }

  std::vector<int> idims(N.begin(), N.end());
  auto* data = reinterpret_cast<fftw_complex*>(cur.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(n, idims.data(), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  const double scale = std::pow(sys.dilation.determinant_abs, 0.5 * j) / static_cast<double>(total);
  for (long r : rows) {
    const IVec& k = w[r].k;
    long lin = 0, ksum = 0;
    for (int a = 0; a < n; ++a) {
      lin = lin * N[a] + ((k[a] % N[a]) + N[a]) % N[a];
      ksum += k[a];
    }
    out[r] = ((ksum % 2 == 0) ? scale : -scale) * cur[lin];
  }
}

}  // namespace

CVector analysis_coefficients(const FrameSystem& sys, const GridFunction& f, AnalysisPath path) {
  check_system(sys);
  if (f.spec.dim() != sys.dilation.dimension)
    throw Error(ErrorKind::InvalidArgument, "function and dilation dimensions differ");
  const bool fourier_ok = fourier_analysis_ok(sys);
  if (path == AnalysisPath::Fourier && !fourier_ok)
    throw Error(ErrorKind::InvalidArgument,
                "Fourier analysis path needs a diagonal dilation and an analyzer band-limited to [-pi, pi]^n");
  CVector out(sys.window.size());
  if (path == AnalysisPath::Fourier || (path == AnalysisPath::Auto && fourier_ok)) {
    std::map<int, std::vector<long>> by_scale;
    for (long r = 0; r < sys.window.size(); ++r) by_scale[sys.window[r].j].push_back(r);
    for (const auto& [j, rows] : by_scale) analyze_scale_fourier(sys, f, j, rows, out);
    return out;
  }
  const auto anal = window_elements(sys.analyzer, sys.dilation, sys.window);
  const Eigen::Map<const CVector> fv(f.values.data(), static_cast<long>(f.values.size()));
  const double vol = f.spec.cell_volume();
  for_column_blocks(static_cast<long>(anal.size()), [&](long a, long b) {
    std::vector<Generator> block(anal.begin() + a, anal.begin() + b);
    const CMatrix cols = kernels::omp::sample_columns(block, f.spec, {}, 1.0);
    out.segment(a, b - a) = vol * (cols.adjoint() * fv);
  });
  return out;
}

namespace {

GridFunction synthesize_elements(const std::vector<Generator>& elems, const CVector& coeffs, const GridSpec& grid) {
  GridFunction out(grid);
  Eigen::Map<CVector> ov(out.values.data(), static_cast<long>(out.values.size()));
  for_column_blocks(static_cast<long>(elems.size()), [&](long a, long b) {
    if (coeffs.segment(a, b - a).isZero(0.0)) return;
    std::vector<Generator> block(elems.begin() + a, elems.begin() + b);
    const CMatrix cols = kernels::omp::sample_columns(block, grid, {}, 1.0);
    ov += cols * coeffs.segment(a, b - a);
  });
  return out;
}

}  // namespace

GridFunction synthesize(const FrameSystem& sys, const CVector& coeffs, const GridSpec& grid) {
  check_system(sys);
  if (coeffs.size() != sys.window.size()) throw Error(ErrorKind::InvalidArgument, "coefficient length mismatch");
  return synthesize_elements(window_elements(sys.synthesizer, sys.dilation, sys.window), coeffs, grid);
}

double boundary_energy_fraction(const TruncationWindow& w, const CVector& coeffs) {
  const auto mask = boundary_mask(w);
  double edge = 0.0, total = 0.0;
  for (long i = 0; i < coeffs.size(); ++i) {
    const double e = std::norm(coeffs[i]);
    total += e;
    if (mask[i]) edge += e;
  }
  return total > 0.0 ? edge / total : 0.0;
}

GridFunction frame_apply(const FrameSystem& sys, const GridFunction& f, double gate) {
  const CVector a = analysis_coefficients(sys, f);
  const double frac = boundary_energy_fraction(sys.window, a);
  if (frac > gate)
    throw Error(ErrorKind::WindowTooSmall,
                "boundary coefficients carry " + std::to_string(100.0 * frac) + "% of the energy");
  return synthesize(sys, a, f.spec);
}

PowerIterationResult spectral_norm(const CMatrix& E, double tol, int max_iter, std::uint64_t seed) {
  PowerIterationResult res;
  if (E.size() == 0) throw Error(ErrorKind::EmptyMatrix, "spectral_norm of an empty matrix");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  CVector v(E.cols());
  for (long i = 0; i < v.size(); ++i) v[i] = cplx(nd(rng), nd(rng));
  v.normalize();
  double prev = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    const CVector w = E.adjoint() * (E * v);
    const double lambda = v.dot(w).real();
    const double wn = w.norm();
    res.iterations = it;
    if (wn == 0.0) {
      res.sigma = 0.0;
      return res;
    }
    if (prev >= 0.0 && std::abs(lambda - prev) <= tol * std::max(lambda, 1e-300)) {
      res.sigma = std::sqrt(std::max(0.0, lambda));
      return res;
    }
    prev = lambda;
    v = w / wn;
  }
  throw Error(ErrorKind::PowerIterationStalled, "power iteration did not settle in " + std::to_string(max_iter) + " steps");
}

Deviation deviation_from_identity(const GramMatrix& S, double ref_diag, const DilationInfo& d,
                                  const AlmostDiagonalParams& ad, std::uint64_t seed) {
  if (S.entries.rows() != S.entries.cols()) throw Error(ErrorKind::InvalidArgument, "deviation needs a square matrix");
  if (!(ref_diag > 0.0)) throw Error(ErrorKind::InvalidArgument, "ref_diag must be positive");
  const long N = S.entries.rows();
  const CMatrix E = (ref_diag * CMatrix::Identity(N, N) - S.entries) / ref_diag;
  Deviation dev;
  const auto pw = spectral_norm(E, 1e-10, 10000, seed);
  dev.spectral = pw.sigma;
  dev.iterations = pw.iterations;
  dev.algebra_proxy = almost_diagonal_fit(E, S.window, ad.delta, ad.eps, ad.p, d).C_M;
  return dev;
}

NeumannResult neumann_invert(const CMatrix& S, double ref_diag, double q_bound, double tol, int max_terms) {
  if (S.rows() != S.cols() || S.size() == 0) throw Error(ErrorKind::InvalidArgument, "neumann_invert needs a square matrix");
  if (!(ref_diag > 0.0)) throw Error(ErrorKind::InvalidArgument, "ref_diag must be positive");
  if (max_terms < 1) throw Error(ErrorKind::InvalidArgument, "max_terms must be >= 1");
  if (!(q_bound >= 0.0) || q_bound >= 1.0 - 1e-9)
    throw Error(ErrorKind::NotContractive, "deviation q = " + std::to_string(q_bound) + " is not < 1");
  const long n = S.rows();
  int N = 0;
  while (N + 1 < max_terms && std::pow(q_bound, N + 1) / (1.0 - q_bound) >= tol) ++N;

  const CMatrix I = CMatrix::Identity(n, n);
  const CMatrix Q = I - S / ref_diag;
  CMatrix X = I;  // Horner: X <- I + Q X
  for (int m = 1; m <= N; ++m) X = I + Q * X;

  NeumannResult r;
  r.inverse = X / ref_diag;
  r.terms_used = N + 1;
  r.q = q_bound;
  r.tail_bound = std::pow(q_bound, N + 1) / (1.0 - q_bound);
  return r;
}

CMatrix almost_diagonal_noise(const TruncationWindow& w, const DilationInfo& d, const AlmostDiagonalParams& ad,
                              std::uint64_t seed) {
  const long N = w.size();
  if (N == 0) throw Error(ErrorKind::EmptyMatrix, "almost_diagonal_noise on an empty window");
  std::vector<DyadicCube> cubes;
  cubes.reserve(N);
  for (const auto& q : w.indices) cubes.push_back(cube(d, q));
  std::mt19937_64 rng(seed);
  auto unit = [&] { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
  CMatrix E(N, N);
  for (long r = 0; r < N; ++r)
    for (long c = 0; c < N; ++c) {
      const double re = unit();
      const double im = unit();
      E(r, c) = cplx(re, im) * omega_weight(cubes[r], cubes[c], ad.delta, ad.eps, ad.p, d);
    }
  const CMatrix H = 0.5 * (E + E.adjoint());
  // exact norm of a Hermitian matrix: largest |eigenvalue|
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<CMatrix>(H, Eigen::EigenvaluesOnly).eigenvalues();
  const double s = ev.cwiseAbs().maxCoeff();
  if (!(s > 0.0)) throw Error(ErrorKind::ZeroNorm, "noise matrix vanished");
  return H / s;
}

DualReport dual_from_inverse(const CMatrix& S_inv, const CMatrix& S, const FrameSystem& sys, const GridSpec& grid,
                             const AlmostDiagonalParams& ad, const std::vector<long>& which) {
  check_system(sys);
  const long N = sys.window.size();
  if (S_inv.rows() != N || S_inv.cols() != N) throw Error(ErrorKind::InvalidArgument, "S_inv does not match window");
  DualReport rep;
  const auto anal = window_elements(sys.analyzer, sys.dilation, sys.window);
  if (which.empty()) {
    rep.sampled_indices.resize(N);
    for (long i = 0; i < N; ++i) rep.sampled_indices[i] = i;
  } else {
    rep.sampled_indices = which;
  }
  for (long q : rep.sampled_indices) {
    if (q < 0 || q >= N) throw Error(ErrorKind::InvalidArgument, "dual index out of range");
    // <f, phi*_Q> = sum_P (S^-1)_{Q,P} <f, phi_P> fixes the conjugation
    const CVector row = S_inv.row(q).adjoint();
    rep.dual_samples.push_back(synthesize_elements(anal, row, grid));
  }
  rep.fit_S = almost_diagonal_fit(S, sys.window, ad.delta, ad.eps, ad.p, sys.dilation);
  rep.fit_Sinv = almost_diagonal_fit(S_inv, sys.window, ad.delta, ad.eps, ad.p, sys.dilation);
  return rep;
}

}  // namespace aniframe
