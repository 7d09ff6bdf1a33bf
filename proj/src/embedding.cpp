#include "aniframe/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace aniframe {

double lq_norm(const GridFunction& f, double q) {
  if (!(q > 0.0)) throw Error(ErrorKind::InvalidExponent, "q must be positive");
  double acc = 0.0;
  for (const cplx& v : f.values) acc += std::pow(std::abs(v), q);
  return std::pow(acc * f.spec.cell_volume(), 1.0 / q);
}

TruncationWindow footprint_window(const DilationInfo& d, int j_min, int j_max, const Vec& lo, const Vec& hi,
                                  double margin) {
  const int n = d.dimension;
  std::vector<LatticeIndex> idx;
  for (int j = j_min; j <= j_max; ++j) {
    const Mat inv = d.power(-j);
    const Mat fwd = d.power(j);
    const double m = margin * inv.operatorNorm();
    const Vec blo = lo.array() - m, bhi = hi.array() + m;
    // bounding box of A^j applied to the widened box gives the candidate k range
    Vec klo = Vec::Constant(n, std::numeric_limits<double>::infinity()), khi = -klo;
    for (int v = 0; v < (1 << n); ++v) {
      Vec c(n);
      for (int a = 0; a < n; ++a) c[a] = ((v >> a) & 1) ? bhi[a] : blo[a];
      const Vec y = fwd * c;
      klo = klo.cwiseMin(y);
      khi = khi.cwiseMax(y);
    }
    std::vector<long> k0(n), span(n);
    long total = 1;
    for (int a = 0; a < n; ++a) {
      k0[a] = static_cast<long>(std::floor(klo[a])) - 1;
      span[a] = static_cast<long>(std::ceil(khi[a])) - k0[a] + 1;
      total *= span[a];
    }
    for (long t = 0; t < total; ++t) {
      LatticeIndex q;
      q.j = j;
      q.k.resize(n);
      long r = t;
      for (int a = n - 1; a >= 0; --a) {
        q.k[a] = k0[a] + r % span[a];
        r /= span[a];
      }
      // keep cubes whose bounding box meets the widened box
      bool hit = true;
      const DyadicCube c = cube(d, q);
      for (int a = 0; a < n && hit; ++a) {
        double vlo = std::numeric_limits<double>::infinity(), vhi = -vlo;
        for (const Vec& v : c.vertices) {
          vlo = std::min(vlo, v[a]);
          vhi = std::max(vhi, v[a]);
        }
        hit = vhi >= blo[a] && vlo <= bhi[a];
      }
      if (hit) idx.push_back(q);
    }
  }
  return window_from_indices(n, std::move(idx));
}

ProxyResult hp_proxy(const GridFunction& f, const DilationInfo& d, double p, const TruncationWindow& window,
                     const Generator& aux, double gate) {
  if (!(p > 0.0)) throw Error(ErrorKind::InvalidExponent, "p must be positive");
  const FrameSystem sys{aux, aux, d, window};
  ProxyResult r;
  r.coefficients.window = window;
  r.coefficients.values = analysis_coefficients(sys, f);
  r.boundary_fraction = boundary_energy_fraction(window, r.coefficients.values);
  if (r.boundary_fraction > gate)
    throw Error(ErrorKind::WindowTooSmall,
                "boundary coefficients carry " + std::to_string(100.0 * r.boundary_fraction) + "% of the energy");
  if (r.coefficients.values.isZero(0.0)) return r;
  r.norm = sequence_norm(r.coefficients, p, d);
  return r;
}

double hp_proxy_norm(const GridFunction& f, const DilationInfo& d, double p, const TruncationWindow& window,
                     const Generator& aux, double gate) {
  return hp_proxy(f, d, p, window, aux, gate).norm;
}

namespace {

bool is_diag(const Mat& m) {
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      if (r != c && m(r, c) != 0.0) return false;
  return true;
}

// length of [x - h/2, x + h/2] inside [a, b]
double overlap(double x, double h, double a, double b) {
  return std::max(0.0, std::min(x + 0.5 * h, b) - std::max(x - 0.5 * h, a));
}

}  // namespace

GridFunction haar_atom(const DilationInfo& d, const LatticeIndex& idx, double p, long cells_per_edge) {
  if (!(p > 0.0)) throw Error(ErrorKind::InvalidExponent, "p must be positive");
  if (cells_per_edge < 2) throw Error(ErrorKind::InvalidArgument, "cells_per_edge must be >= 2");
  const int n = d.dimension;
  const DyadicCube c = cube(d, idx);
  const double amp = std::pow(c.measure, -1.0 / p);
  Vec lo = Vec::Constant(n, std::numeric_limits<double>::infinity()), hi = -lo;
  for (const Vec& v : c.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }

  GridSpec g;
  g.origin.resize(n);
  g.spacing.resize(n);
  g.extents.resize(n);
  const bool diag = is_diag(d.matrix);
  double hmin = std::numeric_limits<double>::infinity();
  const Mat inv = d.power(-idx.j);
  for (int a = 0; a < n; ++a) hmin = std::min(hmin, inv.col(a).norm() / static_cast<double>(cells_per_edge));
  for (int a = 0; a < n; ++a) {
    const double h = diag ? (hi[a] - lo[a]) / static_cast<double>(cells_per_edge) : hmin;
    g.spacing[a] = h;
    g.origin[a] = lo[a] - h;
    g.extents[a] = static_cast<long>(std::ceil((hi[a] - lo[a]) / h - 1e-9)) + 3;
  }
  GridFunction f(g);
  const Mat fwd = d.power(idx.j);
  const Vec kd = idx.k.cast<double>();

  if (diag) {
    // exact cell averages of a box split along axis 0 in the cube's own coordinates
    const double mid = 0.5 * (lo[0] + hi[0]);
    const bool pos_low = fwd(0, 0) > 0.0;  // which physical half maps to (A^j x - k)_0 < 1/2
#pragma omp parallel for schedule(static)
    for (long i = 0; i < g.size(); ++i) {
      const Vec x = g.point(i);
      double v = (overlap(x[0], g.spacing[0], lo[0], mid) - overlap(x[0], g.spacing[0], mid, hi[0])) / g.spacing[0];
      if (!pos_low) v = -v;
      for (int a = 1; a < n; ++a) v *= overlap(x[a], g.spacing[a], lo[a], hi[a]) / g.spacing[a];
      f[i] = amp * v;
    }
    return f;
  }
  // general cubes: 4^n sub-samples per cell
  constexpr int kSub = 4;
  long subs = 1;
  for (int a = 0; a < n; ++a) subs *= kSub;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < g.size(); ++i) {
    const Vec x = g.point(i);
    double acc = 0.0;
    for (long s = 0; s < subs; ++s) {
      Vec xs = x;
      long r = s;
      for (int a = 0; a < n; ++a) {
        xs[a] += ((r % kSub) + 0.5) / kSub * g.spacing[a] - 0.5 * g.spacing[a];
        r /= kSub;
      }
      const Vec y = fwd * xs - kd;
      if ((y.array() >= 0.0).all() && (y.array() < 1.0).all()) acc += y[0] < 0.5 ? 1.0 : -1.0;
    }
    f[i] = amp * acc / static_cast<double>(subs);
  }
  return f;
}

std::vector<TestFunction> default_test_family(const Generator& psi, const DilationInfo& d, double p,
                                              const TestFamilySpec& spec) {
  const int n = d.dimension;
  std::vector<TestFunction> out;
  const int finest = spec.atom_scales.empty() ? 0 : *std::max_element(spec.atom_scales.begin(), spec.atom_scales.end());
  for (int j : spec.atom_scales) {
    LatticeIndex q;
    q.j = j;
    q.k = IVec::Zero(n);
    TestFunction t;
    t.label = "haar_j" + std::to_string(j) + (j == finest ? "_worst" : "");
    t.f = haar_atom(d, q, p, spec.cells_per_edge);
    t.j_lo = j + spec.atom_rel_lo;
    t.j_hi = j + spec.atom_rel_hi;
    out.push_back(std::move(t));
  }

  // raw engine draws keep the family identical across standard libraries
  std::mt19937_64 rng(spec.seed);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const TruncationWindow w = make_window(n, spec.random_j_min, spec.random_j_max, spec.random_k_radius);
  const FrameSystem sys{psi, psi, d, w};
  const GridSpec grid = spaced_grid(n, -spec.random_half_width, spec.random_half_width, spec.random_step);
  for (int r = 0; r < spec.random_count; ++r) {
    CVector c = CVector::Zero(w.size());
    int placed = 0;
    while (placed < std::min<long>(spec.random_nonzeros, w.size())) {
      const long pos = static_cast<long>(rng() % static_cast<std::uint64_t>(w.size()));
      if (c[pos] != 0.0) continue;
      double v = 2.0 * unit() - 1.0;
      if (std::abs(v) < 0.1) v = std::copysign(0.1, v);
      c[pos] = v;
      ++placed;
    }
    TestFunction t;
    t.label = "synth_" + std::to_string(r);
    t.f = synthesize(sys, c, grid);
    t.j_lo = spec.smooth_lo;
    t.j_hi = spec.smooth_hi;
    out.push_back(std::move(t));
  }
  return out;
}

EmbeddingReport embedding_scan(const std::vector<TestFunction>& family, const DilationInfo& d, double p, double q,
                               const Generator& aux, double M_factor, const ScanOptions& opt) {
  if (!(p < q)) throw Error(ErrorKind::InvalidExponent, "embedding scan needs p < q");
  if (family.empty()) throw Error(ErrorKind::InvalidArgument, "empty test family");
  if (!(M_factor > 0.0)) throw Error(ErrorKind::InvalidArgument, "molecular factor must be positive");
  EmbeddingReport rep;
  rep.p = p;
  rep.q = q;
  rep.M_factor = M_factor;
  double rmin = std::numeric_limits<double>::infinity();
  for (const auto& t : family) {
    const int n = t.f.spec.dim();
    Vec lo(n), hi(n);
    for (int a = 0; a < n; ++a) {
      lo[a] = t.f.spec.origin[a];
      hi[a] = t.f.spec.origin[a] + t.f.spec.spacing[a] * static_cast<double>(t.f.spec.extents[a] - 1);
    }
    const TruncationWindow w = footprint_window(d, t.j_lo, t.j_hi, lo, hi, opt.margin);
    const ProxyResult pr = hp_proxy(t.f, d, p, w, aux, opt.gate);
    if (!(pr.norm > 0.0)) {
      rep.excluded.push_back(t.label);
      continue;
    }
    EmbeddingRow row;
    row.label = t.label;
    row.lq = lq_norm(t.f, q);
    row.hp_proxy = pr.norm;
    row.ratio = row.lq / row.hp_proxy;
    row.boundary_fraction = pr.boundary_fraction;
    rep.C_opt_estimate = std::max(rep.C_opt_estimate, row.ratio);
    rmin = std::min(rmin, row.ratio);
    rep.rows.push_back(row);
  }
  if (rep.rows.empty()) throw Error(ErrorKind::ZeroNorm, "every test function has a vanishing proxy norm");
  rep.K_estimate = rep.C_opt_estimate / M_factor;
  rep.K_spread = rmin > 0.0 ? rep.C_opt_estimate / rmin : std::numeric_limits<double>::infinity();
  return rep;
}

EmbeddingReport embedding_scan(const Generator& psi, const GridFunction& dual, const DilationInfo& d, double p,
                               double q, const std::vector<TestFunction>& family, const MolecularParams& mol,
                               const ScanOptions& opt) {
  const double M = pair_constant(psi, sampled_grid(dual), d, mol);
  return embedding_scan(family, d, p, q, meyer_partition(d), M, opt);
}

}  // namespace aniframe
