#pragma once

// Shared bodies for kernels_omp.cpp and kernels_serial.cpp. The `Par`
// template flag only toggles the OpenMP `if` clause, so both builds run the
// same arithmetic in the same per-element order.

#include "aniframe/frame_ops.hpp"
#include "aniframe/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>

namespace aniframe::detail {

// Rethrows the first exception raised inside a parallel region.
class ExceptionSlot {
 public:
  template <class F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      std::lock_guard<std::mutex> lock(m_);
      if (!e_) e_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (e_) std::rethrow_exception(e_);
  }

 private:
  std::mutex m_;
  std::exception_ptr e_;
};

template <bool Par>
std::vector<double> calderon_values(const Generator& g, const std::vector<Mat>& transforms,
                                    const std::vector<Vec>& points, double norm) {
  const long n = static_cast<long>(points.size());
  std::vector<double> out(n, 0.0);
  ExceptionSlot slot;
#pragma omp parallel for schedule(static) if (Par)
  for (long i = 0; i < n; ++i) {
    slot.run([&] {
      double acc = 0.0;
      for (const Mat& t : transforms) acc += std::norm(g.fourier(t * points[i]));
      out[i] = norm * acc;
    });
  }
  slot.rethrow();
  return out;
}

template <bool Par>
std::vector<cplx> sample(const Generator& g, const GridSpec& grid, const MultiIndex& beta) {
  const long n = grid.size();
  std::vector<cplx> out(n);
  const bool plain = beta.empty();
  ExceptionSlot slot;
#pragma omp parallel for schedule(static) if (Par)
  for (long i = 0; i < n; ++i) {
    slot.run([&] {
      const Vec x = grid.point(i);
      out[i] = plain ? g.value(x) : g.derivative(beta, x);
    });
  }
  slot.rethrow();
  return out;
}

template <bool Par>
CMatrix sample_columns(const std::vector<Generator>& cols, const GridSpec& grid, const MultiIndex& beta,
                       double scale) {
  const long rows = grid.size();
  const long nc = static_cast<long>(cols.size());
  CMatrix out(rows, nc);
  const bool plain = beta.empty();
  ExceptionSlot slot;
#pragma omp parallel for collapse(2) schedule(static) if (Par)
  for (long c = 0; c < nc; ++c) {
    for (long r = 0; r < rows; ++r) {
      slot.run([&] {
        const Vec x = grid.point(r);
        out(r, c) = scale * (plain ? cols[c].value(x) : cols[c].derivative(beta, x));
      });
    }
  }
  slot.rethrow();
  return out;
}

template <bool Par>
CMatrix gram_direct(const std::vector<Generator>& synth, const std::vector<Generator>& anal,
                    InnerProductMethod method, double tol) {
  const long nr = static_cast<long>(anal.size());
  const long nc = static_cast<long>(synth.size());
  CMatrix out(nr, nc);
  ExceptionSlot slot;
#pragma omp parallel for collapse(2) schedule(dynamic) if (Par)
  for (long r = 0; r < nr; ++r) {
    for (long c = 0; c < nc; ++c) {
      slot.run([&] {
        try {
          out(r, c) = inner_product(synth[c], anal[r], method, tol);
        } catch (const Error& e) {
          throw Error(e.kind(), std::string(e.what()) + " at entry (" + std::to_string(r) + ", " +
                                    std::to_string(c) + ")");
        }
      });
    }
  }
  slot.rethrow();
  return out;
}

template <bool Par>
double weighted_abs_sum(const CVector& v, const std::vector<double>& w) {
  const long n = v.size();
  // fixed-size blocks folded in order keep the result independent of the thread count
  constexpr long kBlock = 4096;
  const long blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static) if (Par)
  for (long b = 0; b < blocks; ++b) {
    double acc = 0.0;
    const long end = std::min(n, (b + 1) * kBlock);
    for (long i = b * kBlock; i < end; ++i) acc += w[i] * std::abs(v[i]);
    partial[b] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

// int_0^1 |a + t (b - a)| dt in closed form.
inline double segment_abs(cplx a, cplx b) {
  const cplx d = b - a;
  const double A = std::norm(d);
  const double scale = std::max(std::abs(a), std::abs(b));
  if (A <= 1e-24 * scale * scale) return std::abs(a + 0.5 * d);
  // |a + t d|^2 = A (t - t0)^2 + k with t0 = -Re(a conj d) / A, k = Im(a conj d)^2 / A
  const cplx ad = a * std::conj(d);
  const double t0 = -ad.real() / A;
  const double k = ad.imag() * ad.imag() / A;
  const double sa = std::sqrt(A);
  auto prim = [&](double u) {
    const double s = std::sqrt(A * u * u + k);
    const double tail = k > 0.0 ? (k / sa) * std::asinh(sa * u / std::sqrt(k)) : 0.0;
    return 0.5 * (u * s + tail);
  };
  return prim(1.0 - t0) - prim(-t0);
}

template <bool Par>
double weighted_abs_segments(const CVector& v, const std::vector<double>& w, long run) {
  const long n = v.size();
  if (run < 2 || n % run != 0) throw Error(ErrorKind::InvalidArgument, "segment run must divide the sample count");
  const long rows = n / run;
  std::vector<double> partial(rows, 0.0);
#pragma omp parallel for schedule(static) if (Par)
  for (long r = 0; r < rows; ++r) {
    double acc = 0.0;
    const long base = r * run;
    for (long i = 0; i + 1 < run; ++i) {
      const long a = base + i;
      acc += 0.5 * (w[a] + w[a + 1]) * segment_abs(v[a], v[a + 1]);
    }
    partial[r] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace aniframe::detail

#define ANIFRAME_KERNEL_DEFS(PAR)                                                                          \
  std::vector<double> calderon_values(const Generator& g, const std::vector<Mat>& transforms,            \
                                      const std::vector<Vec>& points, double norm) {                      \
    return detail::calderon_values<PAR>(g, transforms, points, norm);                                     \
  }                                                                                                        \
  std::vector<cplx> sample(const Generator& g, const GridSpec& grid, const MultiIndex& beta) {            \
    return detail::sample<PAR>(g, grid, beta);                                                             \
  }                                                                                                        \
  CMatrix sample_columns(const std::vector<Generator>& cols, const GridSpec& grid, const MultiIndex& beta, \
                         double scale) {                                                                   \
    return detail::sample_columns<PAR>(cols, grid, beta, scale);                                           \
  }                                                                                                        \
  CMatrix gram_direct(const std::vector<Generator>& synth, const std::vector<Generator>& anal,            \
                      InnerProductMethod method, double tol) {                                            \
    return detail::gram_direct<PAR>(synth, anal, method, tol);                                             \
  }                                                                                                        \
  double weighted_abs_sum(const CVector& v, const std::vector<double>& w) {                               \
    return detail::weighted_abs_sum<PAR>(v, w);                                                            \
  }                                                                                                        \
  double weighted_abs_segments(const CVector& v, const std::vector<double>& w, long run) {                \
    return detail::weighted_abs_segments<PAR>(v, w, run);                                                  \
  }
