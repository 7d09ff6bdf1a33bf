#include "aniframe/molecular.hpp"

#include "aniframe/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace aniframe {

MolecularParams default_molecular_params(const DilationInfo& d, double p) {
  MolecularParams m;
  m.D = d.dimension / p + 2.0;
  m.N = max_vanishing_order(p, d) + 1;
  return m;
}

std::vector<MultiIndex> multi_indices(int n, int order) {
  std::vector<MultiIndex> out;
  for (int total = 0; total <= order; ++total) {
    MultiIndex b(n, 0);
    // enumerate compositions of `total` into n parts, lexicographically descending in b[0]
    std::vector<MultiIndex> level;
    auto rec = [&](auto&& self, int axis, int left) -> void {
      if (axis == n - 1) {
        b[axis] = left;
        level.push_back(b);
        return;
      }
      for (int v = left; v >= 0; --v) {
        b[axis] = v;
        self(self, axis + 1, left - v);
      }
    };
    rec(rec, 0, total);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

std::vector<double> molecular_weights(const DilationInfo& d, const GridSpec& grid, double D) {
  const long n = grid.size();
  std::vector<double> w(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) w[i] = std::pow(1.0 + quasi_norm(d, grid.point(i)).value, D);
  return w;
}

namespace {

std::vector<double> beta_integrals(const Generator& g, const DilationInfo& d, const MolecularParams& p,
                                   const std::vector<MultiIndex>& betas, double half_width) {
  const GridSpec grid = spaced_grid(g.dim(), -half_width, half_width, p.step);
  const std::vector<double> w = molecular_weights(d, grid, p.D);
  const double vol = grid.cell_volume();
  std::vector<double> out;
  for (const auto& beta : betas) {
    const MultiIndex b = std::all_of(beta.begin(), beta.end(), [](int v) { return v == 0; }) ? MultiIndex{} : beta;
    const auto s = p.parallel ? kernels::omp::sample(g, grid, b) : kernels::serial::sample(g, grid, b);
    const CVector v = Eigen::Map<const CVector>(s.data(), static_cast<long>(s.size()));
    const double sum = p.parallel ? kernels::omp::weighted_abs_sum(v, w) : kernels::serial::weighted_abs_sum(v, w);
    out.push_back(sum * vol);
  }
  return out;
}

}  // namespace

MolecularReport molecular_report(const Generator& g, const DilationInfo& d, const MolecularParams& params) {
  if (params.D < 0.0 || params.N < 0) throw Error(ErrorKind::InvalidArgument, "molecular params need D >= 0, N >= 0");
  if (!(params.step > 0.0) || !(params.box > 0.0))
    throw Error(ErrorKind::InvalidArgument, "molecular quadrature needs positive box and step");
  if (g.dim() != d.dimension) throw Error(ErrorKind::InvalidArgument, "generator and dilation dimensions differ");
  if (params.N > g.max_derivative_order())
    throw Error(ErrorKind::DerivativeUnavailable,
                "generator " + g.name() + " has derivatives up to order " + std::to_string(g.max_derivative_order()));

  const auto betas = multi_indices(g.dim(), params.N);
  double hw = params.box;
  std::vector<double> prev = beta_integrals(g, d, params, betas, hw);
  for (int k = 0; k <= params.max_doublings; ++k) {
    if (k == params.max_doublings)
      throw Error(ErrorKind::QuadratureNotConverged,
                  "molecular integrals still growing at half-width " + std::to_string(hw));
    const std::vector<double> next = beta_integrals(g, d, params, betas, 2.0 * hw);
    double scale = 0.0, change = 0.0;
    for (size_t i = 0; i < next.size(); ++i) {
      scale = std::max(scale, next[i]);
      change = std::max(change, std::abs(next[i] - prev[i]));
    }
    prev = next;
    hw *= 2.0;
    if (change <= params.tol * scale || scale == 0.0) break;
  }

  MolecularReport r;
  r.D = params.D;
  r.N = params.N;
  r.box = hw;
  for (size_t i = 0; i < betas.size(); ++i) {
    r.per_beta.push_back({betas[i], prev[i]});
    r.norm = std::max(r.norm, prev[i]);
  }
  return r;
}

double molecular_norm(const Generator& g, const DilationInfo& d, const MolecularParams& params) {
  return molecular_report(g, d, params).norm;
}

double pair_constant(const Generator& psi, const Generator& phi, const DilationInfo& d,
                     const MolecularParams& params) {
  return molecular_norm(psi, d, params) + molecular_norm(phi, d, params);
}

double lower_bound_ratio(double M_value, const DilationInfo& d, double p) {
  if (!(M_value >= 0.0)) throw Error(ErrorKind::InvalidArgument, "M_value must be nonnegative");
  if (!((p > 0.0 && p <= 1.0) || p == 2.0)) throw Error(ErrorKind::InvalidExponent, "p must lie in (0, 1] or equal 2");
  return M_value / std::pow(d.determinant_abs, 1.0 / p - 0.5);
}

}  // namespace aniframe
