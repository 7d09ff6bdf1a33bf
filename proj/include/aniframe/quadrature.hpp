#pragma once

#include "aniframe/types.hpp"

#include <functional>

namespace aniframe {

/// Trapezoid lattice centre + step * m restricted to |step * m|_inf <= half_width.
struct BoxRule {
  Vec center;
  double half_width = 8.0;
  double step = 0.25;
};

using PointFn = std::function<cplx(const Vec&)>;

/// Visits every node of the rule; `w` is the cell weight step^n.
void for_each_node(const BoxRule& rule, const std::function<void(const Vec& x, double w)>& visit);

/// Plain trapezoid sum of f over the rule.
cplx trapezoid(const PointFn& f, const BoxRule& rule);

struct PairIntegral {
  cplx value{0.0, 0.0};  // int f conj(g)
  double norm_f2 = 0.0;  // int |f|^2
  double norm_g2 = 0.0;
};

PairIntegral pair_trapezoid(const PointFn& f, const PointFn& g, const BoxRule& rule);

struct AdaptiveOptions {
  double tol = 1e-8;      // relative to sqrt(|f|^2 |g|^2)
  int max_doublings = 5;
  int max_halvings = 5;
  bool fixed_box = false;  // skip box doubling (compact support known)
};

/// Box doubling then step halving until |Delta I| <= tol * sqrt(|f|^2 |g|^2).
/// Throws QuadratureNotConverged.
PairIntegral adaptive_pair_integral(const PointFn& f, const PointFn& g, BoxRule rule,
                                    const AdaptiveOptions& opt);

}  // namespace aniframe
