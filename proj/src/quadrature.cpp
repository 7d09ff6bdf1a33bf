#include "aniframe/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace aniframe {

void for_each_node(const BoxRule& rule, const std::function<void(const Vec& x, double w)>& visit) {
  const int n = static_cast<int>(rule.center.size());
  const long m = static_cast<long>(std::floor(rule.half_width / rule.step + 1e-9));
  const long side = 2 * m + 1;
  long total = 1;
  for (int a = 0; a < n; ++a) total *= side;
  const double w = std::pow(rule.step, n);
  Vec x(n);
  for (long i = 0; i < total; ++i) {
    long r = i;
    for (int a = n - 1; a >= 0; --a) {
      x[a] = rule.center[a] + rule.step * static_cast<double>(r % side - m);
      r /= side;
    }
    visit(x, w);
  }
}

cplx trapezoid(const PointFn& f, const BoxRule& rule) {
  cplx acc(0.0, 0.0);
  for_each_node(rule, [&](const Vec& x, double w) { acc += w * f(x); });
  return acc;
}

PairIntegral pair_trapezoid(const PointFn& f, const PointFn& g, const BoxRule& rule) {
  PairIntegral out;
  for_each_node(rule, [&](const Vec& x, double w) {
    const cplx fv = f(x);
    const cplx gv = g(x);
    out.value += w * fv * std::conj(gv);
    out.norm_f2 += w * std::norm(fv);
    out.norm_g2 += w * std::norm(gv);
  });
  return out;
}

PairIntegral adaptive_pair_integral(const PointFn& f, const PointFn& g, BoxRule rule,
                                    const AdaptiveOptions& opt) {
  PairIntegral cur = pair_trapezoid(f, g, rule);
  auto scale = [](const PairIntegral& p) { return std::sqrt(p.norm_f2 * p.norm_g2); };

  if (!opt.fixed_box) {
    bool ok = false;
    for (int it = 0; it < opt.max_doublings; ++it) {
      BoxRule wider = rule;
      wider.half_width *= 2.0;
      PairIntegral next = pair_trapezoid(f, g, wider);
      const bool small = std::abs(next.value - cur.value) <= opt.tol * scale(next);
      rule = wider;
      cur = next;
      if (small) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      std::ostringstream msg;
      msg << "box doubling did not settle (half width " << rule.half_width << ")";
      throw Error(ErrorKind::QuadratureNotConverged, msg.str());
    }
  }

  for (int it = 0; it < opt.max_halvings; ++it) {
    BoxRule finer = rule;
    finer.step *= 0.5;
    PairIntegral next = pair_trapezoid(f, g, finer);
    const bool small = std::abs(next.value - cur.value) <= opt.tol * scale(next);
    cur = next;
    rule = finer;
    if (small) return cur;
  }
  std::ostringstream msg;
  msg << "step halving did not settle (step " << rule.step << ")";
  throw Error(ErrorKind::QuadratureNotConverged, msg.str());
}

}  // namespace aniframe
