#include "aniframe/kernels.hpp"
#include "aniframe/molecular.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <cmath>

using namespace aniframe;
using testing_util::mat2;

namespace {

MolecularParams params(double D, int N, double step = 0.125) {
  MolecularParams m;
  m.D = D;
  m.N = N;
  m.step = step;
  m.box = 12.0;
  return m;
}

Generator zero_generator() { return scaled(mexican_hat_2d(), 0.0); }

}  // namespace

TEST_CASE("multi-index enumeration") {
  const auto b = multi_indices(2, 2);
  const std::vector<MultiIndex> want{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  CHECK(b == want);
  CHECK(multi_indices(3, 2).size() == 10);
  CHECK(multi_indices(2, 0).size() == 1);
}

TEST_CASE("zero generator has zero norm") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  CHECK(molecular_norm(zero_generator(), d, params(4, 1)) == 0.0);
}

TEST_CASE("unweighted integrals") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  CHECK(molecular_norm(gaussian_deriv({0, 0}), d, params(0, 0)) ==
        doctest::Approx(2.0 * M_PI).epsilon(1e-8));
  // |psi| has a kink on the circle |x| = sqrt 2, so the trapezoid rule is second order there
  const double l1 = molecular_norm(mexican_hat_2d(), d, params(0, 0, 0.03125));
  CHECK(l1 == doctest::Approx(8.0 * M_PI / std::exp(1.0)).epsilon(1e-4));
}

TEST_CASE("weighted integral with the smooth quasi-norm") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2), QuasiNormMode::Smooth);
  const MolecularReport r = molecular_report(mexican_hat_2d(), d, params(2, 0, 0.03125));
  CHECK(r.norm == doctest::Approx(275.68425921747684).epsilon(1e-4));
  REQUIRE(r.per_beta.size() == 1);
}

TEST_CASE("higher orders stay finite and bound the lower ones") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 4));
  const MolecularReport r = molecular_report(mexican_hat_2d(), d, params(4, 2));
  CHECK(r.per_beta.size() == 6);
  CHECK(std::isfinite(r.norm));
  for (const auto& b : r.per_beta) CHECK(b.value <= r.norm);
  CHECK(r.box >= 12.0);
  const MolecularReport lo = molecular_report(mexican_hat_2d(), d, params(2, 2));
  CHECK(lo.norm < r.norm);
}

TEST_CASE("derivative order beyond the generator throws") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  try {
    molecular_norm(mexican_hat_2d(), d, params(4, mexican_hat_2d().max_derivative_order() + 1));
    FAIL("expected DerivativeUnavailable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DerivativeUnavailable);
  }
}

TEST_CASE("pair constant") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  const Generator psi = mexican_hat_2d(), g = gaussian_deriv({1, 0});
  const MolecularParams m = params(3, 1);
  CHECK(pair_constant(psi, g, d, m) == doctest::Approx(pair_constant(g, psi, d, m)).epsilon(1e-14));
  CHECK(pair_constant(psi, zero_generator(), d, m) == doctest::Approx(molecular_norm(psi, d, m)).epsilon(1e-14));
}

TEST_CASE("serial and parallel quadrature agree") {
  const DilationInfo d = validate_dilation(mat2(2, 1, 0, 3));
  MolecularParams a = params(3, 1), b = params(3, 1);
  b.parallel = false;
  CHECK(molecular_norm(mexican_hat_2d(), d, a) == doctest::Approx(molecular_norm(mexican_hat_2d(), d, b)).epsilon(1e-13));
}

TEST_CASE("lower bound ratio") {
  const DilationInfo d4 = validate_dilation(mat2(2, 0, 0, 2));
  const DilationInfo d16 = validate_dilation(mat2(4, 0, 0, 4));
  CHECK(lower_bound_ratio(3.0, d4, 2.0) == 3.0);
  CHECK(lower_bound_ratio(8.0, d16, 1.0) == doctest::Approx(2.0));
  CHECK(lower_bound_ratio(1.0, d4, 0.5) == doctest::Approx(std::pow(4.0, -1.5)));
  CHECK_THROWS_AS(lower_bound_ratio(1.0, d4, 1.5), Error);
  CHECK_THROWS_AS(lower_bound_ratio(-1.0, d4, 1.0), Error);
}

TEST_CASE("default parameters") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  const MolecularParams m = default_molecular_params(d, 1.0);
  CHECK(m.D == 4.0);
  CHECK(m.N == max_vanishing_order(1.0, d) + 1);
}

TEST_CASE("exact absolute value of a linear segment") {
  const std::vector<double> w{1.0, 1.0};
  for (auto* f : {&kernels::serial::weighted_abs_segments, &kernels::omp::weighted_abs_segments}) {
    CVector v(2);
    // endpoints a and a + d
    v << cplx(0.3, -0.2), cplx(0.3, -0.2) + cplx(-0.9, 0.5);
    CHECK((*f)(v, w, 2) == doctest::Approx(0.28416142413492703).epsilon(1e-13));
    v << 1.0, -1.0;
    CHECK((*f)(v, w, 2) == doctest::Approx(0.5).epsilon(1e-14));
    v << cplx(1.0, 1.0), cplx(1.0, 1.0);
    CHECK((*f)(v, w, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  }
  CVector odd(3);
  odd << 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(kernels::serial::weighted_abs_segments(odd, {1, 1, 1}, 2), Error);
}
