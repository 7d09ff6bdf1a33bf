#include "aniframe/generators.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <random>

using namespace aniframe;
using testing_util::ivec2;
using testing_util::mat2;
using testing_util::vec2;

namespace {

GridFunction sample_on(const Generator& g, const GridSpec& s) {
  GridFunction f(s);
  for (long i = 0; i < s.size(); ++i) f[i] = g(s.point(i));
  return f;
}

// sup over |xi| <= radius of |F - g^| relative to sup |g^|
double fft_mismatch(const Generator& g, double radius) {
  const GridFunction F = fft_transform(sample_on(g, cube_grid(2, -16.0, 16.0, 256)));
  double err = 0.0, ref = 0.0;
  for (long i = 0; i < F.spec.size(); ++i) {
    const Vec xi = F.spec.point(i);
    if (xi.norm() > radius) continue;
    err = std::max(err, std::abs(F[i] - g.fourier(xi)));
    ref = std::max(ref, std::abs(g.fourier(xi)));
  }
  return err / ref;
}

}  // namespace

TEST_CASE("Mexican hat closed form") {
  const Generator psi = mexican_hat_2d();
  CHECK(psi.dim() == 2);
  CHECK(psi(vec2(0, 0)).real() == doctest::Approx(2.0));
  CHECK(psi(vec2(1, 1)).real() == doctest::Approx(0.0));
  CHECK(psi(vec2(0, 2)).real() == doctest::Approx(-2.0 * std::exp(-2.0)));
  // psi^(xi) = 2 pi |xi|^2 exp(-|xi|^2 / 2)
  CHECK(psi.fourier(vec2(1, 0)).real() == doctest::Approx(2.0 * kPi * std::exp(-0.5)));
  CHECK(std::abs(psi.fourier(vec2(0, 0))) == 0.0);
}

TEST_CASE("analytic transforms agree with FFT of spatial samples") {
  CHECK(fft_mismatch(mexican_hat_2d(), 4.0) < 1e-6);
  CHECK(fft_mismatch(gaussian_deriv({0, 0}), 4.0) < 1e-6);
  CHECK(fft_mismatch(gaussian_deriv({1, 2}), 4.0) < 1e-6);
}

TEST_CASE("FFT of a sampled grid") {
  SUBCASE("zero grid") {
    const GridFunction F = fft_transform(GridFunction(cube_grid(2, -4, 4, 32)));
    for (const cplx& v : F.values) CHECK(v == cplx(0.0, 0.0));
  }
  SUBCASE("Parseval") {
    const GridSpec s = cube_grid(2, -16, 16, 128);
    const GridFunction f = sample_on(gaussian_deriv({1, 0}), s);
    const GridFunction F = fft_transform(f);
    double ef = 0.0, eF = 0.0;
    for (const cplx& v : f.values) ef += std::norm(v);
    for (const cplx& v : F.values) eF += std::norm(v);
    ef *= s.cell_volume();
    eF *= F.spec.cell_volume() / std::pow(2.0 * kPi, 2);
    CHECK(eF == doctest::Approx(ef).epsilon(1e-8));
  }
}

TEST_CASE("Gaussian derivatives") {
  const Generator g = gaussian_deriv({0, 0});
  const Generator gx = gaussian_deriv({1, 0});
  const Vec x = vec2(0.4, -1.1);
  CHECK(gx(x).real() == doctest::Approx(-0.4 * g(x).real()));
  CHECK(g.derivative({1, 0}, x).real() == doctest::Approx(gx(x).real()));
  // d^2/dx^2 of the Gaussian is He_2(x) times it
  CHECK(g.derivative({2, 0}, x).real() == doctest::Approx(hermite_he(2, 0.4) * g(x).real()));
  CHECK(hermite_he(4, 1.5) == doctest::Approx(-5.4375).epsilon(1e-14));
  CHECK(hermite_he(0, 3.0) == 1.0);
}

TEST_CASE("Mexican hat derivatives match central differences") {
  const Generator psi = mexican_hat_2d();
  const Vec x = vec2(0.7, -0.3);
  const double h = 1e-5;
  const double fd = (psi(x + vec2(h, 0)).real() - psi(x - vec2(h, 0)).real()) / (2 * h);
  CHECK(psi.derivative({1, 0}, x).real() == doctest::Approx(fd).epsilon(1e-8));
  CHECK_THROWS_AS(psi.derivative({9, 9}, x), Error);
}

TEST_CASE("moment table of the Mexican hat") {
  const MomentTable t = moment_table(mexican_hat_2d(), 2, 16.0, 1e-8);
  REQUIRE(t.gammas.size() == 6);
  CHECK(t.gammas[0] == MultiIndex{0, 0});
  CHECK(t.gammas[1] == MultiIndex{1, 0});
  CHECK(t.gammas[3] == MultiIndex{2, 0});
  CHECK(t.gammas[4] == MultiIndex{1, 1});
  CHECK(t.gammas[5] == MultiIndex{0, 2});
  const double expect[] = {0.0, 0.0, 0.0, -12.566370614359173, 0.0, -12.566370614359173};
  for (int i = 0; i < 6; ++i) CHECK(std::abs(t.values[i] - expect[i]) < 1e-6);
  CHECK(t.vanishing_order == 1);
}

TEST_CASE("vanishing moments") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  CHECK(vanishing_moments(mexican_hat_2d(), 3, 16.0, 1e-8) == 1);
  CHECK(vanishing_moments(gaussian_deriv({0, 0}), 3, 16.0, 1e-8) == -1);
  CHECK(vanishing_moments(gaussian_deriv({1, 0}), 3, 16.0, 1e-8) == 0);
  CHECK(vanishing_moments(meyer_partition(d), 5, 16.0, 1e-8) == 5);
}

TEST_CASE("Meyer partition generator") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  const Generator m = meyer_partition(d);
  const auto params = meyer_params(m);
  REQUIRE(params.has_value());
  CHECK(params->rho_inner > 0.0);
  CHECK(params->rho_outer > params->rho_inner);
  CHECK(!meyer_params(mexican_hat_2d()).has_value());

  SUBCASE("transition profile is a square partition of unity") {
    for (double u = params->u0 + 0.01; u < params->u0 + 1.0; u += 0.05) {
      const double a = meyer_window(u, params->u0, params->order);
      const double b = meyer_window(u + 1.0, params->u0, params->order);
      CHECK(a * a + b * b == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(meyer_window(params->u0 - 0.1, params->u0, params->order) == 0.0);
    CHECK(meyer_window(params->u0 + 2.1, params->u0, params->order) == 0.0);
  }

  SUBCASE("band-limited on the annulus b^tau in [rho_inner, rho_outer]") {
    const DilationInfo ds = d.transpose();
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-12.0, 12.0);
    int outside = 0;
    for (int i = 0; i < 4000; ++i) {
      const Vec xi = vec2(u(rng), u(rng));
      const double r = std::pow(ds.determinant_abs, level_function(ds, xi));
      const cplx v = m.fourier(xi);
      CHECK(std::isfinite(std::abs(v)));
      if (r > params->rho_outer || r < params->rho_inner) {
        ++outside;
        CHECK(v == cplx(0.0, 0.0));
      }
    }
    CHECK(outside > 100);
    CHECK(m.fourier(vec2(0, 0)) == cplx(0.0, 0.0));
  }

  SUBCASE("spatial values are finite") {
    for (double r : {0.0, 0.5, 3.0, 40.0, 1e4}) CHECK(std::isfinite(std::abs(m(vec2(r, -r)))));
  }
}

TEST_CASE("dilate_translate") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  const Generator psi = mexican_hat_2d();
  const Generator same = dilate_translate(psi, d, 0, ivec2(0, 0));
  for (const Vec& x : {vec2(0, 0), vec2(0.3, 1.7), vec2(-2, 5)}) CHECK(same(x) == psi(x));

  // b^{1/2} psi(A x) at the origin: 2 * 2
  CHECK(dilate_translate(psi, d, 1, ivec2(0, 0))(vec2(0, 0)).real() == doctest::Approx(4.0));

  // x -> b^{j/2} psi(A^j x - k)
  const DilationInfo e = validate_dilation(mat2(2, 1, 0, 3));
  const Generator t = dilate_translate(psi, e, -1, ivec2(2, -1));
  const Vec x = vec2(0.4, 0.9);
  const Vec y = e.power(-1) * x - vec2(2, -1);
  CHECK(t(x).real() == doctest::Approx(std::pow(6.0, -0.5) * psi(y).real()));
  CHECK(t.has_fourier());
  const Vec xi = vec2(0.3, -0.8);
  // transform: b^{-j/2} e^{-i <A^-j k, xi>} psi^((A*)^-j xi)
  const Mat Aj_inv = e.power(1);
  const cplx expect = std::pow(6.0, 0.5) * std::polar(1.0, -(Aj_inv * vec2(2, -1)).dot(xi)) *
                      psi.fourier(Aj_inv.transpose() * xi);
  CHECK(std::abs(t.fourier(xi) - expect) < 1e-12);
}

TEST_CASE("sampled grid generator") {
  const GridSpec s = spaced_grid(2, -4, 4, 0.25);
  GridFunction f(s);
  for (long i = 0; i < s.size(); ++i) {
    const Vec x = s.point(i);
    f[i] = 1.0 + 2.0 * x[0] - x[1];  // bilinear interpolation is exact
  }
  const Generator g = sampled_grid(f);
  CHECK(g(vec2(0.1, 0.37)).real() == doctest::Approx(1.0 + 0.2 - 0.37));
  CHECK(g(vec2(9, 0)) == cplx(0.0, 0.0));
  CHECK(g.derivative({1, 0}, vec2(0.5, 0.5)).real() == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("linear combinations") {
  const Generator a = mexican_hat_2d(), b = gaussian_deriv({0, 1});
  const Generator c = linear_combination({{cplx(2.0, 0.0), a}, {cplx(0.0, -1.0), b}});
  const Vec x = vec2(0.3, -0.6);
  CHECK(std::abs(c(x) - (2.0 * a(x) - cplx(0, 1) * b(x))) < 1e-14);
  CHECK(std::abs(c.fourier(x) - (2.0 * a.fourier(x) - cplx(0, 1) * b.fourier(x))) < 1e-14);
  CHECK(std::abs(scaled(a, 3.0)(x) - 3.0 * a(x)) < 1e-14);
}
