#include "aniframe/frame_ops.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <random>

using namespace aniframe;
using testing_util::ivec2;
using testing_util::mat2;
using testing_util::vec2;

namespace {

const DilationInfo& dyadic() {
  static const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  return d;
}

GridFunction sample_on(const Generator& g, const GridSpec& s) {
  GridFunction f(s);
  for (long i = 0; i < s.size(); ++i) f[i] = g(s.point(i));
  return f;
}

double l2(const GridFunction& f) {
  double acc = 0.0;
  for (const cplx& v : f.values) acc += std::norm(v);
  return std::sqrt(acc * f.spec.cell_volume());
}

double l2_diff(const GridFunction& a, const GridFunction& b) {
  double acc = 0.0;
  for (long i = 0; i < a.spec.size(); ++i) acc += std::norm(a[i] - b[i]);
  return std::sqrt(acc * a.spec.cell_volume());
}

long position(const TruncationWindow& w, int j, long k0, long k1) {
  for (long i = 0; i < w.size(); ++i)
    if (w[i].j == j && w[i].k == ivec2(k0, k1)) return i;
  return -1;
}

// S = I + 0.1 E on a small Meyer window
GramMatrix perturbed_identity(const TruncationWindow& w) {
  GramMatrix S;
  S.window = w;
  S.entries = CMatrix::Identity(w.size(), w.size()) + 0.1 * almost_diagonal_noise(w, dyadic(), {}, 20240607);
  return S;
}

}  // namespace

TEST_CASE("L2 norms by both quadrature routes") {
  const Generator psi = mexican_hat_2d();
  const cplx f = inner_product(psi, psi, InnerProductMethod::Fourier, 1e-10);
  const cplx s = inner_product(psi, psi, InnerProductMethod::Spatial, 1e-10);
  CHECK(f.real() == doctest::Approx(6.2831853071795865).epsilon(1e-9));
  CHECK(s.real() == doctest::Approx(6.2831853071795865).epsilon(1e-9));
  CHECK(std::abs(f - s) < 1e-6);

  const Generator gx = gaussian_deriv({1, 0});
  CHECK(inner_product(gx, gx, InnerProductMethod::Auto, 1e-10).real() ==
        doctest::Approx(1.5707963267948966).epsilon(1e-9));

  // unimodular change of variables
  const DilationInfo e = validate_dilation(mat2(2, 1, 0, 3));
  for (int j : {-1, 1, 2}) {
    const Generator t = dilate_translate(psi, e, j, ivec2(1, -2));
    CHECK(inner_product(t, t, InnerProductMethod::Spatial, 1e-10).real() ==
          doctest::Approx(2.0 * kPi).epsilon(1e-6));
  }
}

TEST_CASE("inner products: sesquilinearity and disjoint spectra") {
  const Generator m = meyer_partition(dyadic());
  const Generator a = dilate_translate(m, dyadic(), 0, ivec2(0, 0));
  const Generator b = dilate_translate(m, dyadic(), 3, ivec2(1, 0));
  CHECK(std::abs(inner_product(a, b, InnerProductMethod::Fourier, 1e-10)) < 1e-10);

  const Generator psi = mexican_hat_2d();
  const DilationInfo e = validate_dilation(mat2(3, 1, 0, 2));
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> j(-1, 1), k(-2, 2);
  for (int i = 0; i < 5; ++i) {
    const Generator f = dilate_translate(psi, e, j(rng), ivec2(k(rng), k(rng)));
    const Generator g = dilate_translate(gaussian_deriv({0, 1}), e, j(rng), ivec2(k(rng), k(rng)));
    const cplx fg = inner_product(f, g, InnerProductMethod::Spatial, 1e-10);
    const cplx gf = inner_product(g, f, InnerProductMethod::Spatial, 1e-10);
    CHECK(std::abs(fg - std::conj(gf)) < 1e-10);
  }
}

TEST_CASE("Gram matrices") {
  const Generator psi = mexican_hat_2d();
  // per-entry adaptive quadrature is the slow reference, so the window stays small
  const FrameSystem sys{psi, psi, dyadic(), make_window(2, 0, 1, {0, -1}, {1, 1})};

  SUBCASE("self-Gram is Hermitian and the paths agree") {
    const GramMatrix fft = gram_matrix(sys, 1e-9, GramPath::Fft);
    const GramMatrix direct = gram_matrix(sys, 1e-9, GramPath::Direct);
    const GramMatrix ref = gram_matrix_reference(sys, 1e-9);
    CHECK((fft.entries - fft.entries.adjoint()).norm() <= 1e-10 * fft.entries.norm());
    CHECK((fft.entries - ref.entries).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((direct.entries - ref.entries).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(fft.entries(0, 0).real() == doctest::Approx(2.0 * kPi).epsilon(1e-8));
  }

  SUBCASE("entries stay below C_M omega") {
    const GramMatrix G = gram_matrix(sys, 1e-10);
    const AlmostDiagonalParams ad;
    const AlmostDiagonalFit fit = almost_diagonal_fit(G.entries, G.window, ad.delta, ad.eps, ad.p, dyadic());
    for (long r = 0; r < G.entries.rows(); ++r)
      for (long c = 0; c < G.entries.cols(); ++c) {
        const double om = omega_weight(cube(dyadic(), G.window[r]), cube(dyadic(), G.window[c]), ad.delta, ad.eps,
                                       ad.p, dyadic());
        CHECK(std::abs(G.entries(r, c)) <= fit.C_M * om * (1 + 1e-12));
      }
  }

  SUBCASE("non-integer dilation falls back to quadrature") {
    const DilationInfo e = validate_dilation(mat2(1.5, 0.5, 0, 2.5));
    const FrameSystem s2{psi, gaussian_deriv({1, 1}), e, make_window(2, 0, 1, 0)};
    const GramMatrix g = gram_matrix(s2, 1e-8);
    const GramMatrix r = gram_matrix_reference(s2, 1e-8);
    CHECK((g.entries - r.entries).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("Meyer self-Gram is a Parseval projection") {
  const Generator m = meyer_partition(dyadic());
  const FrameSystem sys{m, m, dyadic(), make_window(2, -3, 3, 6)};
  const GramMatrix G = gram_matrix(sys, 1e-10);
  const double norm2 = inner_product(m, m, InnerProductMethod::Fourier, 1e-12).real();
  for (long i = 0; i < G.entries.rows(); ++i) CHECK(G.entries(i, i).real() == doctest::Approx(norm2).epsilon(1e-8));
  // scales two or more apart have disjoint spectra
  for (long r = 0; r < G.entries.rows(); ++r)
    for (long c = 0; c < G.entries.cols(); ++c)
      if (std::abs(G.window[r].j - G.window[c].j) >= 2) CHECK(G.entries(r, c) == cplx(0.0, 0.0));

  // Parseval: sum_P |<psi_P, psi_Q>|^2 = ||psi_Q||^2. Row (0, 0) only meets
  // scales -1, 0, 1, so a wide k box at those scales holds the whole row.
  const FrameSystem wide{m, m, dyadic(), make_window(2, -1, 1, 16)};
  const GramMatrix W = gram_matrix(wide, 1e-10);
  for (long r : {position(W.window, 0, 0, 0), position(W.window, 0, 1, -1)}) {
    REQUIRE(r >= 0);
    CHECK(W.entries.row(r).squaredNorm() == doctest::Approx(norm2).epsilon(1e-3));
  }
}

TEST_CASE("analysis coefficients: Fourier and direct paths agree") {
  const Generator m = meyer_partition(dyadic());
  const Generator psi = mexican_hat_2d();
  const GridFunction f = sample_on(dilate_translate(psi, dyadic(), 0, ivec2(1, 0)), spaced_grid(2, -8, 8, 1.0 / 16));
  const FrameSystem sys{m, m, dyadic(), make_window(2, -2, 3, 5)};
  const CVector a = analysis_coefficients(sys, f, AnalysisPath::Direct);
  const CVector b = analysis_coefficients(sys, f, AnalysisPath::Fourier);
  // the direct path evaluates Meyer elements from an interpolated spatial table
  CHECK((a - b).norm() <= 1e-5 * a.norm());
  CHECK_THROWS_AS(analysis_coefficients(FrameSystem{psi, psi, dyadic(), sys.window}, f, AnalysisPath::Fourier), Error);
}

TEST_CASE("frame operator") {
  const Generator m = meyer_partition(dyadic());
  const GridSpec grid = spaced_grid(2, -12, 12, 0.25);
  const GridFunction f = sample_on(dilate_translate(m, dyadic(), 0, ivec2(0, 0)), grid);

  SUBCASE("zero maps to zero") {
    const FrameSystem sys{m, m, dyadic(), make_window(2, -1, 1, 4)};
    const GridFunction u = frame_apply(sys, GridFunction(grid));
    for (const cplx& v : u.values) CHECK(v == cplx(0.0, 0.0));
  }

  SUBCASE("linearity") {
    const FrameSystem small{m, m, dyadic(), make_window(2, -1, 1, 6)};
    const GridFunction g = sample_on(dilate_translate(m, dyadic(), 0, ivec2(1, -1)), grid);
    GridFunction h(grid);
    const cplx a(0.7, -0.2), b(-1.3, 0.0);
    for (long i = 0; i < grid.size(); ++i) h[i] = a * f[i] + b * g[i];
    const GridFunction uf = frame_apply(small, f, 1.0), ug = frame_apply(small, g, 1.0), uh = frame_apply(small, h, 1.0);
    double err = 0.0, ref = 0.0;
    for (long i = 0; i < grid.size(); ++i) {
      err = std::max(err, std::abs(uh[i] - (a * uf[i] + b * ug[i])));
      ref = std::max(ref, std::abs(uh[i]));
    }
    CHECK(err <= 1e-10 * ref);
  }

  SUBCASE("tight Meyer system reproduces a band-limited bump") {
    // theta_{0,0} only meets scales -1, 0, 1; each of those gets a k box
    // covering the grid, and scales -2 and 2 close the window with no energy
    std::vector<LatticeIndex> idx;
    for (auto [j, r] : std::vector<std::pair<int, long>>{{-2, 2}, {-1, 8}, {0, 14}, {1, 26}, {2, 2}})
      for (long k0 = -r; k0 <= r; ++k0)
        for (long k1 = -r; k1 <= r; ++k1) idx.push_back({j, ivec2(k0, k1)});
    const FrameSystem sys{m, m, dyadic(), window_from_indices(2, idx)};
    const GridFunction u = frame_apply(sys, f);
    // measured on |x| <= 6: near the grid edge the sampled f is cut off and
    // the error reflects that truncation, not the frame
    double err = 0.0;
    for (long i = 0; i < grid.size(); ++i)
      if (grid.point(i).cwiseAbs().maxCoeff() <= 6.0) err += std::norm(u[i] - f[i]);
    CHECK(std::sqrt(err * grid.cell_volume()) / l2(f) <= 1e-3);
  }

  SUBCASE("window too small for the input") {
    const FrameSystem tiny{m, m, dyadic(), make_window(2, 0, 0, 1)};
    CHECK_THROWS_AS(frame_apply(tiny, f), Error);
  }
}

TEST_CASE("spectral norm and deviation from identity") {
  Eigen::VectorXcd diag(4);
  diag << 0.3, cplx(0.0, -0.9), 0.1, 0.5;
  const auto pw = spectral_norm(diag.asDiagonal(), 1e-12, 1000);
  CHECK(pw.sigma == doctest::Approx(0.9).epsilon(1e-10));

  const TruncationWindow w = make_window(2, 0, 1, 2);
  const long N = w.size();
  GramMatrix S;
  S.window = w;
  S.entries = 3.0 * CMatrix::Identity(N, N);
  Deviation dv = deviation_from_identity(S, 3.0, dyadic());
  CHECK(dv.spectral == doctest::Approx(0.0));
  CHECK(dv.algebra_proxy == doctest::Approx(0.0));
  S.entries *= 0.5;
  dv = deviation_from_identity(S, 3.0, dyadic());
  CHECK(dv.spectral == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(dv.algebra_proxy == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("almost diagonal noise") {
  const TruncationWindow w = make_window(2, -1, 1, 3);
  const CMatrix E = almost_diagonal_noise(w, dyadic(), {}, 5);
  CHECK((E - E.adjoint()).norm() < 1e-14);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(E, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((almost_diagonal_noise(w, dyadic(), {}, 5) - E).norm() == 0.0);
  CHECK((almost_diagonal_noise(w, dyadic(), {}, 6) - E).norm() > 0.1);
}

TEST_CASE("Neumann inversion") {
  SUBCASE("identity") {
    const NeumannResult r = neumann_invert(CMatrix::Identity(5, 5), 1.0, 0.0, 1e-12, 50);
    CHECK(r.terms_used == 1);
    CHECK((r.inverse - CMatrix::Identity(5, 5)).norm() == 0.0);
  }

  SUBCASE("geometric tail bound on random contractions") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double q : {0.1, 0.5, 0.9}) {
      CMatrix Q(12, 12);
      for (long i = 0; i < Q.size(); ++i) Q(i) = cplx(u(rng), u(rng));
      Eigen::JacobiSVD<CMatrix> svd(Q);
      Q *= q / svd.singularValues()[0];
      const CMatrix S = CMatrix::Identity(12, 12) - Q;
      for (int N : {1, 3, 10, 25}) {
        const NeumannResult r = neumann_invert(S, 1.0, q, 0.0, N + 1);
        CHECK(r.terms_used == N + 1);
        const double res = Eigen::JacobiSVD<CMatrix>(S * r.inverse - CMatrix::Identity(12, 12)).singularValues()[0];
        CHECK(res <= std::pow(q, N + 1) / (1.0 - q) + 1e-12);
      }
    }
  }

  SUBCASE("not contractive") {
    CHECK_THROWS_AS(neumann_invert(CMatrix::Identity(2, 2), 1.0, 1.2, 1e-10, 50), Error);
  }

  SUBCASE("perturbed Meyer system: residual and inverse closedness") {
    const TruncationWindow w = make_window(2, -1, 1, 3);
    const GramMatrix S = perturbed_identity(w);
    const Deviation dv = deviation_from_identity(S, 1.0, dyadic());
    CHECK(dv.spectral == doctest::Approx(0.1).epsilon(1e-8));
    const NeumannResult r = neumann_invert(S.entries, 1.0, dv.spectral, 1e-10, 200);
    const CMatrix I = CMatrix::Identity(w.size(), w.size());
    CHECK((S.entries * r.inverse - I).norm() < 1e-8);

    const Generator m = meyer_partition(dyadic());
    const FrameSystem sys{m, m, dyadic(), w};
    const DualReport dr =
        dual_from_inverse(r.inverse, S.entries, sys, spaced_grid(2, -4, 4, 0.25), {}, {position(w, 0, 0, 0)});
    CHECK(dr.fit_Sinv.decay_slope <= dr.fit_S.decay_slope + 0.5);
    CHECK(dr.fit_Sinv.decay_slope >= dr.fit_S.decay_slope - 0.5);
    CHECK(dr.fit_Sinv.C_M <= 10.0 * dr.fit_S.C_M);
  }
}

TEST_CASE("duals") {
  const Generator m = meyer_partition(dyadic());
  const TruncationWindow w = make_window(2, -1, 1, 3);
  const FrameSystem sys{m, m, dyadic(), w};
  const GridSpec grid = spaced_grid(2, -6, 6, 0.25);
  const long ref = position(w, 0, 0, 0);
  const CMatrix I = CMatrix::Identity(w.size(), w.size());

  SUBCASE("identity operator returns the analyzer") {
    const DualReport dr = dual_from_inverse(I, I, sys, grid, {}, {ref, ref + 1});
    REQUIRE(dr.dual_samples.size() == 2);
    const GridFunction expect = sample_on(dilate_translate(m, dyadic(), 0, ivec2(0, 0)), grid);
    CHECK(l2_diff(dr.dual_samples[0], expect) <= 1e-12 * l2(expect));
  }

  SUBCASE("dual coefficients are the S^-1 combination of analysis coefficients") {
    const GramMatrix S = perturbed_identity(w);
    const NeumannResult r = neumann_invert(S.entries, 1.0, 0.1 + 1e-9, 1e-12, 200);
    const DualReport dr = dual_from_inverse(r.inverse, S.entries, sys, grid, {}, {ref, ref - 5});
    const GridFunction f = sample_on(dilate_translate(mexican_hat_2d(), dyadic(), 0, ivec2(0, 1)), grid);
    const CVector a = analysis_coefficients(sys, f, AnalysisPath::Direct);
    for (std::size_t t = 0; t < dr.sampled_indices.size(); ++t) {
      cplx direct = 0.0;
      for (long i = 0; i < grid.size(); ++i) direct += f[i] * std::conj(dr.dual_samples[t][i]);
      direct *= grid.cell_volume();
      // <f, phi*_Q> = sum_P (S^-1)_{Q,P} <f, phi_P>
      cplx sum = 0.0;
      for (long p = 0; p < w.size(); ++p) sum += r.inverse(dr.sampled_indices[t], p) * a[p];
      CHECK(std::abs(direct - sum) <= 1e-10 * (std::abs(sum) + 1e-12));
    }
  }
}

TEST_CASE("boundary energy fraction") {
  const TruncationWindow w = make_window(2, 0, 2, 1);
  CVector c = CVector::Zero(w.size());
  c[position(w, 1, 0, 0)] = 1.0;
  CHECK(boundary_energy_fraction(w, c) == 0.0);
  c[position(w, 1, 1, 0)] = 1.0;
  CHECK(boundary_energy_fraction(w, c) == doctest::Approx(0.5));
}
