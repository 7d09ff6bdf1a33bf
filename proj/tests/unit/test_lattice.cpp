#include "aniframe/frame_ops.hpp"
#include "aniframe/lattice.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <cstdio>
#include <filesystem>
#include <random>

using namespace aniframe;
using testing_util::ivec2;
using testing_util::mat2;
using testing_util::vec2;

namespace {

LatticeIndex idx(int j, long k0, long k1) {
  LatticeIndex q;
  q.j = j;
  q.k = ivec2(k0, k1);
  return q;
}

CoefficientSequence single(const LatticeIndex& q, cplx v) {
  CoefficientSequence s;
  s.window = window_from_indices(2, {q});
  s.values = CVector::Constant(1, v);
  return s;
}

}  // namespace

TEST_CASE("dyadic cubes") {
  const DilationInfo d2 = validate_dilation(mat2(2, 0, 0, 2));
  const DyadicCube unit = cube(d2, idx(0, 0, 0));
  CHECK(unit.measure == doctest::Approx(1.0));
  CHECK((unit.center - vec2(0.5, 0.5)).norm() < 1e-15);
  CHECK(unit.vertices.size() == 4);
  CHECK(cube(d2, idx(1, 0, 0)).measure == doctest::Approx(0.25));

  const DilationInfo d28 = validate_dilation(mat2(2, 0, 0, 8));
  const DyadicCube q = cube(d28, idx(1, 1, 0));
  CHECK((q.center - vec2(0.75, 0.0625)).norm() < 1e-15);
  CHECK(q.measure == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("box windows") {
  const TruncationWindow w = make_window(2, -1, 1, 2);
  CHECK(w.size() == 3 * 25);
  CHECK(w[0].j == -1);
  CHECK(w[0].k == ivec2(-2, -2));
  CHECK(w[1].k == ivec2(-2, -1));  // last axis fastest
  const auto mask = boundary_mask(w);
  long interior = 0;
  for (bool b : mask) interior += !b;
  CHECK(interior == 9);  // scale 0 only, |k| <= 1
  CHECK_THROWS_AS(make_window(2, 1, 0, 1), Error);

  const TruncationWindow dup = window_from_indices(2, {idx(0, 0, 0), idx(0, 0, 0)});
  CHECK(dup.size() == 2);
}

TEST_CASE("omega weight") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  const DyadicCube Q = cube(d, idx(0, 0, 0));
  CHECK(omega_weight(Q, Q, 1.0, 0.5, 1.0, d) == doctest::Approx(1.0));

  // two cubes with a common centre, scales two apart: (b^-2)^eps
  DyadicCube P = cube(d, idx(2, 0, 0));
  P.center = Q.center;
  CHECK(omega_weight(Q, P, 1.0, 0.5, 1.0, d) == doctest::Approx(0.25));
  CHECK(omega_weight(P, Q, 1.0, 0.5, 1.0, d) == doctest::Approx(0.25));

  // delta = 1, p = 1, n = 2: exponent J / n + delta = 2
  const DyadicCube R = cube(d, idx(0, 4, 0));
  const double rho = quasi_norm(d, vec2(4, 0)).value;
  CHECK(omega_weight(Q, R, 1.0, 0.5, 1.0, d) == doctest::Approx(std::pow(1.0 + rho, -2.0)));
  CHECK_THROWS_AS(omega_weight(Q, R, 0.0, 0.5, 1.0, d), Error);
}

TEST_CASE("sequence norm closed forms") {
  for (const Mat& m : {mat2(2, 0, 0, 2), mat2(2, 0, 0, 8)}) {
    const DilationInfo d = validate_dilation(m);
    for (double p : {1.0, 2.0 / 3.0, 0.5}) {
      for (int j : {-1, 0, 1, 2}) {
        const CoefficientSequence s = single(idx(j, 0, 0), 1.0);
        const double expect = std::pow(d.determinant_abs, -j * (1.0 / p - 0.5));
        CHECK(sequence_norm(s, p, d) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(sequence_norm(s, p, d, sequence_grid(d, s.window)) == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  CHECK(sequence_norm(single(idx(0, 0, 0), 1.0), 1.0, d) == doctest::Approx(1.0));
  CHECK(sequence_norm(single(idx(0, 0, 0), cplx(0, -3)), 1.0, d) == doctest::Approx(3.0));

  CoefficientSequence two;
  two.window = window_from_indices(2, {idx(1, 0, 0), idx(1, 3, -2)});
  two.values = CVector::Ones(2);
  const double one = sequence_norm(single(idx(1, 0, 0), 1.0), 1.0, d);
  CHECK(sequence_norm(two, 1.0, d) == doctest::Approx(2.0 * one));

  CoefficientSequence zero = two;
  zero.values.setZero();
  CHECK(sequence_norm(zero, 1.0, d) == 0.0);
}

TEST_CASE("tree and grid sequence norms agree") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const Mat& m : {mat2(2, 0, 0, 2), mat2(2, 0, 0, 8), mat2(-2, 0, 0, 4)}) {
    const DilationInfo d = validate_dilation(m);
    CoefficientSequence s;
    s.window = make_window(2, -1, 2, 2);
    s.values.resize(s.window.size());
    for (long i = 0; i < s.values.size(); ++i) s.values[i] = cplx(u(rng), u(rng));
    for (double p : {1.0, 2.0 / 3.0}) {
      const double tree = sequence_norm(s, p, d);
      const double grid = sequence_norm(s, p, d, sequence_grid(d, s.window));
      CHECK(tree == doctest::Approx(grid).epsilon(1e-10));
    }
  }
}

TEST_CASE("sequence norm on a non-diagonal dilation converges under refinement") {
  const DilationInfo d = validate_dilation(mat2(2, 1, 0, 2));
  CoefficientSequence s;
  s.window = make_window(2, 0, 1, 1);
  s.values = CVector::Ones(s.window.size());
  const double coarse = sequence_norm(s, 1.0, d, sequence_grid(d, s.window, 16));
  const double fine = sequence_norm(s, 1.0, d, sequence_grid(d, s.window, 32));
  CHECK(std::abs(fine - coarse) < 0.01 * fine);
}

TEST_CASE("almost diagonal fit") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  const TruncationWindow w = make_window(2, -1, 1, 2);
  const long N = w.size();
  CHECK(almost_diagonal_fit(CMatrix::Identity(N, N), w, 1.0, 0.5, 1.0, d).C_M == doctest::Approx(1.0));
  CMatrix D = CMatrix::Identity(N, N);
  D(7, 7) = 3.5;
  CHECK(almost_diagonal_fit(D, w, 1.0, 0.5, 1.0, d).C_M == doctest::Approx(3.5));
  CHECK_THROWS_AS(almost_diagonal_fit(CMatrix(), TruncationWindow{}, 1.0, 0.5, 1.0, d), Error);

  const Generator psi = mexican_hat_2d();
  const FrameSystem sys{psi, psi, d, make_window(2, -2, 2, 4)};
  const GramMatrix G = gram_matrix(sys, 1e-10);
  const AlmostDiagonalFit fit = almost_diagonal_fit(G.entries, G.window, 1.0, 0.5, 1.0, d);
  CHECK(std::isfinite(fit.C_M));
  CHECK(fit.C_M > 0.0);
  CHECK(fit.decay_slope < 0.0);
  CHECK(fit.pairs_used > 0);
}

TEST_CASE("sequence and matrix files round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "aniframe_lattice_test";
  std::filesystem::create_directories(dir);
  CoefficientSequence s;
  s.window = make_window(2, 0, 1, 1);
  s.values.resize(s.window.size());
  for (long i = 0; i < s.values.size(); ++i) s.values[i] = cplx(0.1 * i, -1.0 / (i + 1));
  write_sequence_csv((dir / "s.csv").string(), s);
  const CoefficientSequence r = read_sequence_csv((dir / "s.csv").string(), 2);
  REQUIRE(r.window.size() == s.window.size());
  CHECK((r.values - s.values).norm() == 0.0);
  CHECK(r.window[5] == s.window[5]);

  GramMatrix g;
  g.window = s.window;
  g.entries = s.values * s.values.adjoint();
  g.synthesizer = "a";
  g.analyzer = "b";
  g.dilation = mat2(2, 0, 0, 2);
  g.method = "test";
  write_afmat((dir / "m.afmat").string(), g);
  const GramMatrix h = read_afmat((dir / "m.afmat").string());
  CHECK((h.entries - g.entries).norm() == 0.0);
  CHECK(h.window.size() == g.window.size());
  std::filesystem::remove_all(dir);
}
