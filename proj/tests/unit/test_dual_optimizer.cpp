#include "aniframe/dual_optimizer.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <algorithm>
#include <cmath>

using namespace aniframe;
using testing_util::mat2;

namespace {

const GridSpec kGrid = spaced_grid(2, -6.0, 6.0, 0.25);

OptimizerOptions options(const DilationInfo& d) {
  OptimizerOptions o;
  o.molecular = default_molecular_params(d, 1.0);
  o.molecular.box = 6.0;
  return o;
}

}  // namespace

TEST_CASE("single element window") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  const SynthesisMatrix S = discretize_synthesis(mexican_hat_2d(), d, make_window(2, 0, 0, 0), kGrid);
  CHECK(S.entries.cols() == 1);
  CHECK(S.entries.col(0).squaredNorm() == doctest::Approx(2.0 * M_PI).epsilon(1e-6));
  CHECK(kernel_basis(S).dimension == 0);
  const CanonicalDual c = canonical_dual(S);
  CHECK(!c.rank_deficient);
  CHECK(c.condition_number == 1.0);
  // the Tikhonov shift is 1e-10 of sigma_max^2
  const double g = S.entries.col(0).squaredNorm();
  CHECK(std::abs(c.coefficients(0, 0) * g - 1.0) < 2e-10);
}

TEST_CASE("coarse grid is rejected") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  try {
    discretize_synthesis(mexican_hat_2d(), d, make_window(2, 0, 1, 0), spaced_grid(2, -6.0, 6.0, 0.5));
    FAIL("expected GridTooCoarse");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridTooCoarse);
  }
}

TEST_CASE("duplicated reference spans a one-dimensional kernel") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  const TruncationWindow base = make_window(2, 0, 0, 1);
  const TruncationWindow w = with_duplicate_reference(base);
  REQUIRE(w.size() == base.size() + 1);
  const SynthesisMatrix S = discretize_synthesis(mexican_hat_2d(), d, w, kGrid);
  const KernelBasis k = kernel_basis(S);
  REQUIRE(k.dimension == 1);
  long ref = 0;
  for (long i = 0; i < base.size(); ++i)
    if (base[i].j == 0 && base[i].k.isZero()) ref = i;
  const CVector v = k.vectors.col(0);
  const cplx phase = v[ref] / std::abs(v[ref]);
  CVector want = CVector::Zero(w.size());
  want[ref] = 1.0 / std::sqrt(2.0);
  want[w.size() - 1] = -1.0 / std::sqrt(2.0);
  CHECK((v / phase - want).norm() < 1e-8);

  const CanonicalDual c = canonical_dual(S);
  CHECK(c.rank_deficient);
  CHECK(!c.warnings.empty());
  // the two copies share the dual
  const auto& a = c.duals[ref].values;
  const auto& b = c.duals[w.size() - 1].values;
  double diff = 0.0, scale = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(a[i]));
  }
  CHECK(diff < 1e-8 * scale);
}

TEST_CASE("full rank window leaves the canonical dual in place") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  const OptimizerOptions o = options(d);
  const DualObjective J(mexican_hat_2d(), d, make_window(2, 0, 0, 1), kGrid, o);
  CHECK(J.dimension() == 0);
  const OptimizationResult r = optimize_dual(J, o);
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.el_residual == 0.0);
  CHECK((r.dual_coefficients - J.canonical().coefficients.col(J.reference())).norm() == 0.0);
}

TEST_CASE("optimization reaches a stationary point") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  const OptimizerOptions o = options(d);
  const DualObjective J(mexican_hat_2d(), d, with_duplicate_reference(make_window(2, 0, 0, 0)), kGrid, o);
  REQUIRE(J.dimension() == 2);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
  CHECK(el_residual(J, x0, o.fd_step) > o.el_tol);
  const OptimizationResult r = optimize_dual(J, o);
  CHECK(r.converged);
  CHECK(r.el_residual <= o.el_tol);
  CHECK(r.objective_trace.back() < r.objective_trace.front());
  for (size_t i = 1; i < r.objective_trace.size(); ++i) CHECK(r.objective_trace[i] <= r.objective_trace[i - 1]);
  const Eigen::VectorXd x = (Eigen::VectorXd(2) << r.kernel_coefficients[0].real(), r.kernel_coefficients[0].imag()).finished();
  CHECK(el_residual(J, x, o.fd_step) <= o.el_tol);
  CHECK(J(x) == doctest::Approx(r.objective_trace.back()).epsilon(1e-12));
  CHECK(J(x) >= J.offset());
}

TEST_CASE("objective parts") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  OptimizerOptions o = options(d);
  const DualObjective J(mexican_hat_2d(), d, with_duplicate_reference(make_window(2, 0, 0, 0)), kGrid, o);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  const auto p = J.parts(x);
  CHECK(p.size() == multi_indices(2, o.molecular.N).size());
  CHECK(J(x) == doctest::Approx(J.offset() + *std::max_element(p.begin(), p.end())));
  CHECK_THROWS_AS(J.parts(Eigen::VectorXd::Zero(3)), Error);

  o.kind = ObjectiveKind::AlgebraProxy;
  const DualObjective A(mexican_hat_2d(), d, with_duplicate_reference(make_window(2, 0, 0, 0)), kGrid, o);
  CHECK(A.parts(x).size() == 1);
  CHECK(A.offset() == 0.0);
}

TEST_CASE("power-law fit") {
  std::vector<double> k{1.0, 2.0, 4.0, 8.0, 16.0}, y;
  for (double v : k) y.push_back(3.0 * std::pow(v, 0.7));
  const PowerLawFit f = fit_power_law(k, y);
  CHECK(f.exponent == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(std::exp(f.log_constant) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_power_law({1.0, 1.0, 2.0}, {1.0, 2.0, 3.0}), Error);
  CHECK_THROWS_AS(fit_power_law({1.0, 2.0, 3.0}, {1.0, 0.0, 3.0}), Error);
}

TEST_CASE("isotropic family has no scaling fit") {
  const Generator psi = mexican_hat_2d();
  std::vector<DilationInfo> fam{validate_dilation(mat2(2, 0, 0, 2)), validate_dilation(mat2(3, 0, 0, 3))};
  OptimizerOptions o = options(fam[0]);
  const ScalingResult r = kappa_scaling_experiment(psi, 1.0, fam, make_window(2, 0, 0, 0), kGrid, o);
  CHECK(r.rows.size() == 2);
  CHECK(!r.fit_available);
  CHECK(!r.warnings.empty());
  for (const auto& row : r.rows) {
    CHECK(row.kappa == doctest::Approx(1.0));
    CHECK(row.M > 0.0);
  }
}

TEST_CASE("random starts are seeded") {
  const auto a = random_starts(3, 2, 0.5, 11), b = random_starts(3, 2, 0.5, 11);
  REQUIRE(a.size() == 2);
  CHECK(a[0] == b[0]);
  CHECK(a[1] == b[1]);
  CHECK(a[0] != a[1]);
  for (const auto& v : a)
    for (long i = 0; i < v.size(); ++i) CHECK(std::max(std::abs(v[i].real()), std::abs(v[i].imag())) <= 0.5);
}

TEST_CASE("objective kind names round-trip") {
  for (ObjectiveKind k : {ObjectiveKind::MolecularNorm, ObjectiveKind::AlgebraProxy})
    CHECK(objective_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(objective_kind_from_string("gradient"), Error);
}
