#include <doctest.h>

#include <random>

#include "mrbv/forms.hpp"

using namespace mrbv;

namespace {

std::shared_ptr<const GelfandSpace> identity_space(int n) {
  return std::make_shared<GelfandSpace>(Matrix::Identity(n, n),
                                        Matrix::Identity(n, n));
}

NonAutonomousForm autonomous_form(std::shared_ptr<const GelfandSpace> space,
                                  Matrix s, double bound, double alpha,
                                  double horizon = 1.0) {
  FormConstants c;
  c.bound_M = bound;
  c.alpha = alpha;
  c.lipschitz = 0.0;
  auto assembler = [s](double, Side) { return s; };
  return NonAutonomousForm(std::move(space), assembler, c,
                           std::make_shared<BVModulus>(
                               BVModulus::constant(horizon, 0.0)));
}

std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(a + (b - a) * i / (count - 1));
  }
  return out;
}

std::vector<double> random_times(double horizon, int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, horizon);
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(unif(rng));
  return out;
}

}  // namespace

TEST_CASE("scalar form assembles the coefficient value") {
  auto form = build_scalar_form(PiecewiseLinearProfile::affine(1.0, 1.0, 1.0));
  CHECK(form.assemble(0.5)(0, 0) == doctest::Approx(1.5));
  CHECK(form.alpha() == doctest::Approx(1.0));
  CHECK(form.bound_M() == doctest::Approx(2.0));
  CHECK(form.lipschitz().value() == doctest::Approx(1.0));
  CHECK_THROWS_AS(form.assemble(2.0), std::out_of_range);
}

TEST_CASE("P1 Dirichlet stiffness plus unit mass on two elements") {
  Mesh1D mesh{2, Mesh1D::Boundary::Dirichlet};
  auto built = build_elliptic_1d(mesh, 1.0, PiecewiseCoefficient::constant(1.0));
  Matrix s = built.form.assemble(0.3);
  REQUIRE(s.rows() == 1);
  CHECK(s(0, 0) == doctest::Approx(4.0 + 1.0 / 3.0).epsilon(1e-14));
  // gram_H is the hat-function mass 1/3; gram_V the full H^1 product.
  CHECK(built.form.space().gram_h()(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(built.form.space().gram_v()(0, 0) == doctest::Approx(4.0 + 1.0 / 3.0));
}

TEST_CASE("Robin boundary terms land on the boundary diagonal") {
  Mesh1D mesh{4, Mesh1D::Boundary::Robin};
  RobinSpec with_beta{PiecewiseLinearProfile::constant(1.0, 1.0),
                      PiecewiseLinearProfile::constant(1.0, 1.0), 1.0};
  RobinSpec without{PiecewiseLinearProfile::constant(1.0, 0.0),
                    PiecewiseLinearProfile::constant(1.0, 0.0), 1.0};
  Matrix sb = build_robin_1d(mesh, with_beta).assemble(0.5);
  Matrix s0 = build_robin_1d(mesh, without).assemble(0.5);
  Matrix diff = sb - s0;
  CHECK(diff(0, 0) == doctest::Approx(1.0));
  CHECK(diff(4, 4) == doctest::Approx(1.0));
  CHECK(diff.cwiseAbs().sum() == doctest::Approx(2.0));
}

TEST_CASE("operator_apply_H returns the H representative of S u") {
  Vector u(2);
  u << 1.0, 1.0;
  Matrix s = Matrix::Zero(2, 2);
  s(0, 0) = 2.0;
  s(1, 1) = 3.0;

  auto euclid = autonomous_form(identity_space(2), s, 3.0, 2.0);
  Vector z = euclid.operator_apply_H(0.5, u);
  CHECK(z(0) == doctest::Approx(2.0));
  CHECK(z(1) == doctest::Approx(3.0));

  Matrix gh = Matrix::Zero(2, 2);
  gh(0, 0) = 2.0;
  gh(1, 1) = 1.0;
  auto weighted_space =
      std::make_shared<GelfandSpace>(gh, Matrix::Identity(2, 2));
  auto weighted = autonomous_form(weighted_space, s, 3.0, 2.0);
  Vector zw = weighted.operator_apply_H(0.5, u);
  CHECK(zw(0) == doctest::Approx(1.0));
  CHECK(zw(1) == doctest::Approx(3.0));
  CHECK(weighted.operator_apply_H(0.0, Vector::Zero(2)).norm() == 0.0);
}

TEST_CASE("probe_constants recovers scalar and generalized extrema") {
  auto step = build_scalar_form(
      PiecewiseLinearProfile::step(1.0, {0.5}, {1.0, 2.0}));
  auto [m1, a1] = probe_constants(step, linspace(0.0, 1.0, 41));
  CHECK(m1 == doctest::Approx(2.0));
  CHECK(a1 == doctest::Approx(1.0));

  Matrix s = Matrix::Zero(2, 2);
  s(0, 0) = 2.0;
  s(1, 1) = 5.0;
  Matrix gv = Matrix::Zero(2, 2);
  gv(0, 0) = 1.0;
  gv(1, 1) = 4.0;
  auto space = std::make_shared<GelfandSpace>(Matrix::Identity(2, 2), gv);
  auto form = autonomous_form(space, s, 2.0, 1.25);
  auto [m2, a2] = probe_constants(form, {0.25, 0.5});
  CHECK(m2 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(a2 == doctest::Approx(1.25).epsilon(1e-12));

  // S proportional to gram_V probes to (alpha, alpha).
  auto prop = autonomous_form(space, 0.7 * gv, 0.7, 0.7);
  auto [m3, a3] = probe_constants(prop, {0.1});
  CHECK(m3 == doctest::Approx(0.7));
  CHECK(a3 == doctest::Approx(0.7));

  CHECK_THROWS_AS(probe_constants(step, {}), std::invalid_argument);
}

TEST_CASE("probe_bv measures the domination slack") {
  // Autonomous form: slack is just the g increment.
  auto autonomous = build_scalar_form(PiecewiseLinearProfile::constant(1.0, 1.0),
                                      BVModulus::linear(1.0, 0.0, 2.0));
  CHECK(probe_bv(autonomous, linspace(0.0, 1.0, 11)) ==
        doctest::Approx(0.2).epsilon(1e-12));

  // Step coefficient with the exactly matching step modulus saturates.
  auto step = build_scalar_form(
      PiecewiseLinearProfile::step(1.0, {0.5}, {1.0, 2.0}));
  CHECK(probe_bv(step, linspace(0.0, 1.0, 21)) ==
        doctest::Approx(0.0).epsilon(1e-13));

  // a(t) = 1 + t dominated by g = 2t leaves slack dt per interval.
  auto affine = build_scalar_form(PiecewiseLinearProfile::affine(1.0, 1.0, 1.0),
                                  BVModulus::linear(1.0, 0.0, 2.0));
  CHECK(probe_bv(affine, linspace(0.0, 1.0, 11)) ==
        doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("mollify_form: autonomous, step, and affine reproduction") {
  Mollifier moll(10);

  auto autonomous = build_scalar_form(PiecewiseLinearProfile::constant(1.0, 1.5));
  auto moll_auto = mollify_form(autonomous, moll);
  for (double t : linspace(0.0, 1.0, 21)) {
    CHECK(moll_auto.assemble(t)(0, 0) == doctest::Approx(1.5).epsilon(1e-12));
  }

  auto step = build_scalar_form(
      PiecewiseLinearProfile::step(1.0, {0.5}, {1.0, 2.0}));
  auto moll_step = mollify_form(step, moll);
  CHECK(moll_step.assemble(0.5)(0, 0) == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(moll_step.assemble(0.2)(0, 0) == doctest::Approx(1.0));
  CHECK(moll_step.assemble(0.8)(0, 0) == doctest::Approx(2.0));
  CHECK(moll_step.lipschitz().has_value());

  auto affine = build_scalar_form(PiecewiseLinearProfile::affine(1.0, 1.0, 1.0));
  auto moll_affine = mollify_form(affine, moll);
  for (double t : linspace(0.1, 0.9, 9)) {
    CHECK(moll_affine.assemble(t)(0, 0) ==
          doctest::Approx(1.0 + t).epsilon(1e-10));
  }
}

TEST_CASE("mollified forms inherit the parent constants exactly") {
  auto step = build_scalar_form(
      PiecewiseLinearProfile::step(1.0, {0.4, 0.7}, {1.0, 3.0, 2.0}));
  for (int n : {4, 16}) {
    auto mf = mollify_form(step, Mollifier(n));
    auto [m_hat, a_hat] = probe_constants(mf, linspace(0.0, 1.0, 101));
    CHECK(m_hat <= step.bound_M() + 1e-12);
    CHECK(a_hat >= step.alpha() - 1e-12);
    CHECK(mf.symmetric() == step.symmetric());
    // And the mollified modulus still dominates the mollified coefficients.
    CHECK(probe_bv(mf, linspace(0.0, 1.0, 101)) >= -1e-9);
  }
}

TEST_CASE("built-in forms pass their declared constants on random samples") {
  std::vector<NonAutonomousForm> forms;
  forms.push_back(build_scalar_form(
      PiecewiseLinearProfile::step(1.0, {0.5}, {1.0, 2.0})));
  forms.push_back(build_diagonal_form(
      {PiecewiseLinearProfile::affine(1.0, 1.0, 1.0),
       PiecewiseLinearProfile::step(1.0, {0.25, 0.75}, {2.0, 1.0, 3.0})}));
  Mesh1D dmesh{8, Mesh1D::Boundary::Dirichlet};
  forms.push_back(build_elliptic_1d(dmesh, 1.0,
                                    PiecewiseCoefficient{{0.5}, {{1.0}, {2.0}}})
                      .form);
  Mesh1D rmesh{8, Mesh1D::Boundary::Robin};
  forms.push_back(build_robin_1d(
      rmesh, RobinSpec{PiecewiseLinearProfile::step(1.0, {0.5}, {0.0, 1.0}),
                       PiecewiseLinearProfile::constant(1.0, 1.0), 1.0}));

  int seed = 1000;
  for (const auto& form : forms) {
    auto times = random_times(form.horizon(), 50, static_cast<unsigned>(seed++));
    auto [m_hat, a_hat] = probe_constants(form, times);
    CHECK(m_hat <= form.bound_M() + 1e-10);
    CHECK(a_hat >= form.alpha() - 1e-10);
    CHECK(probe_bv(form, linspace(0.0, form.horizon(), 64)) >= -1e-12);
  }
}

TEST_CASE("elliptic builder: coefficient doubling and lower-order routing") {
  Mesh1D mesh{4, Mesh1D::Boundary::Dirichlet};
  auto built = build_elliptic_1d(mesh, 1.0,
                                 PiecewiseCoefficient{{0.5}, {{1.0}, {2.0}}});
  Matrix before = built.form.assemble(0.4);
  Matrix after = built.form.assemble(0.6);
  auto base = build_elliptic_1d(mesh, 1.0, PiecewiseCoefficient::constant(1.0));
  Matrix mass_part = built.form.space().gram_h();
  // Stiffness part doubles, mass part stays.
  CHECK(((after - mass_part) - 2.0 * (before - mass_part)).cwiseAbs().maxCoeff() <
        1e-12);
  auto bv = built.form.exact_modulus();
  REQUIRE(bv);
  CHECK(bv->jumps().size() == 1);
  CHECK(bv->jumps()[0].size == doctest::Approx(1.0));
  CHECK(probe_bv(built.form, linspace(0.0, 1.0, 33)) >= -1e-12);

  // No drift/potential: C reduces to the -1 mass correction.
  Matrix c = built.perturbation.c_action(0.3, Side::Raw);
  CHECK((c + mass_part).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(built.perturbation.h_l1() == doctest::Approx(1.0));

  // With drift 0.5 and no potential the majorant is (0.5 + 1)^2.
  auto with_drift = build_elliptic_1d(mesh, 1.0, PiecewiseCoefficient::constant(1.0),
                                      PiecewiseCoefficient::constant(0.5));
  CHECK(with_drift.perturbation.h_majorant->value(0.2) == doctest::Approx(2.25));

  CHECK_THROWS_AS(
      build_elliptic_1d(mesh, 1.0, PiecewiseCoefficient::constant(-1.0)),
      std::invalid_argument);
}

TEST_CASE("Robin builder: constants, trace-scaled modulus, time-constant case") {
  Mesh1D mesh{8, Mesh1D::Boundary::Robin};

  // beta == 0, lambda = 1: the form equals the V product, so (M, alpha) = (1, 1).
  auto neumann = build_robin_1d(
      mesh, RobinSpec{PiecewiseLinearProfile::constant(1.0, 0.0),
                      PiecewiseLinearProfile::constant(1.0, 0.0), 1.0});
  CHECK(neumann.alpha() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(neumann.bound_M() == doctest::Approx(1.0).epsilon(1e-10));
  for (double t : linspace(0.0, 1.0, 5)) {
    CHECK((neumann.assemble(t) - neumann.assemble(0.0)).cwiseAbs().maxCoeff() ==
          0.0);
  }

  // A step at the right endpoint only: the modulus jump carries the exact
  // discrete trace constant.
  auto stepped = build_robin_1d(
      mesh, RobinSpec{PiecewiseLinearProfile::constant(1.0, 0.0),
                      PiecewiseLinearProfile::step(1.0, {0.5}, {0.0, 1.0}), 1.0});
  auto bv = stepped.exact_modulus();
  REQUIRE(bv);
  REQUIRE(bv->jumps().size() == 1);
  const double tr =
      std::pow(stepped.space().dual_norm_vprime(Vector::Unit(9, 8)), 2);
  CHECK(bv->jumps()[0].size == doctest::Approx(tr));
  CHECK(tr < 2.0);  // 1D trace constant coth(1) ~ 1.313
  CHECK(probe_bv(stepped, linspace(0.0, 1.0, 41)) >= -1e-12);

  // A strongly negative beta with no shift cannot be coercive.
  CHECK_THROWS_AS(
      build_robin_1d(mesh,
                     RobinSpec{PiecewiseLinearProfile::constant(1.0, -5.0),
                               PiecewiseLinearProfile::constant(1.0, 0.0), 0.0}),
      std::invalid_argument);
}

TEST_CASE("diagonal form decouples scalar coefficients") {
  auto form = build_diagonal_form({PiecewiseLinearProfile::constant(1.0, 2.0),
                                   PiecewiseLinearProfile::affine(1.0, 1.0, 1.0)});
  Matrix s = form.assemble(0.5);
  CHECK(s(0, 0) == doctest::Approx(2.0));
  CHECK(s(1, 1) == doctest::Approx(1.5));
  CHECK(s(0, 1) == 0.0);
  CHECK(form.alpha() == doctest::Approx(1.0));
  CHECK(form.bound_M() == doctest::Approx(2.0));
}
