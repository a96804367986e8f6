#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sundman/core.hpp"
#include "sundman/errors.hpp"
#include "sundman/parse.hpp"
#include "sundman/verify.hpp"

using namespace sundman;
using namespace sundman::expr;

namespace {

Expr P(const char* s) { return parse(s); }

struct Built {
  OdeQuad ode;
  FirstIntegral fi;
  SundmanTransform st;
  SolutionFamily fam;
};

Built build(const char* F, const char* F1, const char* F2, const SampleBox& box) {
  Built b{{P(F), P(F1), P(F2)}, {}, {}, {}};
  PipelineOptions opt;
  opt.box = box;
  auto cls = classify(b.ode, box);
  auto aux = solve_auxiliary_g(b.ode, cls, opt);
  b.fi = build_first_integral(b.ode, aux, box);
  auto red = reduce_first_order(b.fi, box);
  b.st = build_transform(b.fi, red.I, opt);
  b.fam = general_solution(b.st, box);
  return b;
}

SampleBox ex1_box() {
  SampleBox b;
  b.set("x", 0.5, 2).set("y", -0.5, 1.5);
  return b;
}

}  // namespace

TEST_CASE("free particle") {
  OdeQuad free{Expr(0), Expr(0), Expr(0)};
  auto traj = integrate_ode(free, {0, 1, 2}, 0.01, 100);
  REQUIRE(traj.samples.size() == 101);
  for (const auto& s : traj.samples) CHECK(std::fabs(s.y - (1 + 2 * s.x)) <= 1e-13);
  FirstIntegral w{Expr(1), Expr(0), "theorem4"};
  CHECK(first_integral_drift(w, traj) <= 1e-15);
  SundmanTransform st;
  st.psi = P("y");
  st.phi = Expr(1);
  CHECK(linearity_check(st, traj) <= 1e-9);
  SolutionFamily line;
  line.lhs = P("y");
  line.rhs = P("C1 + C2*x");
  CHECK(solution_family_residual(free, line, SampleBox{}) <= 1e-15);
  CHECK_THROWS_AS(integrate_ode(free, {0, 1, 2}, 0.1, 10), std::invalid_argument);
}

TEST_CASE("oscillator trajectory") {
  auto b = build("0", "0", "y", ex1_box());
  auto traj = integrate_ode(b.ode, {1, 0, 1}, 1e-3, 500);
  CHECK(first_integral_drift(b.fi, traj) <= 1e-6);
  CHECK(solution_family_residual(b.ode, b.fam, ex1_box()) <= 1e-8);
  CHECK(linearity_check(b.st, traj) <= 1e-4);

  // erfi(y/sqrt 2) - C1 x - C2 stays zero with constants fitted on two samples
  auto v = [](const StatePoint& s) { return erfi(s.y / std::sqrt(2.0)); };
  const auto& s0 = traj.samples[0];
  const auto& s1 = traj.samples[1];
  double c1 = (v(s1) - v(s0)) / (s1.x - s0.x);
  double c2 = v(s0) - c1 * s0.x;
  // two-point fit carries the RK4 local error amplified by 1/step
  double worst = 0;
  for (const auto& s : traj.samples) worst = std::max(worst, std::fabs(v(s) - c1 * s.x - c2));
  CHECK(worst <= 1e-8);

  FirstIntegral wrong = b.fi;
  wrong.B = b.fi.B + P("x");
  CHECK(first_integral_drift(wrong, traj) >= 1e-3);
}

TEST_CASE("RK4 order") {
  auto b = build("0", "0", "y", ex1_box());
  double coarse = first_integral_drift(b.fi, integrate_ode(b.ode, {1, 0, 1}, 0.01, 50));
  double fine = first_integral_drift(b.fi, integrate_ode(b.ode, {1, 0, 1}, 0.005, 100));
  CAPTURE(coarse);
  CAPTURE(fine);
  CHECK(coarse / fine >= 12);
}

TEST_CASE("Case2 transform is still linearizing") {
  SampleBox box;
  box.set("x", 0.5, 1.5).set("y", 0.2, 1.2);
  auto b = build("-tan(y)/x^2", "1/x - tan(y)/(x*y)", "-(tan(y) + 1/y)", box);
  auto traj = integrate_ode(b.ode, {1, 0.5, 0.3}, 1e-3, 500);
  CHECK(first_integral_drift(b.fi, traj) <= 1e-6);
  CHECK(linearity_check(b.st, traj) <= 1e-4);
  CHECK(solution_family_residual(b.ode, b.fam, box) <= 1e-8);
  // running into y = pi/2
  CHECK_THROWS_AS(integrate_ode(b.ode, {1, 1.4, 3}, 1e-3, 2000), SingularEncounter);
}

TEST_CASE("surface families") {
  SampleBox sphere_box;
  sphere_box.set("y", 0.3, 1.2);
  auto sphere = build("-sin(y)*cos(y)", "0", "-2*cot(y)", sphere_box);
  CHECK(solution_family_residual(sphere.ode, sphere.fam, sphere_box) <= 1e-8);
  // the printed locus itself, not just ours
  SolutionFamily reference_form;
  reference_form.lhs = P("c1*sin(y)*sin(x) + c2*sin(y)*cos(x)");
  reference_form.rhs = P("cos(y)");
  CHECK(solution_family_residual(sphere.ode, reference_form, sphere_box) <= 1e-8);

  SolutionFamily pseudo;
  pseudo.lhs = P("exp(-2*y) + x^2");
  pseudo.rhs = P("c1*x + 2*c2");
  CHECK(solution_family_residual({P("-exp(2*y)"), Expr(0), Expr(-2)}, pseudo, SampleBox{}) <= 1e-8);

  // wrong family is caught
  SolutionFamily bad;
  bad.lhs = P("exp(-2*y) + x^3");
  bad.rhs = P("c1*x + 2*c2");
  CHECK(solution_family_residual({P("-exp(2*y)"), Expr(0), Expr(-2)}, bad, SampleBox{}) > 1e-3);
}

TEST_CASE("linearity needs monotone t") {
  OdeQuad free{Expr(0), Expr(0), Expr(0)};
  auto traj = integrate_ode(free, {-0.5, 1, 0}, 0.01, 100);
  SundmanTransform st;
  st.psi = P("y");
  st.phi = P("x");
  CHECK_THROWS_AS(linearity_check(st, traj), NonMonotoneT);
}

TEST_CASE("locus family comparison") {
  SampleBox box;
  box.set("x", 0.3, 1.7).set("y", 0.3, 1.2);
  // same great circles: cot y = a sin x + b cos x, written two ways
  Expr ours = P("cos(y) - (C1*sin(x)*sin(y) + C2*sin(y)*cos(x))");
  Expr other = P("c1*sin(y)*sin(x) + c2*sin(y)*cos(x) - cos(y)");
  CHECK(locus_family_mismatch(ours, other, box) <= 1e-9);
  // affine reshuffle of the constants
  CHECK(locus_family_mismatch(ours, P("cot(y) - (c1 + c2)*sin(x) - (c1 - c2)*cos(x)"), box) <= 1e-9);
  // a different family
  CHECK(locus_family_mismatch(ours, P("cos(y) - c1*sin(x) - c2*cos(x)"), box) > 1e-6);
  CHECK(locus_family_mismatch(P("y - C1 - C2*x"), P("y - c1 - c2*x^2"), box) > 1e-6);
  CHECK_THROWS_AS(locus_family_mismatch(P("y - C1"), P("y - c1 - c2*x"), box), ImplicitSolveFailure);
}
