#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sundman/errors.hpp"
#include "sundman/geodesics.hpp"
#include "sundman/parse.hpp"

using namespace sundman;
using namespace sundman::expr;

namespace {

Expr P(const char* s) { return parse(s); }

bool same(const Expr& a, const Expr& b, const SampleBox& box) { return is_identically_zero(a - b, box); }

void check_ode(const char* name, const char* F, const char* F2) {
  Profile p = profile_by_name(name);
  OdeQuad o = geodesic_ode(p);
  CHECK(same(o.F, P(F), p.box));
  CHECK(o.F1.is_zero());
  CHECK(same(o.F2, P(F2), p.box));
}

}  // namespace

TEST_CASE("catalog") {
  auto names = profile_names();
  REQUIRE(names.size() == 6);
  CHECK(names.front() == "cone");
  CHECK(names.back() == "pseudosphere");
  CHECK_THROWS(profile_by_name("torus"));
  Profile plane = profile_by_name("plane", {{"b", 1}});
  CHECK(same(plane.f, P("1 + y"), plane.box));
}

TEST_CASE("geodesic equations") {
  check_ode("sphere", "-sin(y)*cos(y)", "-2*cos(y)/sin(y)");
  check_ode("hyperboloid", "-sinh(y)*cosh(y)", "-2*sinh(y)/cosh(y)");
  check_ode("pseudosphere", "-exp(2*y)", "-2");
  check_ode("cone", "-y", "-2/y");
}

TEST_CASE("curvature and criterion constant") {
  struct Want {
    const char* name;
    double K;
    double kappa;
    bool unit;
  };
  const Want table[] = {{"cone", 0, 1, true},        {"plane", 0, 1, true},         {"sphere", 1, 1, true},
                        {"conic", -1, 1, false},     {"hyperboloid", -1, -1, false}, {"pseudosphere", -1, 0, false}};
  for (const auto& w : table) {
    CAPTURE(w.name);
    Profile p = profile_by_name(w.name, {{"b", 1}});
    CHECK(profile_curvature(p, p.box) == doctest::Approx(w.K).epsilon(1e-12));
    CHECK(same(criterion_constant(p), Expr(Rational(static_cast<long>(w.kappa))), p.box));
    CHECK(is_identically_zero(reduction_residual(p, P("x^3 + sin(x)")), p.box));
    CHECK(unit_speed(p, p.box) == w.unit);
  }
  Profile bent = profile_from_expr("y^2");
  CHECK_THROWS_AS(profile_curvature(bent, bent.box), NonConstant);
}

TEST_CASE("solution families") {
  struct Want {
    const char* name;
    double b;
    const char* text;
  };
  const Want table[] = {
      {"sphere", 0, "cos(y) = C1*sin(x)*sin(y) + C2*sin(y)*cos(x)"},
      {"hyperboloid", 0, "sinh(y) = C1*sinh(x)*cosh(y) - C2*cosh(x)*cosh(y)"},
      {"pseudosphere", 0, "exp(-2*y) + x^2 = C1*x + 2*C2"},
      {"plane", 0, "1 = C1*y*sin(x) + C2*y*cos(x)"},
      {"cone", 0, "1 = C1*y*sin(x) + C2*y*cos(x)"},
      {"conic", 0, "cosh(y) = C1*sin(x)*sinh(y) + C2*cos(x)*sinh(y)"},
  };
  for (const auto& w : table) {
    CAPTURE(w.name);
    GeodesicResult r = solve_geodesics(profile_by_name(w.name, {{"b", w.b}}));
    REQUIRE(r.run.ok());
    CHECK(r.run.family->text == w.text);
    const auto& v = *r.run.verification;
    CHECK(*v.max_drift <= 1e-6);
    CHECK(*v.max_ode_residual <= 1e-8);
    CHECK(*v.max_utt <= 1e-4);
    CHECK(r.reduction_holds);
    REQUIRE(r.run.affine);
    CHECK(r.run.affine->ok);
  }
}

TEST_CASE("symbolic plane offset") {
  GeodesicResult r = solve_geodesics(profile_by_name("plane"));
  REQUIRE(r.run.ok());
  CHECK(r.run.family->text == "1 = C1*sin(x)*(b + y) + C2*cos(x)*(b + y)");
  CHECK(*r.run.verification->max_ode_residual <= 1e-8);
}

TEST_CASE("great circles") {
  Profile p = profile_by_name("sphere");
  GeodesicResult r = solve_geodesics(p);
  auto traj = integrate_ode(r.ode, *r.run.trajectory_init, 1e-3, 500);
  CHECK(plane_through_origin_deviation(p, traj) <= 1e-8);
  Profile h = profile_by_name("hyperboloid");
  CHECK_THROWS_AS(plane_through_origin_deviation(h, traj), std::invalid_argument);
}

TEST_CASE("non-constant kappa fails in a named stage") {
  try {
    solve_geodesics(profile_from_expr("y^2"));
    FAIL("expected StageFailure");
  } catch (const StageFailure& e) {
    CHECK(!e.stage().empty());
  }
}
