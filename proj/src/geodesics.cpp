#include "sundman/geodesics.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "sundman/diff.hpp"
#include "sundman/errors.hpp"
#include "sundman/eval.hpp"
#include "sundman/parse.hpp"
#include "sundman/simplify.hpp"

namespace sundman {

using namespace expr;

namespace {

struct CatalogEntry {
  const char* name;
  const char* f;
  double curvature;
  double y_lo, y_hi;
  const char* height;  // nullptr: no real unit-speed embedding on the box
};

// y ranges keep f and f' away from zero
const CatalogEntry kCatalog[] = {
    {"cone", "y", 0, 0.3, 1.7, "0"},
    {"plane", "b + y", 0, 0.3, 1.7, "0"},
    {"sphere", "sin(y)", 1, 0.3, 1.2, "-cos(y)"},
    {"conic", "sinh(y)", -1, 0.3, 1.7, nullptr},
    {"hyperboloid", "cosh(y)", -1, 0.3, 1.7, nullptr},
    {"pseudosphere", "exp(y)", -1, 0.3, 1.7, nullptr},
};

Expr bind_constants(const Expr& e, const std::map<std::string, double>& params) {
  return simplify(transform(e, [&](const Expr& n) {
    if (!n.is(Kind::ArbitraryConstant)) return n;
    auto it = params.find(n.name());
    if (it == params.end()) return n;
    auto r = Rational::approximate(it->second, 1000000, 1e-12);
    if (!r) throw std::invalid_argument("parameter " + n.name() + " must be a rational number");
    return Expr(*r);
  }));
}

std::set<std::string> param_names(const std::map<std::string, double>& params) {
  std::set<std::string> out{"b"};
  for (const auto& [k, v] : params) out.insert(k);
  return out;
}

}  // namespace

std::vector<std::string> profile_names() {
  std::vector<std::string> out;
  for (const auto& c : kCatalog) out.emplace_back(c.name);
  return out;
}

Profile profile_by_name(const std::string& name, const std::map<std::string, double>& params) {
  for (const auto& c : kCatalog) {
    if (name != c.name) continue;
    Profile p;
    p.name = c.name;
    p.f = bind_constants(parse(c.f, ParseOptions{false, param_names(params)}), params);
    p.expected_curvature = c.curvature;
    p.box.set("x", 0.3, 1.7).set("y", c.y_lo, c.y_hi);
    if (c.height) p.height = parse(c.height);
    // the default start runs into the singular region on the pseudosphere; start
    // on the geodesic exp(-2y) = 2/5 - (x - 1)^2 instead
    if (p.name == "pseudosphere") p.init = StatePoint{0.5, -0.5 * std::log(0.15), -10.0 / 3.0};
    return p;
  }
  std::string known;
  for (const auto& n : profile_names()) known += (known.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown profile '" + name + "' (known: " + known + ")");
}

Profile profile_from_expr(const std::string& f_text, const std::map<std::string, double>& params) {
  Profile p;
  p.name = "custom";
  p.f = bind_constants(parse(f_text, ParseOptions{false, param_names(params)}), params);
  for (const auto& v : free_variables(p.f))
    if (v != "y") throw std::invalid_argument("profile f must depend on y only (found " + v + ")");
  p.box.set("x", 0.3, 1.7).set("y", 0.3, 1.7);
  return p;
}

OdeQuad geodesic_ode(const Profile& p) {
  Expr fp = differentiate(p.f, "y");
  return {simplify(-p.f * fp), Expr(0), simplify(Expr(-2) * fp / p.f)};
}

double profile_curvature(const Profile& p, const SampleBox& box) {
  Expr k = simplify(-differentiate(p.f, "y", 2) / p.f);
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (const auto& pt : box.draw({"y"})) {
    double v = evaluate(k, pt);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo > 1e-9) throw NonConstant("curvature -f''/f ranges over [" + std::to_string(lo) + ", " +
                                        std::to_string(hi) + "]");
  return 0.5 * (lo + hi);
}

Expr criterion_constant(const Profile& p) {
  Expr fp = differentiate(p.f, "y");
  return simplify(fp * fp - p.f * differentiate(fp, "y"));
}

Expr reduction_residual(const Profile& p, const Expr& probe_g) {
  Expr g1 = differentiate(probe_g, "x");
  return simplify(criterion_residual(geodesic_ode(p), probe_g, p.box) + differentiate(g1, "x") + g1 * g1 +
                  criterion_constant(p));
}

bool unit_speed(const Profile& p, const SampleBox& box) {
  Expr fp = differentiate(p.f, "y");
  for (const auto& pt : box.draw({"y"}))
    if (std::pow(evaluate(fp, pt), 2) > 1 + 1e-12) return false;
  return true;
}

GeodesicResult analyze_geodesics(const Profile& p) {
  GeodesicResult r;
  r.profile = p;
  r.ode = geodesic_ode(p);
  r.kappa = criterion_constant(p);
  r.kappa_constant = depends_only_on(r.kappa, {}, p.box);
  try {
    r.curvature = profile_curvature(p, p.box);
  } catch (const NonConstant&) {
  }
  r.unit_speed = unit_speed(p, p.box);
  r.reduction_holds = is_identically_zero(reduction_residual(p, parse("x^3 + sin(x)")), p.box);
  PipelineOptions opt;
  opt.box = p.box;
  VerifyOptions vo;
  vo.init = p.init;
  r.run = run_pipeline(r.ode, opt, Stage::Verify, vo);
  return r;
}

GeodesicResult solve_geodesics(const Profile& p) {
  GeodesicResult r = analyze_geodesics(p);
  if (const auto* f = r.run.failure()) throw StageFailure(f->stage, f->error_kind, f->message);
  return r;
}

double plane_through_origin_deviation(const Profile& p, const Trajectory& traj) {
  if (!p.height) throw std::invalid_argument("profile '" + p.name + "' has no embedding height");
  const Expr& g = *p.height;
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(traj.samples.size()), 3);
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const auto& s = traj.samples[i];
    EvalPoint e;
    e.set("y", s.y);
    double f = evaluate(p.f, e);
    pts.row(static_cast<Eigen::Index>(i)) << f * std::cos(s.x), f * std::sin(s.x), evaluate(g, e);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(pts, Eigen::ComputeThinV);
  Eigen::Vector3d n = svd.matrixV().col(2);
  return (pts * n).cwiseAbs().maxCoeff();
}

}  // namespace sundman
