#include "sundman/core.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <tuple>

#include "sundman/diff.hpp"
#include "sundman/errors.hpp"
#include "sundman/eval.hpp"
#include "sundman/parse.hpp"
#include "sundman/simplify.hpp"

namespace sundman {

using namespace expr;

namespace {

const Expr X = Expr::variable("x");
const Expr Y = Expr::variable("y");

Expr dx(const Expr& e) { return differentiate(e, "x"); }
Expr dy(const Expr& e) { return differentiate(e, "y"); }

// simplify, and snap to 0 when the zero test says so
Expr tidy(const Expr& e, const SampleBox& box) {
  Expr s = simplify(e);
  try {
    if (!s.is_zero() && is_identically_zero(s, box)) return Expr(0);
  } catch (const Error&) {
  }
  return s;
}

bool zero_on(const Expr& e, const SampleBox& box) {
  try {
    return is_identically_zero(e, box);
  } catch (const Error&) {
    return false;
  }
}

bool x_only(const Expr& e, const SampleBox& box) {
  try {
    return depends_only_on(e, {"x"}, box);
  } catch (const Error&) {
    return false;
  }
}

Expr positive_log(const Expr& w, const SampleBox& box) {
  auto fv = free_variables(w);
  std::vector<std::string> vars(fv.begin(), fv.end());
  for (const auto& p : box.draw(vars)) {
    try {
      return evaluate(w, p) < 0 ? ln(-w) : ln(w);
    } catch (const Error&) {
    }
  }
  return ln(w);
}

IntegrationContext ctx_for(const SampleBox& box) {
  IntegrationContext ctx;
  ctx.box = box;
  return ctx;
}

Expr integrate(const Expr& e, const std::string& v, const SampleBox& box) {
  return antiderivative(e, v, ctx_for(box)).result;
}

// H = int F2 dy, shared by h and k so both use the same integration constant
Expr f2_antiderivative(const OdeQuad& ode, const SampleBox& box) { return integrate(ode.F2, "y", box); }

// d/dx of int F2 dy; falls back to int F2_x dy when H cannot be differentiated
Expr dx_of_H(const OdeQuad& ode, const Expr& H, const SampleBox& box) {
  try {
    return dx(H);
  } catch (const CannotDifferentiate&) {
    return integrate(dx(ode.F2), "y", box);
  }
}

}  // namespace

std::string to_string(Case c) {
  switch (c) {
    case Case::Case1: return "Case1";
    case Case::Case2: return "Case2";
    case Case::NotSLinearizable: return "NotSLinearizable";
  }
  return "?";
}

std::string to_string(Eta e) {
  switch (e) {
    case Eta::Identity: return "identity";
    case Eta::Reciprocal: return "reciprocal";
    case Eta::Ln: return "ln";
    case Eta::Square: return "square";
  }
  return "?";
}

Eta eta_from_string(const std::string& s) {
  if (s == "identity") return Eta::Identity;
  if (s == "reciprocal") return Eta::Reciprocal;
  if (s == "ln") return Eta::Ln;
  if (s == "square") return Eta::Square;
  throw std::invalid_argument("unknown eta '" + s + "' (expected identity, reciprocal, ln or square)");
}

Expr apply_eta(Eta e, const Expr& I, const SampleBox& box) {
  switch (e) {
    case Eta::Identity: return I;
    case Eta::Reciprocal: return pow(I, Expr(-1));
    case Eta::Ln: return positive_log(I, box);
    case Eta::Square: return pow(I, Expr(2));
  }
  return I;
}

// ---------------------------------------------------------------------------
// S-functions and classification

SFunctions compute_s_functions(const OdeQuad& ode, const SampleBox& box) {
  const auto& [F, F1, F2] = ode;
  SFunctions s;
  Expr d = dx(F2) - dy(F1);  // F2_x - F1_y
  s.S1 = simplify(dy(F1) - Expr(2) * dx(F2));
  s.S2 = simplify(dy(F * F2 + dy(F)) + dx(d) + d * F1);
  s.s1_test = test_zero(s.S1, box);
  s.s2_test = test_zero(s.S2, box);
  if (!s.s1_test.zero) {
    Expr r = s.S2 / s.S1;
    s.S3 = simplify(dy(r) - d);
    s.S4 = simplify(dx(r) + pow(r, Expr(2)) + F1 * r + F * F2 + dy(F));
    s.s3_test = test_zero(*s.S3, box);
    s.s4_test = test_zero(*s.S4, box);
  }
  return s;
}

Classification classify(const OdeQuad& ode, const SampleBox& box) {
  Classification c;
  c.s = compute_s_functions(ode, box);
  if (c.s.s1_test.zero) {
    if (c.s.s2_test.zero) {
      c.kind = Case::Case1;
    } else {
      c.failing = "S2";
      c.evidence = c.s.s2_test;
    }
    return c;
  }
  if (!c.s.s3_test->zero) {
    c.failing = "S3";
    c.evidence = *c.s.s3_test;
  } else if (!c.s.s4_test->zero) {
    c.failing = "S4";
    c.evidence = *c.s.s4_test;
  } else {
    c.kind = Case::Case2;
  }
  return c;
}

// ---------------------------------------------------------------------------
// auxiliary function g

Expr criterion_residual(const OdeQuad& ode, const Expr& g, const SampleBox& box) {
  const auto& [F, F1, F2] = ode;
  Expr h = f2_antiderivative(ode, box) + g;
  Expr hx = dx(h);
  return simplify(dx(F1) + F1 * hx - pow(hx, Expr(2)) - dx(hx) - dy(F) - F * F2);
}

std::optional<Expr> scan_g_catalog(const OdeQuad& ode, const PipelineOptions& options) {
  std::vector<Expr> cands{Expr(0),      X,           -X,          Expr(2) * X, Expr(-2) * X,
                          X / Expr(2),  ln(X),       ln(sin(X)),  ln(cos(X)),  ln(sinh(X)),
                          ln(cosh(X)),  Expr(2) * ln(X)};
  cands.insert(cands.end(), options.g_ansatz.begin(), options.g_ansatz.end());
  for (const auto& g : cands) {
    try {
      if (is_identically_zero(criterion_residual(ode, g, options.box), options.box)) return g;
    } catch (const Error&) {
    }
  }
  return std::nullopt;
}

AuxiliaryData solve_auxiliary_g(const OdeQuad& ode, const Classification& cls, const PipelineOptions& options) {
  const SampleBox& box = options.box;
  const auto& [F, F1, F2] = ode;
  if (cls.kind == Case::NotSLinearizable)
    throw NoAuxiliaryFound("the equation is not S-linearizable (" + cls.failing + " does not vanish)");
  AuxiliaryData aux;
  aux.H = f2_antiderivative(ode, box);
  auto accept = [&](const Expr& g) {
    aux.g = simplify(g);
    aux.h = simplify(aux.H + aux.g);
    try {
      return is_identically_zero(criterion_residual(ode, aux.g, box), box);
    } catch (const Error&) {
      return false;
    }
  };
  std::optional<Expr> k;
  try {
    if (cls.kind == Case::Case1) {
      Expr kp = collapse(tidy(F1 / Expr(2) - dx_of_H(ode, aux.H, box), box), "y", box);
      if (!depends_on(kp, "y")) k = integrate(kp, "x", box);
    } else {
      Expr r = cls.s.S2 / cls.s.S1;
      Expr kk = collapse(tidy(r + F1 - dx_of_H(ode, aux.H, box), box), "y", box);
      if (!depends_on(kk, "y")) k = kk;
    }
  } catch (const Error&) {
  }

  if (cls.kind == Case::Case1 && k) {
    try {
      Expr fq = collapse(tidy(F * F2 + dy(F) - dx(F1) / Expr(2) - pow(F1, Expr(2)) / Expr(4), box), "y", box);
      if (!depends_on(fq, "y")) {
        QSolution qs = solve_q_ode(fq, box);
        if (accept(positive_log(qs.q, box) + *k)) {
          aux.k = k;
          aux.q = qs.q;
          aux.fq = qs.f;
          aux.P = simplify(aux.h - positive_log(qs.q, box));
          aux.provenance = "alt1-q-equation";
          return aux;
        }
      }
    } catch (const Error&) {
    }
  }
  if (cls.kind == Case::Case2 && k) {
    try {
      if (accept(integrate(*k, "x", box))) {
        aux.k = k;
        aux.P = aux.h;
        aux.provenance = "alt2-integration";
        return aux;
      }
    } catch (const Error&) {
    }
  }
  if (auto g = scan_g_catalog(ode, options)) {
    accept(*g);
    aux.provenance = "ansatz-scan";
    if (cls.kind == Case::Case1) {
      if (k) {
        // g = ln q + k  =>  q = exp(g - k)
        aux.k = k;
        aux.q = simplify(exp(aux.g - integrate(collapse(tidy(F1 / Expr(2) - dx_of_H(ode, aux.H, box), box), "y", box),
                                               "x", box)));
        aux.P = simplify(aux.h - positive_log(*aux.q, box));
      }
    } else {
      aux.P = aux.h;
    }
    return aux;
  }
  throw NoAuxiliaryFound("classification is " + to_string(cls.kind) +
                         " but no auxiliary g(x) was found (expression-class limitation)");
}

// ---------------------------------------------------------------------------
// first integrals

FirstIntegral build_first_integral(const OdeQuad& ode, const AuxiliaryData& aux, const SampleBox& box) {
  const auto& [F, F1, F2] = ode;
  FirstIntegral fi;
  fi.provenance = "theorem4";
  fi.A = simplify(exp(aux.h));
  auto ctx = ctx_for(box);
  auto t1 = antiderivative(F * fi.A, "x", ctx);
  // The inner x-integral is d/dy of the first one (equal up to a y-only term,
  // which would otherwise leak into z(y) through independent constants).
  std::optional<Expr> inner;
  if (t1.closed_form) {
    try {
      inner = simplify(dy(t1.result));
    } catch (const CannotDifferentiate&) {
    }
  }
  if (!inner) {
    auto r = antiderivative(fi.A * (dy(F) + F * F2), "x", ctx);
    fi.inner_closed = r.closed_form;
    inner = r.result;
  }
  Expr hx = dx(aux.h);
  Expr outer_integrand = tidy(fi.A * (F1 - hx) - *inner, box);
  outer_integrand = collapse(outer_integrand, "x", box);
  auto outer = antiderivative(outer_integrand, "y", ctx);
  fi.B = simplify(t1.result + outer.result);
  fi.closed_form = !contains_integral(fi.A) && !contains_integral(fi.B);
  return fi;
}

FirstIntegral build_first_integral_mr(const OdeQuad& ode, const Classification& cls, const AuxiliaryData& aux,
                                      const SampleBox& box) {
  const auto& [F, F1, F2] = ode;
  auto ctx = ctx_for(box);
  FirstIntegral fi;
  fi.provenance = "muriel-romero";
  Expr P, Qx, Qy;
  if (cls.kind == Case::Case1) {
    if (!aux.q) throw IntegrationFailure("no q(x) available for the Case1 construction");
    const Expr& q = *aux.q;
    auto p = potential(tidy(F1 / Expr(2), box), tidy(F2, box), ctx);
    P = p ? *p : *aux.P;
    Expr qe = simplify(q * exp(P));
    fi.A = qe;
    Qx = tidy(F * qe, box);
    Qy = tidy((F1 / Expr(2) - dx(q) / q) * qe, box);
  } else if (cls.kind == Case::Case2) {
    Expr r = cls.s.S2 / cls.s.S1;
    Expr px = collapse_all(tidy(F1 + r, box), box);
    auto p = potential(px, tidy(F2, box), ctx);
    P = p ? *p : *aux.P;
    Expr e = simplify(exp(P));
    fi.A = e;
    Qx = tidy(F * e, box);
    Qy = collapse_all(tidy(-r * e, box), box);
  } else {
    throw IntegrationFailure("the equation is not S-linearizable");
  }
  auto Q = potential(Qx, Qy, ctx);
  if (!Q) throw IntegrationFailure("the Q system of the Case construction did not close");
  fi.B = *Q;
  fi.closed_form = !contains_integral(fi.A) && !contains_integral(fi.B);
  return fi;
}

AffineFit fit_affine(const FirstIntegral& w1, const FirstIntegral& w2, const SampleBox& box, double tol) {
  Expr p = Expr::variable("yp");
  Expr e1 = w1.A * p + w1.B;
  Expr e2 = w2.A * p + w2.B;
  std::vector<std::pair<double, double>> vals;
  for (const auto& pt : box.draw({"x", "y", "yp"})) {
    try {
      double a = evaluate(e1, pt);
      double b = evaluate(e2, pt);
      if (std::isfinite(a) && std::isfinite(b)) vals.emplace_back(a, b);
    } catch (const Error&) {
    }
  }
  AffineFit fit;
  if (vals.size() < 3) return fit;
  // first two points with distinct w1 fix the constants
  std::size_t j = 1;
  while (j < vals.size() && std::fabs(vals[j].first - vals[0].first) < 1e-6 * (1 + std::fabs(vals[0].first))) ++j;
  if (j == vals.size()) return fit;
  fit.c1 = (vals[j].second - vals[0].second) / (vals[j].first - vals[0].first);
  fit.c2 = vals[0].second - fit.c1 * vals[0].first;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (i == 0 || i == j) continue;
    double pred = fit.c1 * vals[i].first + fit.c2;
    fit.max_rel_error = std::max(fit.max_rel_error, std::fabs(vals[i].second - pred) / (1 + std::fabs(vals[i].second)));
    ++fit.points;
  }
  fit.ok = fit.c1 != 0.0 && fit.max_rel_error <= tol;
  return fit;
}

// ---------------------------------------------------------------------------
// first-order reduction y' = -B/A

namespace {

// log forms become products, additive forms are scaled by their leading
// y-coefficient; any function of an invariant is an invariant
Expr normalize_terms(const Expr& I) {
  Expr s = simplify(I);
  std::vector<Expr> terms = s.is(Kind::Sum) ? std::vector<Expr>(s.operands().begin(), s.operands().end())
                                            : std::vector<Expr>{s};
  std::vector<Expr> kept;
  for (const auto& t : terms)
    if (!t.is_number()) kept.push_back(t);
  if (kept.empty()) return s;
  bool all_logs = true;
  std::optional<Rational> lead;
  for (const auto& t : kept) {
    auto [c, rest] = split_coefficient(t);
    if (!rest.is_fn(Fn::Ln)) all_logs = false;
    if (!lead && depends_on(rest, "y")) lead = c;
  }
  Rational c = lead.value_or(Rational(1));
  Expr body = add(kept);
  if (all_logs) {
    Expr e = simplify(exp(body / Expr(c)));
    if (e.is(Kind::Sum)) return simplify(e / Expr(split_coefficient(e.operands()[0]).first));
    return split_coefficient(e).second;
  }
  if (!s.is(Kind::Sum)) return split_coefficient(s).second;
  return simplify(body / Expr(c));
}

Expr normalize_invariant(const Expr& I) { return factor_common(normalize_terms(I)); }

bool is_invariant(const Expr& I, const Expr& slope, const SampleBox& box) {
  try {
    if (!depends_on(I, "y")) return false;
    return is_identically_zero(dx(I) + slope * dy(I), box);
  } catch (const Error&) {
    return false;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

// numeric rank-1 test of the slope on a grid; nullopt when the grid is not
// fully evaluable
std::optional<bool> rank_one(const Expr& s, const SampleBox& box) {
  constexpr int n = 8;
  Interval ix = box.interval("x"), iy = box.interval("y");
  Eigen::MatrixXd m(n, n);
  EvalPoint p;
  p.anchors["x"] = ix.lo;
  p.anchors["y"] = iy.lo;
  for (const auto& [v, a] : box.anchors) p.anchors[v] = a;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      p.values["x"] = ix.lo + (ix.hi - ix.lo) * (i + 0.5) / n;
      p.values["y"] = iy.lo + (iy.hi - iy.lo) * (j + 0.5) / n;
      try {
        m(i, j) = evaluate(s, p);
      } catch (const Error&) {
        return std::nullopt;
      }
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv(0) == 0.0) return true;
  return sv(1) <= 1e-9 * sv(0);
}

// term = x-part * y-part by factor dependence; nullopt if a factor mixes both
std::optional<std::pair<Expr, Expr>> split_term(const Expr& t) {
  std::vector<Expr> fs = t.is(Kind::Product) ? std::vector<Expr>(t.operands().begin(), t.operands().end())
                                             : std::vector<Expr>{t};
  std::vector<Expr> xs, ys;
  for (const auto& f : fs) {
    bool bx = depends_on(f, "x"), by = depends_on(f, "y");
    if (bx && by) return std::nullopt;
    (by ? ys : xs).push_back(f);
  }
  return std::pair{mul(xs), mul(ys)};
}

// a sum whose terms share their x-dependent (or y-dependent) factors
std::optional<std::pair<Expr, Expr>> split_sum(const Expr& s) {
  for (const char* v : {"x", "y"}) {
    std::optional<Expr> common;
    bool shared = true;
    for (const auto& t : s.operands()) {
      if (!split_term(t)) return std::nullopt;
      std::vector<Expr> fs = t.is(Kind::Product) ? std::vector<Expr>(t.operands().begin(), t.operands().end())
                                                 : std::vector<Expr>{t};
      std::vector<Expr> mine;
      for (const auto& f : fs)
        if (depends_on(f, v)) mine.push_back(f);
      Expr key = mul(std::move(mine));
      if (!common) common = key;
      if (key != *common) shared = false;
    }
    if (!shared) continue;
    Expr other = simplify(s / *common);
    if (depends_on(other, v)) continue;
    return v[0] == 'x' ? std::pair{*common, other} : std::pair{other, *common};
  }
  return std::nullopt;
}

std::optional<Expr> separable(const Expr& s, const SampleBox& box) {
  auto r1 = rank_one(s, box);
  if (r1 && !*r1) return std::nullopt;
  auto split = s.is(Kind::Sum) ? split_sum(s) : split_term(s);
  Expr xpart, ypart;
  if (split) {
    std::tie(xpart, ypart) = *split;
  } else {
    if (!r1) return std::nullopt;
    Rational x0 = Rational::approximate(box.interval("x").mid(), 10, 0.5).value_or(Rational(1));
    Rational y0 = Rational::approximate(box.interval("y").mid(), 10, 0.5).value_or(Rational(1));
    try {
      Expr s0 = simplify(substitute(substitute(s, "x", Expr(x0)), "y", Expr(y0)));
      xpart = simplify(substitute(s, "y", Expr(y0)));
      ypart = simplify(substitute(s, "x", Expr(x0)) / s0);
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  }
  if (!depends_on(ypart, "y")) return std::nullopt;
  auto ctx = ctx_for(box);
  Expr gy = antiderivative(pow(ypart, Expr(-1)), "y", ctx).result;
  Expr gx = antiderivative(xpart, "x", ctx).result;
  return simplify(gy - gx);
}

std::optional<Expr> via_potential(const Expr& mu, const FirstIntegral& fi, const SampleBox& box) {
  auto I = potential(simplify(mu * fi.B), simplify(mu * fi.A), ctx_for(box));
  if (!I) return std::nullopt;
  return I;
}

}  // namespace

Reduction reduce_first_order(const FirstIntegral& fi, const SampleBox& box) {
  if (zero_on(fi.A, box)) throw NotReducible("A vanishes identically");
  Expr slope = simplify(-fi.B / fi.A);
  auto accept = [&](const std::optional<Expr>& I, const char* method) -> std::optional<Reduction> {
    if (!I) return std::nullopt;
    Expr n = normalize_invariant(*I);
    if (is_invariant(n, slope, box)) return Reduction{n, method};
    if (is_invariant(*I, slope, box)) return Reduction{simplify(*I), method};
    return std::nullopt;
  };
  try {
    if (auto r = accept(separable(slope, box), "separable")) return *r;
  } catch (const Error&) {
  }
  try {
    if (zero_on(dx(fi.A) - dy(fi.B), box))
      if (auto r = accept(via_potential(Expr(1), fi, box), "exact")) return *r;
  } catch (const Error&) {
  }
  try {
    Expr m = collapse(tidy((dy(fi.B) - dx(fi.A)) / fi.A, box), "y", box);
    if (!depends_on(m, "y")) {
      Expr mu = simplify(exp(integrate(m, "x", box)));
      if (auto r = accept(via_potential(mu, fi, box), "integrating-factor-x")) return *r;
    }
  } catch (const Error&) {
  }
  try {
    Expr m = collapse(tidy((dx(fi.A) - dy(fi.B)) / fi.B, box), "x", box);
    if (!depends_on(m, "x")) {
      Expr mu = simplify(exp(integrate(m, "y", box)));
      if (auto r = accept(via_potential(mu, fi, box), "integrating-factor-y")) return *r;
    }
  } catch (const Error&) {
  }
  throw NotReducible("y' = " + expr::to_string(slope) +
                     " is neither separable, exact, nor integrable by a one-variable factor");
}

// ---------------------------------------------------------------------------
// transformation and solutions

SundmanTransform build_transform(const FirstIntegral& fi, const Expr& I, const PipelineOptions& options) {
  const SampleBox& box = options.box;
  std::optional<SundmanTransform> fallback;
  std::optional<SundmanTransform> chosen;
  for (Eta eta : options.eta_catalog) {
    SundmanTransform st;
    st.I = I;
    st.eta = eta;
    try {
      st.psi = simplify(apply_eta(eta, I, box));
      st.phi = simplify(dy(st.psi) / fi.A);
    } catch (const Error&) {
      continue;
    }
    if (!fallback) fallback = st;
    if (x_only(st.phi, box)) {
      st.phi = collapse(st.phi, "y", box);
      st.point_transformation = true;
      chosen = st;
      break;
    }
  }
  if (!chosen) {
    if (!fallback) throw DegenerateTransform("no eta in the catalog gives an evaluable transformation");
    chosen = fallback;
  }
  SundmanTransform& st = *chosen;
  if (zero_on(dy(st.psi) * st.phi, box)) throw DegenerateTransform("psi_y * phi vanishes identically");
  if (!zero_on(fi.B, box)) {
    try {
      st.phi_alt_agrees = is_identically_zero(dx(st.psi) / fi.B - st.phi, box);
    } catch (const Error&) {
    }
  }
  return st;
}

namespace {

std::string signed_join(const Expr& first, const Expr& second) {
  auto [c, rest] = split_coefficient(second);
  if (c.is_negative()) return expr::to_string(first) + " - " + expr::to_string(-second);
  return expr::to_string(first) + " + " + expr::to_string(second);
}

// product of the denominators appearing in psi
Expr common_denominator(const Expr& psi) {
  std::map<Expr, Rational, ExprLess> den;
  std::vector<Expr> terms = psi.is(Kind::Sum) ? std::vector<Expr>(psi.operands().begin(), psi.operands().end())
                                              : std::vector<Expr>{psi};
  for (const auto& t : terms) {
    std::vector<Expr> fs = t.is(Kind::Product) ? std::vector<Expr>(t.operands().begin(), t.operands().end())
                                               : std::vector<Expr>{t};
    for (const auto& f : fs) {
      if (!f.is(Kind::Power) || !f.exponent().is_number() || !f.exponent().number().is_negative()) continue;
      if (free_variables(f).empty()) continue;
      Rational e = -f.exponent().number();
      auto it = den.find(f.base());
      if (it == den.end() || it->second < e) den[f.base()] = e;
    }
  }
  std::vector<Expr> fs;
  for (const auto& [b, e] : den) fs.push_back(pow(b, Expr(e)));
  return mul(std::move(fs));
}

// drops variable-free factors (absorbed by relabelling the constants)
Expr drop_constant_factors(const Expr& e) {
  if (e.is(Kind::Product)) {
    std::vector<Expr> keep;
    for (const auto& f : e.operands())
      if (!free_variables(f).empty()) keep.push_back(f);
    return mul(std::move(keep));
  }
  if (e.is(Kind::Sum)) {
    auto [c, rest] = split_coefficient(e.operands()[0]);
    if (c.is_negative()) return simplify(-e);
  }
  return e;
}

}  // namespace

SolutionFamily general_solution(const SundmanTransform& st, const SampleBox& box) {
  SolutionFamily fam;
  IntegrationContext special = ctx_for(box);
  special.special_functions = true;
  Expr psi = close_special(st.psi, special).result;
  fam.psi = psi;
  if (!st.point_transformation) {
    Expr c1 = Expr::arbitrary("c1"), c2 = Expr::arbitrary("c2");
    fam.mu_implicit = true;
    fam.lhs = psi;
    fam.rhs = c1 + c2 * Expr::variable("mu");
    fam.degenerate_rhs = c1;
    fam.text = expr::to_string(psi) + " = " + signed_join(c1, c2 * Expr::variable("mu"));
    fam.degenerate_text = expr::to_string(psi) + " = c1";
    return fam;
  }
  Expr mu = close_special(antiderivative(st.phi, "x", special).result, special).result;
  fam.mu = mu;
  Expr d = common_denominator(psi);
  Expr n = simplify(psi * d);
  Expr dm = factor_common(simplify(d * mu));
  if (!free_variables(n).empty()) {
    Expr stripped = drop_constant_factors(n);
    n = stripped;
  }
  if (dm.is_number() && dm.number().is_negative()) dm = -dm;
  Expr C1 = Expr::arbitrary("C1"), C2 = Expr::arbitrary("C2");
  fam.lhs = n;
  fam.rhs = C1 * d + C2 * dm;
  fam.text = expr::to_string(n) + " = " + signed_join(C1 * d, C2 * dm);
  return fam;
}

std::vector<Expr> pde_system_residuals(const OdeQuad& ode, const FirstIntegral& fi, const AuxiliaryData& aux) {
  const auto& [F, F1, F2] = ode;
  Expr hx = dx(aux.h);
  return {simplify(dx(fi.A) - fi.A * hx), simplify(dy(fi.A) - fi.A * F2), simplify(dx(fi.B) - fi.A * F),
          simplify(dy(fi.B) - fi.A * (F1 - hx))};
}

}  // namespace sundman
