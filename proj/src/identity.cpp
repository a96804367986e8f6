#include "sundman/identity.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sundman/errors.hpp"
#include "sundman/simplify.hpp"

namespace sundman {

using expr::EvalPoint;
using expr::Expr;
using expr::Kind;

Interval SampleBox::interval(const std::string& var) const {
  auto it = intervals.find(var);
  return it == intervals.end() ? Interval{} : it->second;
}

std::vector<EvalPoint> SampleBox::draw(const std::vector<std::string>& vars) const {
  std::mt19937_64 rng(seed);
  int n = std::max(samples, 32);
  std::vector<EvalPoint> pts(static_cast<std::size_t>(n));
  for (auto& p : pts) {
    for (const auto& v : vars) {
      Interval iv = interval(v);
      // 53 random bits -> [0, 1); avoids distribution implementation drift
      double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      p.values[v] = iv.lo + u * (iv.hi - iv.lo);
      p.anchors[v] = iv.lo;  // int(., v) runs from the box's lower edge
    }
    for (const auto& [v, a] : anchors) p.anchors[v] = a;
  }
  return pts;
}

namespace {

std::vector<std::string> sample_vars(const Expr& e) {
  std::vector<std::string> vars;
  for (const auto& v : expr::free_variables(e)) vars.push_back(v);
  for (const auto& c : expr::arbitrary_constants(e)) vars.push_back(c);
  return vars;
}

// Size of the largest term that went into the value, for relative scaling.
double magnitude(const Expr& e, const EvalPoint& p) {
  switch (e.kind()) {
    case Kind::Sum: {
      double m = 0.0;
      for (const auto& t : e.operands()) m = std::max(m, magnitude(t, p));
      return m;
    }
    case Kind::Product: {
      double m = 1.0;
      for (const auto& f : e.operands()) m *= magnitude(f, p);
      return m;
    }
    default:
      return std::fabs(expr::evaluate(e, p));
  }
}

}  // namespace

ZeroTest test_zero(const Expr& e, const SampleBox& box) {
  ZeroTest r;
  if (e.is_zero()) {
    r.zero = true;
    return r;
  }
  auto pts = box.draw(sample_vars(e));
  r.zero = true;
  for (const auto& p : pts) {
    double v = 0.0;
    double mag = 0.0;
    try {
      v = expr::evaluate(e, p);
      mag = magnitude(e, p);
    } catch (const Error&) {
      ++r.singular;
      continue;
    }
    if (!std::isfinite(mag)) {
      ++r.singular;
      continue;
    }
    ++r.evaluated;
    double scaled = std::fabs(v) / (1.0 + mag);
    if (scaled > r.worst_scaled || r.evaluated == 1) {
      r.worst_scaled = std::max(r.worst_scaled, scaled);
      r.worst_point = p;
    }
    r.worst_residual = std::max(r.worst_residual, std::fabs(v));
    if (scaled > box.tol) r.zero = false;
  }
  if (r.singular * 10 > static_cast<int>(pts.size()) * 9)
    throw AllPointsSingular("expression is singular at " + std::to_string(r.singular) + " of " +
                            std::to_string(pts.size()) + " sample points");
  return r;
}

bool is_identically_zero(const Expr& e, const SampleBox& box) { return test_zero(e, box).zero; }

bool depends_only_on(const Expr& e, const std::vector<std::string>& vars, const SampleBox& box) {
  auto fv = expr::free_variables(e);
  std::vector<std::string> others;
  for (const auto& v : fv)
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) others.push_back(v);
  if (others.empty()) return true;
  auto all = sample_vars(e);
  auto pts = box.draw(all);
  SampleBox shifted = box;
  shifted.seed = box.seed ^ 0x9E3779B97F4A7C15ULL;
  auto alt = shifted.draw(others);
  int ok = 0, bad = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EvalPoint q = pts[i];
    for (const auto& v : others) q.values[v] = alt[i].values[v];
    try {
      double a = expr::evaluate(e, pts[i]);
      double b = expr::evaluate(e, q);
      if (std::fabs(a - b) > box.tol * (1.0 + std::max(std::fabs(a), std::fabs(b))) * 100.0) ++bad;
      ++ok;
    } catch (const Error&) {
    }
  }
  if (ok == 0) throw AllPointsSingular("dependence test failed at every sample point");
  return bad == 0;
}

std::optional<double> numeric_value(const Expr& e, const SampleBox& box) {
  EvalPoint p;
  p.anchors = box.anchors;
  try {
    double v = expr::evaluate(e, p);
    if (std::isfinite(v)) return v;
  } catch (const Error&) {
  }
  return std::nullopt;
}

namespace {

Expr close_number(const Expr& e, const SampleBox& box) {
  if (!expr::free_variables(e).empty() || !expr::arbitrary_constants(e).empty() || e.is_number()) return e;
  auto v = numeric_value(e, box);
  if (!v) return e;
  if (std::fabs(*v) < box.tol) return Expr(0);
  if (auto q = Rational::approximate(*v, 1000, 1e-12 * (1.0 + std::fabs(*v)))) return Expr(*q);
  return e;
}

}  // namespace

Expr collapse(const Expr& e, const std::string& var, const SampleBox& box) {
  if (!expr::depends_on(e, var)) return close_number(e, box);
  if (expr::contains_integral_in(e, var)) return e;
  std::vector<std::string> keep;
  for (const auto& v : expr::free_variables(e))
    if (v != var) keep.push_back(v);
  if (!depends_only_on(e, keep, box)) return e;
  Interval iv = box.interval(var);
  Rational anchor = Rational::approximate(iv.mid(), 10, 0.5 * (iv.hi - iv.lo)).value_or(Rational(1));
  Expr r = expr::simplify(expr::substitute(e, var, Expr(anchor)));
  return close_number(r, box);
}

Expr collapse_all(const Expr& e, const SampleBox& box) {
  Expr r = e;
  for (const auto& v : expr::free_variables(e)) r = collapse(r, v, box);
  return close_number(r, box);
}

}  // namespace sundman
