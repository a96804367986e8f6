#include "sundman/eval.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "sundman/errors.hpp"
#include "sundman/parse.hpp"

namespace sundman::expr {

namespace {

constexpr double kTiny = 1e-300;

double finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFinite(std::string("non-finite value in ") + what);
  return v;
}

bool pole(double denominator, double arg) {
  return std::fabs(denominator) < 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(arg));
}

double eval_fn(Fn fn, double u) {
  switch (fn) {
    case Fn::Sin: return std::sin(u);
    case Fn::Cos: return std::cos(u);
    case Fn::Tan: {
      double c = std::cos(u);
      if (pole(c, u)) throw NonFinite("tan evaluated at a pole");
      return std::sin(u) / c;
    }
    case Fn::Cot: {
      double s = std::sin(u);
      if (pole(s, u)) throw NonFinite("cot evaluated at a pole");
      return std::cos(u) / s;
    }
    case Fn::Sinh: return finite(std::sinh(u), "sinh");
    case Fn::Cosh: return finite(std::cosh(u), "cosh");
    case Fn::Tanh: return std::tanh(u);
    case Fn::Exp: return finite(std::exp(u), "exp");
    case Fn::Ln:
      if (!(u > 0.0)) throw DomainError("ln of a non-positive value");
      return std::log(u);
    case Fn::Sqrt:
      if (u < 0.0) throw DomainError("sqrt of a negative value");
      return std::sqrt(u);
    case Fn::Erf: return std::erf(u);
    case Fn::Erfi: return finite(erfi(u), "erfi");
    case Fn::Abs: return std::fabs(u);
  }
  return 0.0;
}

double eval(const Expr& e, const EvalPoint& p);

double eval_integral(const Expr& e, const EvalPoint& p) {
  const std::string& var = e.name();
  auto it = p.values.find(var);
  if (it == p.values.end()) throw DomainError("unbound variable '" + var + "'");
  double upper = it->second;
  auto at = p.anchors.find(var);
  double lower = at == p.anchors.end() ? 0.0 : at->second;
  if (upper == lower) return 0.0;
  EvalPoint inner = p;
  auto f = [&](double t) {
    inner.values[var] = t;
    return eval(e.integrand(), inner);
  };
  // the |K61 - G30| estimate stalls near 1e-12 on short ranges; on smooth
  // integrands a single panel is already at roundoff level
  double err = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lower, upper, 10, 1e-10, &err);
  return finite(v, "integral");
}

double eval_power(const Expr& e, const EvalPoint& p) {
  double b = eval(e.base(), p);
  const Expr& x = e.exponent();
  if (x.is_number() && x.number().is_integer()) {
    std::int64_t k = x.number().num();
    if (k < 0 && std::fabs(b) < kTiny) throw DomainError("division by zero");
    return finite(std::pow(b, static_cast<double>(k)), "power");
  }
  double xv = eval(x, p);
  if (b < 0.0) {
    if (std::nearbyint(xv) != xv) throw DomainError("fractional power of a negative value");
  }
  if (xv < 0.0 && std::fabs(b) < kTiny) throw DomainError("division by zero");
  return finite(std::pow(b, xv), "power");
}

double eval(const Expr& e, const EvalPoint& p) {
  switch (e.kind()) {
    case Kind::Integer:
    case Kind::Rational:
      return e.number().to_double();
    case Kind::NamedConstant:
      return e.name() == "pi" ? std::numbers::pi : std::numbers::e;
    case Kind::ArbitraryConstant: {
      auto it = p.values.find(e.name());
      return it == p.values.end() ? 1.0 : it->second;
    }
    case Kind::Variable: {
      auto it = p.values.find(e.name());
      if (it == p.values.end()) throw DomainError("unbound variable '" + e.name() + "'");
      return it->second;
    }
    case Kind::Sum: {
      double s = 0.0;
      for (const auto& t : e.operands()) s += eval(t, p);
      return finite(s, "sum");
    }
    case Kind::Product: {
      double s = 1.0;
      for (const auto& t : e.operands()) s *= eval(t, p);
      return finite(s, "product");
    }
    case Kind::Power:
      return eval_power(e, p);
    case Kind::Function:
      return eval_fn(e.fn(), eval(e.arg(), p));
    case Kind::Integral:
      return eval_integral(e, p);
  }
  return 0.0;
}

}  // namespace

double erfi(double z) {
  // Power series 2/sqrt(pi) * sum z^(2n+1) / (n! (2n+1)); every term has the
  // sign of z, so there is no cancellation.
  double z2 = z * z;
  double term = z;  // z^(2n+1)/n!
  double sum = z;
  for (int n = 1; n < 400; ++n) {
    term *= z2 / n;
    double add = term / (2.0 * n + 1.0);
    sum += add;
    if (std::fabs(add) <= 1e-17 * std::fabs(sum)) break;
  }
  return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

double evaluate(const Expr& e, const EvalPoint& p) { return eval(e, p); }

}  // namespace sundman::expr
