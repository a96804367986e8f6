#include "sundman/diff.hpp"

#include "sundman/errors.hpp"
#include "sundman/parse.hpp"

namespace sundman::expr {

namespace {

Expr half() { return Expr(Rational(1, 2)); }

Expr two_over_sqrt_pi() { return mul({Expr(2), pow(Expr::pi(), Expr(Rational(-1, 2)))}); }

Expr fn_derivative(Fn fn, const Expr& u) {
  switch (fn) {
    case Fn::Sin: return cos(u);
    case Fn::Cos: return -sin(u);
    case Fn::Tan: return Expr(1) + pow(tan(u), Expr(2));
    case Fn::Cot: return -(Expr(1) + pow(cot(u), Expr(2)));
    case Fn::Sinh: return cosh(u);
    case Fn::Cosh: return sinh(u);
    case Fn::Tanh: return Expr(1) - pow(tanh(u), Expr(2));
    case Fn::Exp: return exp(u);
    case Fn::Ln: return pow(u, Expr(-1));
    case Fn::Sqrt: return half() * pow(u, Expr(Rational(-1, 2)));
    case Fn::Erf: return two_over_sqrt_pi() * exp(-pow(u, Expr(2)));
    case Fn::Erfi: return two_over_sqrt_pi() * exp(pow(u, Expr(2)));
    case Fn::Abs: return apply(Fn::Abs, u) / u;
  }
  return Expr(0);
}

}  // namespace

Expr differentiate(const Expr& e, std::string_view var) {
  if (!depends_on(e, var)) return Expr(0);
  switch (e.kind()) {
    case Kind::Variable:
      return Expr(1);
    case Kind::Sum: {
      std::vector<Expr> terms;
      for (const auto& t : e.operands()) terms.push_back(differentiate(t, var));
      return add(std::move(terms));
    }
    case Kind::Product: {
      auto ops = e.operands();
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < ops.size(); ++i) {
        Expr d = differentiate(ops[i], var);
        if (d.is_zero()) continue;
        std::vector<Expr> fs(ops.begin(), ops.end());
        fs[i] = d;
        terms.push_back(mul(std::move(fs)));
      }
      return add(std::move(terms));
    }
    case Kind::Power: {
      const Expr& b = e.base();
      const Expr& x = e.exponent();
      if (!depends_on(x, var)) return mul({x, pow(b, x - Expr(1)), differentiate(b, var)});
      // b^x = exp(x ln b)
      return e * (differentiate(x, var) * ln(b) + x * differentiate(b, var) / b);
    }
    case Kind::Function:
      return fn_derivative(e.fn(), e.arg()) * differentiate(e.arg(), var);
    case Kind::Integral: {
      if (e.name() == var) return e.integrand();
      throw CannotDifferentiate("cannot differentiate " + to_string(e) + " with respect to " + std::string(var) +
                                " under the integral sign");
    }
    default:
      return Expr(0);
  }
}

Expr differentiate(const Expr& e, std::string_view var, int order) {
  Expr r = e;
  for (int i = 0; i < order; ++i) r = differentiate(r, var);
  return r;
}

}  // namespace sundman::expr
