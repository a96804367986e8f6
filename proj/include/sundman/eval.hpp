#pragma once

#include <map>
#include <string>

#include "sundman/expr.hpp"

namespace sundman::expr {

/// Variable bindings for numeric evaluation. Arbitrary constants are looked
/// up in `values` too and default to 1 when unbound. `anchors` gives the lower
/// limit used for unevaluated integrals in each variable (0 when absent).
struct EvalPoint {
  std::map<std::string, double> values;
  std::map<std::string, double> anchors;

  EvalPoint& set(const std::string& name, double v) {
    values[name] = v;
    return *this;
  }
};

/// Evaluates `e` at `p`. Throws DomainError (log of a non-positive value,
/// division by ~0, fractional power of a negative value, unbound variable)
/// or NonFinite (overflow, poles of tan/cot, NaN).
double evaluate(const Expr& e, const EvalPoint& p);

/// Imaginary error function erfi(z) = 2/sqrt(pi) * int_0^z exp(t^2) dt.
double erfi(double z);

}  // namespace sundman::expr
