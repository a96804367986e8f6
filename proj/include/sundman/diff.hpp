#pragma once

#include <string_view>

#include "sundman/expr.hpp"

namespace sundman::expr {

/// Exact symbolic derivative d e / d var. Unevaluated integrals follow the
/// Leibniz rule in their own variable; differentiating one in any other
/// variable its integrand depends on throws CannotDifferentiate.
Expr differentiate(const Expr& e, std::string_view var);

/// Repeated differentiation.
Expr differentiate(const Expr& e, std::string_view var, int order);

}  // namespace sundman::expr
