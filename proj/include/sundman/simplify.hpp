#pragma once

#include "sundman/expr.hpp"

namespace sundman::expr {

/// Distributes products over sums and multiplies out small positive integer
/// powers of sums. Gives up on a node (leaving it unexpanded) when the result
/// would exceed `max_terms` terms.
Expr expand(const Expr& e, std::size_t max_terms = 2000);

/// Fixed rewrite system, applied bottom-up until nothing changes:
///   - tan -> sin/cos, cot -> cos/sin, tanh -> sinh/cosh
///   - ln(exp u) -> u; exp(sum c_i ln w_i + r) -> prod w_i^c_i * exp(r)
///   - ln(c * prod f^k) -> ln c + sum k ln f for c > 0
///   - expansion (see expand)
///   - T sin^2 u + T cos^2 u -> T, T cosh^2 u - T sinh^2 u -> T
/// plus the canonical constructor rules (constant folding, like-term
/// collection, power laws on positive numeric bases). Idempotent.
Expr simplify(const Expr& e);

/// Pulls the factors shared by every term of a sum out in front:
/// b sin x + y sin x -> sin(x) (b + y). The result is not canonical under
/// simplify (which would distribute again); use it for presentation and
/// before taking reciprocals.
Expr factor_common(const Expr& e);

}  // namespace sundman::expr
