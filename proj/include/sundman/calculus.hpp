#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sundman/expr.hpp"
#include "sundman/identity.hpp"

namespace sundman {

struct IntegrationContext {
  SampleBox box;
  /// Allows the Gaussian exp(k v^2) -> erf/erfi closure. Off by default so
  /// that integrals such as int(exp(y^2/2), y) stay unevaluated until the
  /// solution stage asks for special functions explicitly.
  bool special_functions = false;
  int max_depth = 3;
};

struct Antiderivative {
  expr::Expr result;
  bool closed_form = true;
  std::vector<std::string> rules_applied;
};

/// Rule-based antiderivative with the integration constant fixed to zero.
/// Total: whatever does not close is wrapped in an unevaluated integral (with
/// constant factors pulled out) and closed_form is cleared. Every closed piece
/// is checked by differentiating it back on the context box.
Antiderivative antiderivative(const expr::Expr& integrand, const std::string& var,
                              const IntegrationContext& ctx = {});

/// Replaces unevaluated integrals that close once special functions are
/// allowed (e.g. int(exp(y^2/2), y) -> sqrt(pi/2) erfi(y/sqrt(2))).
Antiderivative close_special(const expr::Expr& e, const IntegrationContext& ctx);

/// Solves P_x = px, P_y = py (assumed compatible). Integrates the smaller
/// component first, falling back to the opposite order. Returns nullopt when neither
/// order closes or the result fails the numeric check.
std::optional<expr::Expr> potential(const expr::Expr& px, const expr::Expr& py, const IntegrationContext& ctx);

enum class QMethod { FZero, FPositiveConstant, FNegativeConstant, PolynomialCoefficient, Ansatz };
std::string to_string(QMethod m);

struct QSolution {
  expr::Expr q;
  expr::Expr f;
  QMethod method = QMethod::FZero;
};

/// One nonzero solution of q'' + f(x) q = 0 from a finite catalog. Throws
/// NoClosedFormQ when the catalog is exhausted.
QSolution solve_q_ode(const expr::Expr& f, const SampleBox& box);

}  // namespace sundman
