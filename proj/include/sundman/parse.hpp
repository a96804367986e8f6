#pragma once

#include <ostream>
#include <set>
#include <string>
#include <string_view>

#include "sundman/expr.hpp"

namespace sundman::expr {

struct ParseOptions {
  /// Accept `y'` as a variable token (ODE right-hand-side contexts only).
  bool allow_prime = false;
  /// Extra identifiers read as arbitrary constants, beyond c, C, cN and CN.
  std::set<std::string> constants;
};

/// Parses the infix grammar
///
///   expr    := expr ('+'|'-') expr | expr ('*'|'/') expr | '-' expr
///            | expr '^' expr | primary
///   primary := number | name | name '(' expr ')' | 'int' '(' expr ',' name ')'
///            | '(' expr ')'
///
/// with precedence ^ (right-assoc) > unary - > * / > + -. Implicit
/// multiplication is rejected. `pi` and `e` are reserved constants.
Expr parse(std::string_view text, const ParseOptions& options = {});

/// Prints in the same grammar; parse(to_string(e)) == e for canonical e.
std::string to_string(const Expr& e);

std::ostream& operator<<(std::ostream& os, const Expr& e);

}  // namespace sundman::expr
