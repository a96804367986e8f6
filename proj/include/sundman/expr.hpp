#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sundman/rational.hpp"

namespace sundman::expr {

/// Node kinds in canonical-order rank: numbers, named constants, arbitrary
/// constants, variables, then compounds.
enum class Kind : std::uint8_t {
  Integer,
  Rational,
  NamedConstant,
  ArbitraryConstant,
  Variable,
  Function,
  Power,
  Product,
  Sum,
  Integral,
};

enum class Fn : std::uint8_t { Sin, Cos, Tan, Cot, Sinh, Cosh, Tanh, Exp, Ln, Sqrt, Erf, Erfi, Abs };

std::string_view fn_name(Fn fn);
std::optional<Fn> fn_from_name(std::string_view name);

struct Node;

/// Immutable, shared expression tree. Every Expr is canonical: it can only be
/// built through the constructors below, which flatten, fold numbers, collect
/// like terms and sort children.
class Expr {
 public:
  Expr();  // integer 0
  Expr(std::int64_t n);         // NOLINT(google-explicit-constructor)
  Expr(int n) : Expr(static_cast<std::int64_t>(n)) {}  // NOLINT(google-explicit-constructor)
  Expr(const Rational& r);      // NOLINT(google-explicit-constructor)

  static Expr variable(std::string name);
  static Expr arbitrary(std::string name);
  static Expr pi();
  static Expr euler();

  Kind kind() const noexcept;
  bool is_number() const noexcept;
  bool is_zero() const noexcept;
  bool is_one() const noexcept;
  bool is_minus_one() const noexcept;
  bool is(Kind k) const noexcept { return kind() == k; }
  bool is_fn(Fn f) const noexcept;

  /// Value of a number node; precondition is_number().
  const Rational& number() const;
  /// Name of a variable, constant, or the integration variable of an Integral.
  const std::string& name() const;
  Fn fn() const;
  std::span<const Expr> operands() const noexcept;

  const Expr& base() const { return operands()[0]; }
  const Expr& exponent() const { return operands()[1]; }
  const Expr& arg() const { return operands()[0]; }
  const Expr& integrand() const { return operands()[0]; }

  std::size_t hash() const noexcept;
  const Node* node() const noexcept { return node_.get(); }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;

  friend Expr make_node(Kind, Rational, Fn, std::string, std::vector<Expr>);
};

/// Total order used for canonical child ordering.
int compare(const Expr& a, const Expr& b);

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

struct ExprHash {
  std::size_t operator()(const Expr& e) const noexcept { return e.hash(); }
};

// Canonicalizing constructors.
Expr add(std::vector<Expr> terms);
Expr mul(std::vector<Expr> factors);
Expr pow(const Expr& base, const Expr& exponent);
Expr apply(Fn fn, const Expr& arg);
/// Unevaluated antiderivative of `integrand` in `var`. Throws
/// std::invalid_argument if the integrand already holds an integral in `var`.
Expr integral(const Expr& integrand, const std::string& var);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

inline Expr sin(const Expr& a) { return apply(Fn::Sin, a); }
inline Expr cos(const Expr& a) { return apply(Fn::Cos, a); }
inline Expr tan(const Expr& a) { return apply(Fn::Tan, a); }
inline Expr cot(const Expr& a) { return apply(Fn::Cot, a); }
inline Expr sinh(const Expr& a) { return apply(Fn::Sinh, a); }
inline Expr cosh(const Expr& a) { return apply(Fn::Cosh, a); }
inline Expr tanh(const Expr& a) { return apply(Fn::Tanh, a); }
inline Expr exp(const Expr& a) { return apply(Fn::Exp, a); }
inline Expr ln(const Expr& a) { return apply(Fn::Ln, a); }
inline Expr sqrt(const Expr& a) { return apply(Fn::Sqrt, a); }
inline Expr erf(const Expr& a) { return apply(Fn::Erf, a); }
inline Expr erfi(const Expr& a) { return apply(Fn::Erfi, a); }

// Structural queries.
bool depends_on(const Expr& e, std::string_view var);
bool contains_integral(const Expr& e);
bool contains_integral_in(const Expr& e, std::string_view var);
std::set<std::string> free_variables(const Expr& e);
std::set<std::string> arbitrary_constants(const Expr& e);
std::size_t node_count(const Expr& e);

/// Replaces every free occurrence of variable `var` (integrals in `var` are
/// evaluated at the substituted point only through their upper limit, so
/// substitution into an Integral in `var` throws std::invalid_argument).
Expr substitute(const Expr& e, std::string_view var, const Expr& value);

/// Re-runs the canonical constructor of `e`'s kind on new operands.
Expr rebuild(const Expr& e, std::vector<Expr> ops);

/// Rebuilds `e` bottom-up, applying `fn` to each node after its children were
/// rewritten.
Expr transform(const Expr& e, const std::function<Expr(const Expr&)>& fn);

/// Pre-order visit.
void visit(const Expr& e, const std::function<void(const Expr&)>& fn);

/// Splits a term into rational coefficient and the remaining factor (1 if none).
std::pair<Rational, Expr> split_coefficient(const Expr& term);

}  // namespace sundman::expr
