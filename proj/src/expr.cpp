#include "sundman/expr.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>

#include "sundman/errors.hpp"

namespace sundman::expr {

struct Node {
  Kind kind;
  Rational value;
  Fn fn;
  std::string name;
  std::vector<Expr> ops;
  std::size_t hash;
};

namespace {

constexpr std::array<std::string_view, 13> kFnNames = {"sin",  "cos",  "tan", "cot", "sinh", "cosh", "tanh",
                                                       "exp",  "ln",   "sqrt", "erf", "erfi", "abs"};

std::size_t mix(std::size_t h, std::size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

int kind_rank(Kind k) {
  switch (k) {
    case Kind::Integer:
    case Kind::Rational:
      return 0;
    default:
      return static_cast<int>(k) - 1;
  }
}

bool is_odd_fn(Fn f) {
  return f == Fn::Sin || f == Fn::Tan || f == Fn::Cot || f == Fn::Sinh || f == Fn::Tanh || f == Fn::Erf ||
         f == Fn::Erfi;
}

bool is_even_fn(Fn f) { return f == Fn::Cos || f == Fn::Cosh || f == Fn::Abs; }

bool has_negative_lead(const Expr& e) {
  if (e.is_number()) return e.number().is_negative();
  if (e.is(Kind::Product)) return e.operands()[0].is_number() && e.operands()[0].number().is_negative();
  return false;
}

}  // namespace

Expr make_node(Kind kind, Rational value, Fn fn, std::string name, std::vector<Expr> ops) {
  std::size_t h = std::hash<int>{}(static_cast<int>(kind));
  h = mix(h, std::hash<std::int64_t>{}(value.num()));
  h = mix(h, std::hash<std::int64_t>{}(value.den()));
  h = mix(h, std::hash<int>{}(static_cast<int>(fn)));
  h = mix(h, std::hash<std::string>{}(name));
  for (const auto& o : ops) h = mix(h, o.hash());
  return Expr(std::make_shared<const Node>(Node{kind, value, fn, std::move(name), std::move(ops), h}));
}

std::string_view fn_name(Fn fn) { return kFnNames[static_cast<std::size_t>(fn)]; }

std::optional<Fn> fn_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFnNames.size(); ++i)
    if (kFnNames[i] == name) return static_cast<Fn>(i);
  return std::nullopt;
}

Expr::Expr() : Expr(std::int64_t{0}) {}

Expr::Expr(std::int64_t n) : Expr(Rational(n)) {}

Expr::Expr(const Rational& r)
    : node_(make_node(r.is_integer() ? Kind::Integer : Kind::Rational, r, Fn::Sin, {}, {}).node_) {}

Expr Expr::variable(std::string name) { return make_node(Kind::Variable, {}, Fn::Sin, std::move(name), {}); }
Expr Expr::arbitrary(std::string name) {
  return make_node(Kind::ArbitraryConstant, {}, Fn::Sin, std::move(name), {});
}
Expr Expr::pi() {
  static const Expr p = make_node(Kind::NamedConstant, {}, Fn::Sin, "pi", {});
  return p;
}
Expr Expr::euler() {
  static const Expr e = make_node(Kind::NamedConstant, {}, Fn::Sin, "e", {});
  return e;
}

Kind Expr::kind() const noexcept { return node_->kind; }
bool Expr::is_number() const noexcept { return node_->kind == Kind::Integer || node_->kind == Kind::Rational; }
bool Expr::is_zero() const noexcept { return is_number() && node_->value.is_zero(); }
bool Expr::is_one() const noexcept { return is_number() && node_->value.is_one(); }
bool Expr::is_minus_one() const noexcept { return is_number() && node_->value == Rational(-1); }
bool Expr::is_fn(Fn f) const noexcept { return node_->kind == Kind::Function && node_->fn == f; }

const Rational& Expr::number() const {
  if (!is_number()) throw std::logic_error("Expr::number on non-number");
  return node_->value;
}
const std::string& Expr::name() const { return node_->name; }
Fn Expr::fn() const { return node_->fn; }
std::span<const Expr> Expr::operands() const noexcept { return node_->ops; }
std::size_t Expr::hash() const noexcept { return node_->hash; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

int compare(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return 0;
  int ra = kind_rank(a.kind()), rb = kind_rank(b.kind());
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (a.kind()) {
    case Kind::Integer:
    case Kind::Rational: {
      auto c = a.number() <=> b.number();
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case Kind::NamedConstant:
    case Kind::ArbitraryConstant:
    case Kind::Variable:
      return a.name() < b.name() ? -1 : (a.name() > b.name() ? 1 : 0);
    case Kind::Function:
      if (a.fn() != b.fn()) return a.fn() < b.fn() ? -1 : 1;
      return compare(a.arg(), b.arg());
    case Kind::Integral:
      if (a.name() != b.name()) return a.name() < b.name() ? -1 : 1;
      return compare(a.integrand(), b.integrand());
    default: {
      auto ao = a.operands(), bo = b.operands();
      // Compare from the last (most significant) child, as polynomial CASes do.
      std::size_t n = std::min(ao.size(), bo.size());
      for (std::size_t i = 0; i < n; ++i) {
        int c = compare(ao[ao.size() - 1 - i], bo[bo.size() - 1 - i]);
        if (c != 0) return c;
      }
      if (ao.size() != bo.size()) return ao.size() < bo.size() ? -1 : 1;
      return 0;
    }
  }
}

std::pair<Rational, Expr> split_coefficient(const Expr& term) {
  if (term.is_number()) return {term.number(), Expr(1)};
  if (term.is(Kind::Product) && term.operands()[0].is_number()) {
    auto ops = term.operands();
    if (ops.size() == 2) return {ops[0].number(), ops[1]};
    std::vector<Expr> rest(ops.begin() + 1, ops.end());
    return {ops[0].number(), make_node(Kind::Product, {}, Fn::Sin, {}, std::move(rest))};
  }
  return {Rational(1), term};
}

namespace {

Expr with_coefficient(const Rational& c, const Expr& rest) {
  if (c.is_zero()) return Expr(0);
  if (rest.is_one()) return Expr(c);
  if (c.is_one()) return rest;
  std::vector<Expr> ops{Expr(c)};
  if (rest.is(Kind::Product)) {
    ops.insert(ops.end(), rest.operands().begin(), rest.operands().end());
  } else {
    ops.push_back(rest);
  }
  return make_node(Kind::Product, {}, Fn::Sin, {}, std::move(ops));
}

}  // namespace

Expr add(std::vector<Expr> terms) {
  Rational constant(0);
  std::map<Expr, Rational, ExprLess> coeffs;
  std::vector<Expr> stack(std::move(terms));
  std::vector<Expr> flat;
  while (!stack.empty()) {
    Expr t = std::move(stack.back());
    stack.pop_back();
    if (t.is(Kind::Sum)) {
      stack.insert(stack.end(), t.operands().begin(), t.operands().end());
    } else {
      flat.push_back(std::move(t));
    }
  }
  for (const auto& t : flat) {
    if (t.is_number()) {
      constant += t.number();
      continue;
    }
    auto [c, rest] = split_coefficient(t);
    auto [it, inserted] = coeffs.try_emplace(rest, c);
    if (!inserted) it->second += c;
  }
  std::vector<Expr> out;
  if (!constant.is_zero()) out.emplace_back(constant);
  for (const auto& [rest, c] : coeffs) {
    if (c.is_zero()) continue;
    out.push_back(with_coefficient(c, rest));
  }
  if (out.empty()) return Expr(0);
  if (out.size() == 1) return out[0];
  std::sort(out.begin(), out.end(), ExprLess{});
  return make_node(Kind::Sum, {}, Fn::Sin, {}, std::move(out));
}

Expr mul(std::vector<Expr> factors) {
  Rational coef(1);
  std::map<Expr, std::vector<Expr>, ExprLess> bases;
  std::vector<Expr> exp_args;
  std::vector<Expr> stack(std::move(factors));
  while (!stack.empty()) {
    Expr f = std::move(stack.back());
    stack.pop_back();
    if (f.is(Kind::Product)) {
      stack.insert(stack.end(), f.operands().begin(), f.operands().end());
    } else if (f.is_number()) {
      coef *= f.number();
      if (coef.is_zero()) return Expr(0);
    } else if (f.is_fn(Fn::Exp)) {
      exp_args.push_back(f.arg());
    } else if (f.is(Kind::Power)) {
      bases[f.base()].push_back(f.exponent());
    } else {
      bases[f].push_back(Expr(1));
    }
  }
  std::vector<Expr> out;
  bool needs_recanon = false;
  auto absorb = [&](const Expr& p) {
    if (p.is_number()) {
      coef *= p.number();
    } else if (p.is(Kind::Product)) {
      needs_recanon = true;
      out.push_back(p);
    } else {
      out.push_back(p);
    }
  };
  for (auto& [b, exps] : bases) {
    Expr e = exps.size() == 1 ? exps[0] : add(std::move(exps));
    absorb(pow(b, e));
  }
  if (!exp_args.empty()) absorb(apply(Fn::Exp, add(std::move(exp_args))));
  if (coef.is_zero()) return Expr(0);
  if (needs_recanon) {
    out.emplace_back(coef);
    return mul(std::move(out));
  }
  if (out.empty()) return Expr(coef);
  std::sort(out.begin(), out.end(), ExprLess{});
  if (coef.is_one() && out.size() == 1) return out[0];
  if (!coef.is_one()) out.insert(out.begin(), Expr(coef));
  return make_node(Kind::Product, {}, Fn::Sin, {}, std::move(out));
}

namespace {

Expr power_node(const Expr& b, const Expr& e) { return make_node(Kind::Power, {}, Fn::Sin, {}, {b, e}); }

Expr numeric_power(const Rational& b, const Rational& e) {
  if (e.is_integer()) return Expr(Rational::pow(b, e.num()));
  if (b.is_negative()) return power_node(Expr(b), Expr(e));
  if (!b.is_integer()) return mul({numeric_power(Rational(b.num()), e), numeric_power(Rational(b.den()), -e)});
  std::int64_t n = b.num();
  if (n == 1) return Expr(1);
  if (auto r = exact_root(n, e.den())) return Expr(Rational::pow(Rational(*r), e.num()));
  std::int64_t k = e.floor();
  Rational frac = e - Rational(k);
  Expr p = power_node(Expr(b), Expr(frac));
  if (k == 0) return p;
  return make_node(Kind::Product, {}, Fn::Sin, {}, {Expr(Rational::pow(b, k)), p});
}

}  // namespace

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_zero()) return Expr(1);
  if (exponent.is_one()) return base;
  if (base.is_number()) {
    const Rational& b = base.number();
    if (b.is_one()) return Expr(1);
    if (b.is_zero()) {
      if (exponent.is_number() && exponent.number().is_negative()) throw DomainError("division by zero");
      if (exponent.is_number()) return Expr(0);
      return power_node(base, exponent);
    }
    if (exponent.is_number()) return numeric_power(b, exponent.number());
    return power_node(base, exponent);
  }
  if (base == Expr::euler()) return apply(Fn::Exp, exponent);
  if (base.is_fn(Fn::Exp)) return apply(Fn::Exp, mul({base.arg(), exponent}));
  if (base.is(Kind::Power)) {
    const bool int_exp = exponent.is_number() && exponent.number().is_integer();
    const bool positive_base = base.base().is_number() && !base.base().number().is_negative();
    if (int_exp || positive_base) return pow(base.base(), mul({base.exponent(), exponent}));
    return power_node(base, exponent);
  }
  if (base.is(Kind::Product) && exponent.is_number() && exponent.number().is_integer()) {
    std::vector<Expr> fs;
    for (const auto& f : base.operands()) fs.push_back(pow(f, exponent));
    return mul(std::move(fs));
  }
  return power_node(base, exponent);
}

Expr apply(Fn fn, const Expr& arg) {
  switch (fn) {
    case Fn::Sqrt:
      return pow(arg, Expr(Rational(1, 2)));
    case Fn::Exp:
      if (arg.is_zero()) return Expr(1);
      break;
    case Fn::Ln:
      if (arg.is_one()) return Expr(0);
      if (arg == Expr::euler()) return Expr(1);
      break;
    case Fn::Cos:
    case Fn::Cosh:
      if (arg.is_zero()) return Expr(1);
      break;
    case Fn::Abs:
      if (arg.is_number()) return Expr(arg.number().is_negative() ? -arg.number() : arg.number());
      break;
    case Fn::Cot:
      break;
    default:
      if (arg.is_zero()) return Expr(0);
      break;
  }
  if (has_negative_lead(arg)) {
    if (is_odd_fn(fn)) return mul({Expr(-1), apply(fn, mul({Expr(-1), arg}))});
    if (is_even_fn(fn)) return apply(fn, mul({Expr(-1), arg}));
  }
  return make_node(Kind::Function, {}, fn, {}, {arg});
}

Expr integral(const Expr& integrand, const std::string& var) {
  if (contains_integral_in(integrand, var))
    throw std::invalid_argument("nested unevaluated integral in the same variable '" + var + "'");
  return make_node(Kind::Integral, {}, Fn::Sin, var, {integrand});
}

Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return add({a, mul({Expr(-1), b})}); }
Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return mul({a, pow(b, Expr(-1))}); }
Expr operator-(const Expr& a) { return mul({Expr(-1), a}); }

void visit(const Expr& e, const std::function<void(const Expr&)>& fn) {
  fn(e);
  for (const auto& o : e.operands()) visit(o, fn);
}

bool depends_on(const Expr& e, std::string_view var) {
  if (e.is(Kind::Variable)) return e.name() == var;
  if (e.is(Kind::Integral) && e.name() == var) return true;
  for (const auto& o : e.operands())
    if (depends_on(o, var)) return true;
  return false;
}

bool contains_integral(const Expr& e) {
  if (e.is(Kind::Integral)) return true;
  for (const auto& o : e.operands())
    if (contains_integral(o)) return true;
  return false;
}

bool contains_integral_in(const Expr& e, std::string_view var) {
  if (e.is(Kind::Integral) && e.name() == var) return true;
  for (const auto& o : e.operands())
    if (contains_integral_in(o, var)) return true;
  return false;
}

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  visit(e, [&](const Expr& n) {
    if (n.is(Kind::Variable) || n.is(Kind::Integral)) out.insert(n.name());
  });
  return out;
}

std::set<std::string> arbitrary_constants(const Expr& e) {
  std::set<std::string> out;
  visit(e, [&](const Expr& n) {
    if (n.is(Kind::ArbitraryConstant)) out.insert(n.name());
  });
  return out;
}

std::size_t node_count(const Expr& e) {
  std::size_t n = 1;
  for (const auto& o : e.operands()) n += node_count(o);
  return n;
}

Expr rebuild(const Expr& e, std::vector<Expr> ops) {
  switch (e.kind()) {
    case Kind::Sum:
      return add(std::move(ops));
    case Kind::Product:
      return mul(std::move(ops));
    case Kind::Power:
      return pow(ops[0], ops[1]);
    case Kind::Function:
      return apply(e.fn(), ops[0]);
    case Kind::Integral:
      return integral(ops[0], e.name());
    default:
      return e;
  }
}

Expr transform(const Expr& e, const std::function<Expr(const Expr&)>& fn) {
  Expr rebuilt = e;
  if (!e.operands().empty()) {
    std::vector<Expr> ops;
    ops.reserve(e.operands().size());
    bool changed = false;
    for (const auto& o : e.operands()) {
      ops.push_back(transform(o, fn));
      if (!(ops.back().node() == o.node())) changed = true;
    }
    if (changed) rebuilt = rebuild(e, std::move(ops));
  }
  return fn(rebuilt);
}

Expr substitute(const Expr& e, std::string_view var, const Expr& value) {
  if (!depends_on(e, var)) return e;
  if (e.is(Kind::Variable)) return value;
  if (e.is(Kind::Integral) && e.name() == var)
    throw std::invalid_argument("cannot substitute into the integration variable of an unevaluated integral");
  std::vector<Expr> ops;
  ops.reserve(e.operands().size());
  for (const auto& o : e.operands()) ops.push_back(substitute(o, var, value));
  return rebuild(e, std::move(ops));
}

}  // namespace sundman::expr
