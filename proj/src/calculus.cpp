#include "sundman/calculus.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <set>

#include "sundman/diff.hpp"
#include "sundman/errors.hpp"
#include "sundman/eval.hpp"
#include "sundman/parse.hpp"
#include "sundman/simplify.hpp"

namespace sundman {

using namespace expr;

namespace {

const std::string kU = "_u";

struct Lin {
  Expr a, b;
};

std::optional<Lin> linear_in(const Expr& arg, const std::string& v) {
  Expr a = simplify(differentiate(arg, v));
  if (a.is_zero() || depends_on(a, v)) return std::nullopt;
  Expr b = simplify(arg - a * Expr::variable(v));
  if (depends_on(b, v)) return std::nullopt;
  return Lin{a, b};
}

// Sign of `w` on the box, judged at the first sample point that evaluates.
int sign_on_box(const Expr& w, const SampleBox& box) {
  auto fv = free_variables(w);
  std::vector<std::string> vars(fv.begin(), fv.end());
  for (const auto& c : arbitrary_constants(w)) vars.push_back(c);
  for (const auto& p : box.draw(vars)) {
    try {
      double v = evaluate(w, p);
      if (v != 0.0) return v > 0 ? 1 : -1;
    } catch (const Error&) {
    }
  }
  return 1;
}

// ln w on the branch where it is real over the box.
Expr log_branch(const Expr& w, const SampleBox& box) { return sign_on_box(w, box) < 0 ? ln(-w) : ln(w); }

Expr fix_log_branches(const Expr& e, const SampleBox& box) {
  return transform(e, [&](const Expr& n) {
    if (n.is_fn(Fn::Ln) && !n.arg().is_number() && sign_on_box(n.arg(), box) < 0) return ln(-n.arg());
    return n;
  });
}

bool verified(const Expr& result, const Expr& integrand, const std::string& v, const SampleBox& box) {
  try {
    return is_identically_zero(differentiate(result, v) - integrand, box);
  } catch (const Error&) {
    return false;
  }
}

class Integrator {
 public:
  Integrator(const IntegrationContext& ctx, std::string var, std::vector<std::string>& rules)
      : ctx_(ctx), v_(std::move(var)), x_(Expr::variable(v_)), rules_(rules) {}

  std::optional<Expr> closed(const Expr& g, int depth) {
    if (!depends_on(g, v_)) {
      note("constant");
      return g * x_;
    }
    if (g.is(Kind::Sum)) {
      std::vector<Expr> parts;
      for (const auto& t : g.operands()) {
        auto r = closed(t, depth);
        if (!r) return rational(g);
        parts.push_back(*r);
      }
      note("linearity");
      return add(std::move(parts));
    }
    auto [c, rest] = split_constant(g);
    if (!c.is_one()) {
      auto r = closed(rest, depth);
      if (!r) return std::nullopt;
      return c * *r;
    }
    if (auto r = table(g)) return r;
    if (ctx_.special_functions) {
      if (auto r = gaussian(g)) return r;
    }
    if (auto r = rational(g)) return r;
    if (auto r = parts(g, depth)) return r;
    if (depth < ctx_.max_depth) {
      if (auto r = substitution(g, depth)) return r;
    }
    return std::nullopt;
  }

  // Factors of a product that do not involve the variable.
  std::pair<Expr, Expr> split_constant(const Expr& g) const {
    if (!g.is(Kind::Product)) return {Expr(1), g};
    std::vector<Expr> c, rest;
    for (const auto& f : g.operands()) (depends_on(f, v_) ? rest : c).push_back(f);
    return {mul(std::move(c)), mul(std::move(rest))};
  }

 private:
  void note(const std::string& rule) {
    if (std::find(rules_.begin(), rules_.end(), rule) == rules_.end()) rules_.push_back(rule);
  }

  std::optional<Expr> table(const Expr& g) {
    if (g == x_) {
      note("power");
      return pow(x_, Expr(2)) / Expr(2);
    }
    if (g.is(Kind::Power)) return table_power(g);
    if (g.is(Kind::Function)) return table_function(g);
    return std::nullopt;
  }

  std::optional<Expr> table_power(const Expr& g) {
    const Expr& b = g.base();
    const Expr& n = g.exponent();
    if (depends_on(n, v_)) {
      // c^(a v + b) for a positive numeric base
      if (depends_on(b, v_) || !b.is_number() || b.number().sign() <= 0) return std::nullopt;
      auto lin = linear_in(n, v_);
      if (!lin) return std::nullopt;
      note("exponential");
      return g / (lin->a * ln(b));
    }
    if (auto lin = linear_in(b, v_)) {
      note("power");
      if (n.is_minus_one()) return log_branch(b, ctx_.box) / lin->a;
      return pow(b, n + Expr(1)) / (lin->a * (n + Expr(1)));
    }
    if (!b.is(Kind::Function) || !n.is_number()) return std::nullopt;
    auto lin = linear_in(b.arg(), v_);
    if (!lin) return std::nullopt;
    const Expr& u = b.arg();
    const Rational& k = n.number();
    note("trig-power");
    if (k == Rational(-2)) {
      switch (b.fn()) {
        case Fn::Sin: return -(cos(u) / sin(u)) / lin->a;
        case Fn::Cos: return (sin(u) / cos(u)) / lin->a;
        case Fn::Sinh: return -(cosh(u) / sinh(u)) / lin->a;
        case Fn::Cosh: return (sinh(u) / cosh(u)) / lin->a;
        default: break;
      }
    }
    if (k == Rational(2)) {
      Expr two_u = Expr(2) * u;
      Expr quarter = Expr(Rational(1, 4)) / lin->a;
      Expr half_v = x_ / Expr(2);
      switch (b.fn()) {
        case Fn::Sin: return half_v - quarter * sin(two_u);
        case Fn::Cos: return half_v + quarter * sin(two_u);
        case Fn::Sinh: return quarter * sinh(two_u) - half_v;
        case Fn::Cosh: return quarter * sinh(two_u) + half_v;
        default: break;
      }
    }
    return std::nullopt;
  }

  std::optional<Expr> table_function(const Expr& g) {
    const Expr& u = g.arg();
    auto lin = linear_in(u, v_);
    if (!lin) return std::nullopt;
    const Expr& a = lin->a;
    note("elementary");
    switch (g.fn()) {
      case Fn::Sin: return -cos(u) / a;
      case Fn::Cos: return sin(u) / a;
      case Fn::Sinh: return cosh(u) / a;
      case Fn::Cosh: return sinh(u) / a;
      case Fn::Exp: return exp(u) / a;
      case Fn::Tan: return -log_branch(cos(u), ctx_.box) / a;
      case Fn::Cot: return log_branch(sin(u), ctx_.box) / a;
      case Fn::Tanh: return ln(cosh(u)) / a;
      case Fn::Ln: return (u * ln(u) - u) / a;
      default: return std::nullopt;
    }
  }

  // exp(k v^2 + c) with k a nonzero rational.
  std::optional<Expr> gaussian(const Expr& g) {
    if (!g.is_fn(Fn::Exp)) return std::nullopt;
    Expr arg = g.arg();
    Expr k = simplify(differentiate(arg, v_, 2) / Expr(2));
    if (!k.is_number() || k.is_zero()) return std::nullopt;
    Expr rest = simplify(arg - k * pow(x_, Expr(2)));
    if (depends_on(rest, v_)) return std::nullopt;
    Rational kk = k.number();
    Expr s = pow(Expr(kk.is_negative() ? -kk : kk), Expr(Rational(1, 2)));
    Expr pref = exp(rest) * pow(Expr::pi(), Expr(Rational(1, 2))) / (Expr(2) * s);
    note(kk.is_negative() ? "gaussian-erf" : "gaussian-erfi");
    return pref * (kk.is_negative() ? erf(s * x_) : erfi(s * x_));
  }

 public:
  // Rational functions of v over Q whose denominator factors have degree <= 2,
  // by partial fractions. Arctangent pieces are not representable; such
  // integrands are left to the other rules.
  std::optional<Expr> rational(const Expr& g) {
    if (auto r = rational_factored(g)) return r;
    return rational_together(g);
  }

 private:
  std::optional<Expr> rational_factored(const Expr& g) {
    std::vector<Expr> terms = g.is(Kind::Sum) ? std::vector<Expr>(g.operands().begin(), g.operands().end())
                                              : std::vector<Expr>{g};
    struct Fraction {
      UPoly num;
      std::vector<std::pair<UPoly, int>> den;
    };
    std::vector<Fraction> parts;
    bool has_sum_den = false;
    try {
      for (const auto& t : terms) {
        std::vector<Expr> fs = t.is(Kind::Product) ? std::vector<Expr>(t.operands().begin(), t.operands().end())
                                                   : std::vector<Expr>{t};
        Fraction fr{UPoly{Rational(1)}, {}};
        Rational lead(1);
        for (const auto& f : fs) {
          bool neg = f.is(Kind::Power) && f.exponent().is(Kind::Integer) && f.exponent().number().is_negative();
          if (!neg) {
            auto p = to_upoly(expand(f));
            if (!p) return std::nullopt;
            fr.num = mul_poly(fr.num, *p);
            continue;
          }
          auto p = to_upoly(expand(f.base()));
          if (!p || degree(*p) < 1) return std::nullopt;
          auto k = static_cast<int>(-f.exponent().number().num());
          if (k > 6) return std::nullopt;
          has_sum_den = has_sum_den || f.base().is(Kind::Sum);
          Rational lc = p->back();
          lead = lead / Rational::pow(lc, k);
          for (auto& c : *p) c = c / lc;
          for (auto& q : split_quadratic(*p)) add_factor(fr.den, q, k);
        }
        for (auto& c : fr.num) c = c * lead;
        parts.push_back(std::move(fr));
      }
      if (!has_sum_den) return std::nullopt;
      // common denominator: every factor at its largest multiplicity
      std::vector<std::pair<UPoly, int>> den;
      for (const auto& fr : parts)
        for (const auto& [q, k] : fr.den) {
          auto it = std::find_if(den.begin(), den.end(), [&](const auto& e) { return e.first == q; });
          if (it == den.end()) den.emplace_back(q, k);
          else it->second = std::max(it->second, k);
        }
      for (const auto& [q, k] : den)
        if (degree(q) > 2) return std::nullopt;
      UPoly num{Rational(0)};
      for (const auto& fr : parts) {
        UPoly term = fr.num;
        for (const auto& [q, k] : den) {
          int have = 0;
          for (const auto& [q2, k2] : fr.den)
            if (q2 == q) have = k2;
          term = mul_poly(term, pow_poly(q, k - have));
        }
        if (num.size() < term.size()) num.resize(term.size(), Rational(0));
        for (std::size_t i = 0; i < term.size(); ++i) num[i] = num[i] + term[i];
      }
      trim(num);
      return partial_fractions(num, den);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  // Fallback for nested quotients: bring g to N/D, then factor D by its
  // rational roots. A leftover of degree 2, or the square of a quadratic,
  // is accepted as is.
  std::optional<Expr> rational_together(const Expr& g) {
    try {
      auto nd = to_ratfunc(g, 0);
      if (!nd || degree(nd->second) < 1) return std::nullopt;
      auto den = factor_rational_roots(nd->second);
      if (!den) return std::nullopt;
      Rational lc = nd->second.back();
      for (auto& c : nd->first) c = c / lc;
      return partial_fractions(nd->first, *den);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

 private:
  using UPoly = std::vector<Rational>;  // coefficients, lowest degree first

  static int degree(const UPoly& p) { return static_cast<int>(p.size()) - 1; }

  static void trim(UPoly& p) {
    while (p.size() > 1 && p.back().is_zero()) p.pop_back();
  }

  static UPoly mul_poly(const UPoly& a, const UPoly& b) {
    UPoly r(a.size() + b.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    trim(r);
    return r;
  }

  static UPoly pow_poly(const UPoly& a, int k) {
    UPoly r{Rational(1)};
    for (int i = 0; i < k; ++i) r = mul_poly(r, a);
    return r;
  }

  // polynomial in v with rational coefficients, or nullopt
  std::optional<UPoly> to_upoly(const Expr& e) const {
    std::vector<Expr> terms = e.is(Kind::Sum) ? std::vector<Expr>(e.operands().begin(), e.operands().end())
                                              : std::vector<Expr>{e};
    UPoly p{Rational(0)};
    for (const auto& t : terms) {
      auto [c, rest] = split_coefficient(t);
      std::int64_t k = 0;
      if (rest == x_) k = 1;
      else if (rest.is(Kind::Power) && rest.base() == x_ && rest.exponent().is(Kind::Integer))
        k = rest.exponent().number().num();
      else if (!rest.is_one())
        return std::nullopt;
      if (k < 0 || k > 12) return std::nullopt;
      if (p.size() <= static_cast<std::size_t>(k)) p.resize(static_cast<std::size_t>(k) + 1, Rational(0));
      p[static_cast<std::size_t>(k)] += c;
    }
    trim(p);
    return p;
  }

  // monic quadratics with a rational root split into linear factors
  static std::vector<UPoly> split_quadratic(const UPoly& p) {
    if (degree(p) != 2) return {p};
    Rational b = p[1], c = p[0];
    Rational disc = b * b - Rational(4) * c;
    if (disc.is_negative()) return {p};
    auto rn = exact_root(disc.num(), 2), rd = exact_root(disc.den(), 2);
    if (!rn || !rd) return {p};
    Rational r = Rational(*rn, *rd);
    Rational half(1, 2);
    // x^2 + bx + c = (x - r1)(x - r2)
    Rational r1 = (-b + r) * half, r2 = (-b - r) * half;
    return {UPoly{-r1, Rational(1)}, UPoly{-r2, Rational(1)}};
  }

  static void add_factor(std::vector<std::pair<UPoly, int>>& den, const UPoly& q, int k) {
    for (auto& [f, m] : den)
      if (f == q) {
        m += k;
        return;
      }
    den.emplace_back(q, k);
  }

  static std::pair<UPoly, UPoly> divmod_poly(UPoly a, const UPoly& b) {
    const int n = degree(b);
    if (degree(a) < n) return {UPoly{Rational(0)}, a};
    UPoly q(static_cast<std::size_t>(degree(a) - n + 1), Rational(0));
    for (int i = degree(a); i >= n; --i) {
      Rational c = a[static_cast<std::size_t>(i)] / b.back();
      q[static_cast<std::size_t>(i - n)] = c;
      for (int j = 0; j <= n; ++j) {
        auto& slot = a[static_cast<std::size_t>(i - n + j)];
        slot = slot - c * b[static_cast<std::size_t>(j)];
      }
    }
    a.resize(static_cast<std::size_t>(std::max(n, 1)));
    trim(a);
    return {q, a};
  }

  static bool is_zero_poly(const UPoly& p) { return p.size() == 1 && p[0].is_zero(); }

  static UPoly monic(UPoly p) {
    Rational lc = p.back();
    for (auto& c : p) c = c / lc;
    return p;
  }

  static UPoly gcd_poly(UPoly a, UPoly b) {
    while (!is_zero_poly(b)) {
      UPoly r = divmod_poly(a, b).second;
      a = std::move(b);
      b = std::move(r);
    }
    return monic(a);
  }

  static UPoly add_poly(UPoly a, const UPoly& b) {
    if (a.size() < b.size()) a.resize(b.size(), Rational(0));
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    trim(a);
    return a;
  }

  using RatFunc = std::pair<UPoly, UPoly>;

  static RatFunc reduce(RatFunc f) {
    UPoly g = gcd_poly(f.first, f.second);
    if (degree(g) > 0) {
      f.first = divmod_poly(f.first, g).first;
      f.second = divmod_poly(f.second, g).first;
    }
    return f;
  }

  // univariate rational function over Q, reduced
  std::optional<RatFunc> to_ratfunc(const Expr& e, int depth) const {
    if (depth > 12) return std::nullopt;
    if (e.is_number()) {
      return RatFunc{UPoly{e.number()}, UPoly{Rational(1)}};
    }
    if (e == x_) return RatFunc{UPoly{Rational(0), Rational(1)}, UPoly{Rational(1)}};
    if (e.is(Kind::Sum) || e.is(Kind::Product)) {
      const bool sum = e.is(Kind::Sum);
      RatFunc acc{UPoly{Rational(sum ? 0 : 1)}, UPoly{Rational(1)}};
      for (const auto& t : e.operands()) {
        auto r = to_ratfunc(t, depth + 1);
        if (!r) return std::nullopt;
        if (sum)
          acc = {add_poly(mul_poly(acc.first, r->second), mul_poly(r->first, acc.second)),
                 mul_poly(acc.second, r->second)};
        else
          acc = {mul_poly(acc.first, r->first), mul_poly(acc.second, r->second)};
        acc = reduce(acc);
        if (degree(acc.first) > 16 || degree(acc.second) > 16) return std::nullopt;
      }
      return acc;
    }
    if (e.is(Kind::Power) && e.exponent().is(Kind::Integer)) {
      auto k = e.exponent().number().num();
      if (k == 0 || k > 8 || k < -8) return std::nullopt;
      auto b = to_ratfunc(e.base(), depth + 1);
      if (!b) return std::nullopt;
      if (k < 0) {
        if (is_zero_poly(b->first)) return std::nullopt;
        std::swap(b->first, b->second);
        k = -k;
      }
      RatFunc r{pow_poly(b->first, static_cast<int>(k)), pow_poly(b->second, static_cast<int>(k))};
      if (degree(r.first) > 16 || degree(r.second) > 16) return std::nullopt;
      return r;
    }
    return std::nullopt;
  }

  static std::vector<std::int64_t> divisors(std::int64_t n) {
    n = n < 0 ? -n : n;
    std::vector<std::int64_t> out;
    if (n == 0 || n > 1000000) return out;
    for (std::int64_t d = 1; d * d <= n; ++d)
      if (n % d == 0) {
        out.push_back(d);
        if (d * d != n) out.push_back(n / d);
      }
    return out;
  }

  static Rational eval_poly(const UPoly& p, const Rational& v) {
    Rational acc(0);
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * v + *it;
    return acc;
  }

  // monic factors with multiplicity; nullopt if an irreducible piece of
  // degree > 2 remains
  static std::optional<std::vector<std::pair<UPoly, int>>> factor_rational_roots(UPoly p) {
    p = monic(p);
    std::vector<std::pair<UPoly, int>> out;
    while (degree(p) > 0 && p[0].is_zero()) {
      p.erase(p.begin());
      add_factor(out, UPoly{Rational(0), Rational(1)}, 1);
    }
    // integer coefficients for the rational root test
    std::int64_t scale = 1;
    for (const auto& c : p) scale = std::lcm(scale, c.den());
    const std::int64_t a0 = (p[0] * Rational(scale)).num(), an = scale;
    for (auto num : divisors(a0))
      for (auto den : divisors(an))
        for (int sgn : {1, -1}) {
          Rational r(sgn * num, den);
          while (degree(p) > 0 && eval_poly(p, r).is_zero()) {
            UPoly lin{-r, Rational(1)};
            p = divmod_poly(p, lin).first;
            add_factor(out, lin, 1);
          }
        }
    if (degree(p) <= 0) return out;
    if (degree(p) == 2) {
      add_factor(out, p, 1);
      return out;
    }
    if (degree(p) == 4) {
      // (v^2 + b v + c)^2 = v^4 + 2b v^3 + (b^2 + 2c) v^2 + ...
      Rational b = p[3] / Rational(2);
      Rational c = (p[2] - b * b) / Rational(2);
      UPoly q{c, b, Rational(1)};
      if (mul_poly(q, q) == p) {
        add_factor(out, q, 2);
        return out;
      }
    }
    return std::nullopt;
  }

  Expr poly_expr(const UPoly& p) const {
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (!p[i].is_zero()) terms.push_back(Expr(p[i]) * pow(x_, Expr(static_cast<std::int64_t>(i))));
    return add(std::move(terms));
  }

  std::optional<Expr> partial_fractions(UPoly num, const std::vector<std::pair<UPoly, int>>& den) {
    UPoly D{Rational(1)};
    for (const auto& [f, k] : den) D = mul_poly(D, pow_poly(f, k));
    const int n = degree(D);
    // polynomial part by long division
    UPoly quot(1, Rational(0));
    if (degree(num) >= n) {
      quot.assign(static_cast<std::size_t>(degree(num) - n + 1), Rational(0));
      for (int i = degree(num); i >= n; --i) {
        Rational c = num[static_cast<std::size_t>(i)];
        quot[static_cast<std::size_t>(i - n)] = c;
        for (int j = 0; j <= n; ++j) { auto& slot = num[static_cast<std::size_t>(i - n + j)]; slot = slot - c * D[static_cast<std::size_t>(j)]; }
      }
      num.resize(static_cast<std::size_t>(n));
      trim(num);
    }
    // unknowns: a_j (linear) or a_j v + b_j (quadratic) over f^j
    struct Unknown {
      std::size_t factor;
      int power;
      bool times_v;
    };
    std::vector<Unknown> unknowns;
    std::vector<UPoly> columns;
    for (std::size_t i = 0; i < den.size(); ++i) {
      const auto& [f, k] = den[i];
      UPoly others{Rational(1)};
      for (std::size_t j = 0; j < den.size(); ++j)
        if (j != i) others = mul_poly(others, pow_poly(den[j].first, den[j].second));
      for (int j = 1; j <= k; ++j) {
        UPoly base = mul_poly(others, pow_poly(f, k - j));
        unknowns.push_back({i, j, false});
        columns.push_back(base);
        if (degree(f) == 2) {
          unknowns.push_back({i, j, true});
          columns.push_back(mul_poly(base, UPoly{Rational(0), Rational(1)}));
        }
      }
    }
    const auto m = unknowns.size();
    if (static_cast<int>(m) != n) return std::nullopt;
    std::vector<std::vector<Rational>> A(m, std::vector<Rational>(m + 1, Rational(0)));
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) A[r][c] = r < columns[c].size() ? columns[c][r] : Rational(0);
      A[r][m] = r < num.size() ? num[r] : Rational(0);
    }
    for (std::size_t c = 0; c < m; ++c) {
      std::size_t piv = c;
      while (piv < m && A[piv][c].is_zero()) ++piv;
      if (piv == m) return std::nullopt;
      std::swap(A[piv], A[c]);
      for (std::size_t r = 0; r < m; ++r) {
        if (r == c || A[r][c].is_zero()) continue;
        Rational f = A[r][c] / A[c][c];
        for (std::size_t k = c; k <= m; ++k) A[r][k] = A[r][k] - f * A[c][k];
      }
    }
    std::vector<Expr> out;
    if (degree(quot) >= 0) {
      UPoly integ(quot.size() + 1, Rational(0));
      for (std::size_t i = 0; i < quot.size(); ++i) integ[i + 1] = quot[i] / Rational(static_cast<std::int64_t>(i + 1));
      out.push_back(poly_expr(integ));
    }
    for (std::size_t u = 0; u < m; ++u) {
      Rational coef = A[u][m] / A[u][u];
      if (coef.is_zero()) continue;
      const auto& [f, k] = den[unknowns[u].factor];
      const int j = unknowns[u].power;
      Expr fe = poly_expr(f);
      if (degree(f) == 1) {
        // c / (v + r)^j
        out.push_back(Expr(coef) * (j == 1 ? log_branch(fe, ctx_.box)
                                           : pow(fe, Expr(1 - j)) / Expr(1 - j)));
        continue;
      }
      // quadratic f = v^2 + p v + q: a v = (a/2)(2v + p) - a p / 2
      Rational p1 = f[1];
      if (unknowns[u].times_v) {
        out.push_back(Expr(coef / Rational(2)) *
                      (j == 1 ? ln(fe) : pow(fe, Expr(1 - j)) / Expr(1 - j)));
        Rational rest = -coef * p1 / Rational(2);
        // folds into the constant numerator of the same power
        for (std::size_t w = 0; w < m; ++w)
          if (unknowns[w].factor == unknowns[u].factor && unknowns[w].power == j && !unknowns[w].times_v)
            A[w][m] += rest * A[w][w];
      }
    }
    // constant numerators over irreducible quadratics need an arctangent
    for (std::size_t u = 0; u < m; ++u)
      if (degree(den[unknowns[u].factor].first) == 2 && !unknowns[u].times_v && !A[u][m].is_zero())
        return std::nullopt;
    note("partial-fractions");
    return add(std::move(out));
  }

  // v^n * h(v) with a table antiderivative H: v^n H - int n v^(n-1) H.
  std::optional<Expr> parts(const Expr& g, int depth) {
    if (!g.is(Kind::Product) || depth >= ctx_.max_depth) return std::nullopt;
    auto ops = g.operands();
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const Expr& f = ops[i];
      std::int64_t n = 0;
      if (f == x_) n = 1;
      else if (f.is(Kind::Power) && f.base() == x_ && f.exponent().is(Kind::Integer)) n = f.exponent().number().num();
      if (n < 1 || n > 4) continue;
      std::vector<Expr> others(ops.begin(), ops.end());
      others.erase(others.begin() + static_cast<std::ptrdiff_t>(i));
      Expr h = mul(std::move(others));
      auto big_h = table(h);
      if (!big_h) continue;
      auto rest = closed(simplify(Expr(n) * pow(x_, Expr(n - 1)) * *big_h), depth + 1);
      if (!rest) continue;
      note("parts");
      return f * *big_h - *rest;
    }
    return std::nullopt;
  }

  // g = c f'/f with c free of the variable (checked numerically) -> c ln f.
  std::optional<Expr> log_derivative(const Expr& g, const Expr& f, const Expr& r) {
    try {
      Expr c = simplify(r * f);
      if (depends_on(c, v_)) {
        std::vector<std::string> keep;
        for (const auto& w : free_variables(c))
          if (w != v_) keep.push_back(w);
        if (!depends_only_on(c, keep, ctx_.box)) return std::nullopt;
        c = collapse(c, v_, ctx_.box);
        if (depends_on(c, v_)) return std::nullopt;
      }
      Expr cand = simplify(c * log_branch(f, ctx_.box));
      if (verified(cand, g, v_, ctx_.box)) return cand;
    } catch (const Error&) {
    }
    return std::nullopt;
  }

  // Derivative-divides: g = r(f) * f' for some subexpression f.
  std::optional<Expr> substitution(const Expr& g, int depth) {
    std::set<Expr, ExprLess> pool;
    visit(g, [&](const Expr& n) {
      if (n.is_number() || n == x_ || !depends_on(n, v_)) return;
      if (n.is(Kind::Integral) && n.name() != v_) return;
      if (n == g) return;
      pool.insert(n);
      if (n.is(Kind::Function)) {
        const Expr& u = n.arg();
        for (Fn fn : {Fn::Sin, Fn::Cos, Fn::Sinh, Fn::Cosh, Fn::Exp, Fn::Ln}) pool.insert(apply(fn, u));
        // ratios catch d ln(tan u) = du / (sin u cos u) and friends
        pool.insert(sin(u) / cos(u));
        pool.insert(sinh(u) / cosh(u));
        if (!(u == x_)) pool.insert(u);
      }
    });
    std::vector<Expr> cands(pool.begin(), pool.end());
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Expr& a, const Expr& b) { return node_count(a) > node_count(b); });
    if (cands.size() > 40) cands.resize(40);
    Expr u = Expr::variable(kU);
    for (const auto& f : cands) {
      Expr fp = simplify(differentiate(f, v_));
      if (fp.is_zero()) continue;
      Expr r;
      try {
        r = simplify(g / fp);
      } catch (const Error&) {
        continue;
      }
      if (auto lg = log_derivative(g, f, r)) {
        note("log-derivative");
        return lg;
      }
      Expr ru = simplify(transform(r, [&](const Expr& n) { return n == f ? u : n; }));
      if (depends_on(ru, v_)) {
        try {
          std::vector<std::string> keep;
          for (const auto& w : free_variables(ru))
            if (w != v_) keep.push_back(w);
          if (!depends_only_on(ru, keep, ctx_.box)) continue;
          ru = collapse(ru, v_, ctx_.box);
        } catch (const Error&) {
          continue;
        }
        if (depends_on(ru, v_)) continue;
      }
      std::vector<std::string> sub_rules;
      Integrator inner(ctx_, kU, sub_rules);
      auto ru_int = inner.closed(ru, depth + 1);
      if (!ru_int) continue;
      Expr cand = simplify(fix_log_branches(substitute(*ru_int, kU, f), ctx_.box));
      if (!verified(cand, g, v_, ctx_.box)) continue;
      note("substitution");
      return cand;
    }
    return std::nullopt;
  }

  const IntegrationContext& ctx_;
  std::string v_;
  Expr x_;
  std::vector<std::string>& rules_;
};

}  // namespace

Antiderivative antiderivative(const Expr& integrand, const std::string& var, const IntegrationContext& ctx) {
  Antiderivative out;
  Expr g = simplify(integrand);
  if (g.is_zero()) {
    out.result = Expr(0);
    out.rules_applied.push_back("zero");
    return out;
  }
  std::vector<Expr> terms = g.is(Kind::Sum) ? std::vector<Expr>(g.operands().begin(), g.operands().end())
                                            : std::vector<Expr>{g};
  std::vector<Expr> done;
  std::vector<Expr> open;
  Integrator integ(ctx, var, out.rules_applied);
  for (const auto& t : terms) {
    std::optional<Expr> r;
    try {
      r = integ.closed(t, 0);
    } catch (const Error&) {
      r.reset();
    }
    if (r && depends_on(t, var) && !verified(*r, t, var, ctx.box)) r.reset();
    if (r) {
      done.push_back(*r);
    } else {
      open.push_back(t);
    }
  }
  if (open.size() > 1) {
    // pieces that need an arctangent alone may cancel it together
    Expr rest = add(open);
    std::optional<Expr> r;
    try {
      r = integ.rational(rest);
    } catch (const Error&) {
      r.reset();
    }
    if (r && verified(*r, rest, var, ctx.box)) {
      done.push_back(*r);
      open.clear();
    }
  }
  if (!open.empty()) {
    out.closed_form = false;
    out.rules_applied.push_back("unevaluated");
    Expr rest = add(open);
    auto [c, core] = integ.split_constant(rest);
    if (contains_integral_in(core, var))
      throw std::invalid_argument("nested integral in " + var + " cannot be represented");
    done.push_back(c * integral(core, var));
  }
  out.result = simplify(add(std::move(done)));
  out.closed_form = out.closed_form && !contains_integral(out.result);
  return out;
}

Antiderivative close_special(const Expr& e, const IntegrationContext& ctx) {
  IntegrationContext special = ctx;
  special.special_functions = true;
  Antiderivative out;
  out.result = transform(e, [&](const Expr& n) {
    if (!n.is(Kind::Integral)) return n;
    auto r = antiderivative(n.integrand(), n.name(), special);
    for (const auto& rule : r.rules_applied)
      if (std::find(out.rules_applied.begin(), out.rules_applied.end(), rule) == out.rules_applied.end())
        out.rules_applied.push_back(rule);
    if (!r.closed_form) return n;
    return r.result;
  });
  out.result = simplify(out.result);
  out.closed_form = !contains_integral(out.result);
  return out;
}

namespace {

std::optional<Expr> potential_order(const Expr& p1, const Expr& p2, const std::string& v1, const std::string& v2,
                                    const IntegrationContext& ctx) {
  try {
    auto a0 = antiderivative(p1, v1, ctx);
    Expr rem = simplify(p2 - differentiate(a0.result, v2));
    rem = collapse(rem, v1, ctx.box);
    if (depends_on(rem, v1)) return std::nullopt;
    if (!rem.is_zero() && is_identically_zero(rem, ctx.box)) rem = Expr(0);
    auto a1 = antiderivative(rem, v2, ctx);
    return simplify(a0.result + a1.result);
  } catch (const Error&) {
    return std::nullopt;
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

bool potential_ok(const Expr& p, const Expr& px, const Expr& py, const SampleBox& box) {
  try {
    return is_identically_zero(differentiate(p, "x") - px, box) && is_identically_zero(differentiate(p, "y") - py, box);
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

std::optional<Expr> potential(const Expr& px, const Expr& py, const IntegrationContext& ctx) {
  std::optional<Expr> open_candidate;
  // the smaller component first: bulky integrands make the substitution search slow
  const int first = node_count(px) <= node_count(py) ? 0 : 1;
  for (int i = 0; i < 2; ++i) {
    const int order = (first + i) % 2;
    auto p = order == 0 ? potential_order(px, py, "x", "y", ctx) : potential_order(py, px, "y", "x", ctx);
    if (!p || !potential_ok(*p, px, py, ctx.box)) continue;
    if (!contains_integral(*p)) return p;
    if (!open_candidate) open_candidate = p;
  }
  return open_candidate;
}

std::string to_string(QMethod m) {
  switch (m) {
    case QMethod::FZero: return "f-zero";
    case QMethod::FPositiveConstant: return "f-positive-constant";
    case QMethod::FNegativeConstant: return "f-negative-constant";
    case QMethod::PolynomialCoefficient: return "polynomial-coefficient";
    case QMethod::Ansatz: return "ansatz";
  }
  return "?";
}

QSolution solve_q_ode(const Expr& f_in, const SampleBox& box) {
  Expr f = collapse_all(simplify(f_in), box);
  Expr x = Expr::variable("x");
  auto works = [&](const Expr& q) {
    try {
      return is_identically_zero(differentiate(q, "x", 2) + f * q, box);
    } catch (const Error&) {
      return false;
    }
  };
  if (f.is_zero() || is_identically_zero(f, box)) return {x, Expr(0), QMethod::FZero};
  if (free_variables(f).empty() && arbitrary_constants(f).empty()) {
    auto val = numeric_value(f, box);
    if (val && *val != 0.0) {
      Expr c = *val > 0 ? f : simplify(-f);
      Expr a = simplify(pow(c, Expr(Rational(1, 2))));
      Expr q = *val > 0 ? sin(a * x) : sinh(a * x);
      if (works(q)) return {q, f, *val > 0 ? QMethod::FPositiveConstant : QMethod::FNegativeConstant};
    }
  }
  const Rational powers[] = {1, 2, 3, -1, -2, -3, Rational(1, 2), Rational(3, 2), Rational(-1, 2)};
  for (const auto& n : powers) {
    Expr q = pow(x, Expr(n));
    if (works(q)) return {q, f, QMethod::PolynomialCoefficient};
  }
  const Rational scales[] = {Rational(1, 2), 1, 2, 3};
  for (const auto& s : scales) {
    for (int sign : {1, -1}) {
      Expr l = Expr(sign > 0 ? s : -s);
      for (const Expr& q : {exp(l * x), sin(l * x), cos(l * x), sinh(l * x), cosh(l * x)}) {
        if (works(q)) return {q, f, QMethod::Ansatz};
      }
    }
  }
  throw NoClosedFormQ("no catalog solution of q'' + (" + expr::to_string(f) + ") q = 0");
}

}  // namespace sundman
