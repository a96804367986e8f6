#include "sundman/simplify.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>

namespace sundman::expr {

namespace {

Expr minus_two() { return Expr(-2); }

// Factors of a product as (base, exponent) with exponent 1 for plain factors.
std::vector<Expr> factors_of(const Expr& e) {
  if (e.is(Kind::Product)) return {e.operands().begin(), e.operands().end()};
  return {e};
}

Expr distribute(const std::vector<Expr>& factors, std::size_t max_terms) {
  std::vector<Expr> terms{Expr(1)};
  for (const auto& f : factors) {
    std::vector<Expr> parts;
    if (f.is(Kind::Sum)) {
      parts.assign(f.operands().begin(), f.operands().end());
    } else {
      for (auto& t : terms) t = mul({t, f});
      continue;
    }
    if (terms.size() * parts.size() > max_terms) return Expr();
    std::vector<Expr> next;
    next.reserve(terms.size() * parts.size());
    for (const auto& t : terms)
      for (const auto& p : parts) next.push_back(mul({t, p}));
    terms = std::move(next);
  }
  return add(std::move(terms));
}

bool is_small_sum_power(const Expr& f) {
  return f.is(Kind::Power) && f.base().is(Kind::Sum) && f.exponent().is(Kind::Integer) &&
         f.exponent().number().num() >= 2 && f.exponent().number().num() <= 6;
}

Expr expand_node(const Expr& n, std::size_t max_terms) {
  if (is_small_sum_power(n)) {
    std::vector<Expr> copies(static_cast<std::size_t>(n.exponent().number().num()), n.base());
    Expr r = distribute(copies, max_terms);
    return r.is_zero() ? n : r;
  }
  if (!n.is(Kind::Product)) return n;
  bool has_sum = false;
  std::vector<Expr> fs;
  for (const auto& f : n.operands()) {
    if (f.is(Kind::Sum)) {
      has_sum = true;
      fs.push_back(f);
    } else if (is_small_sum_power(f)) {
      has_sum = true;
      for (std::int64_t i = 0; i < f.exponent().number().num(); ++i) fs.push_back(f.base());
    } else {
      fs.push_back(f);
    }
  }
  if (!has_sum) return n;
  Expr r = distribute(fs, max_terms);
  // distribute signals overflow with a default (zero) Expr; a genuine zero is
  // impossible here because every factor of a canonical product is nonzero.
  if (r.is_zero()) return n;
  return r;
}

Expr normalize_trig(const Expr& n) {
  if (!n.is(Kind::Function)) return n;
  const Expr& u = n.arg();
  switch (n.fn()) {
    case Fn::Tan: return sin(u) / cos(u);
    case Fn::Cot: return cos(u) / sin(u);
    case Fn::Tanh: return sinh(u) / cosh(u);
    default: return n;
  }
}

Expr expand_ln(const Expr& w);

Expr ln_of_number(const Rational& r) {
  if (r.is_negative()) return ln(Expr(r));
  if (r.is_integer()) return ln(Expr(r));
  return ln(Expr(Rational(r.num()))) - ln(Expr(Rational(r.den())));
}

Expr expand_ln(const Expr& w) {
  if (w.is_fn(Fn::Exp)) return w.arg();
  if (w.is_number()) return ln_of_number(w.number());
  if (w.is(Kind::Power)) return w.exponent() * expand_ln(w.base());
  if (w.is(Kind::Product)) {
    auto [c, rest] = split_coefficient(w);
    if (c.is_negative()) return ln(w);
    std::vector<Expr> terms;
    if (!c.is_one()) terms.push_back(ln_of_number(c));
    for (const auto& f : factors_of(rest)) terms.push_back(expand_ln(f));
    return add(std::move(terms));
  }
  return ln(w);
}

Expr extract_exp_logs(const Expr& n) {
  const Expr& a = n.arg();
  std::vector<Expr> terms = a.is(Kind::Sum) ? std::vector<Expr>(a.operands().begin(), a.operands().end())
                                            : std::vector<Expr>{a};
  std::vector<Expr> factors;
  std::vector<Expr> rest;
  for (const auto& t : terms) {
    auto [c, r] = split_coefficient(t);
    if (r.is_fn(Fn::Ln)) {
      factors.push_back(pow(r.arg(), Expr(c)));
    } else {
      rest.push_back(t);
    }
  }
  if (factors.empty()) return n;
  factors.push_back(exp(add(std::move(rest))));
  return mul(std::move(factors));
}

Expr rewrite_node(const Expr& n) {
  if (n.is(Kind::Function)) {
    switch (n.fn()) {
      case Fn::Tan:
      case Fn::Cot:
      case Fn::Tanh:
        return normalize_trig(n);
      case Fn::Ln:
        return expand_ln(n.arg());
      case Fn::Exp:
        return extract_exp_logs(n);
      default:
        return n;
    }
  }
  return n;
}

// Sum-level identities T sin^2 + T cos^2 = T and T cosh^2 - T sinh^2 = T.
struct IdentityPair {
  Fn first;
  Fn second;
  int partner_sign;  // +1: same-sign coefficients combine, -1: opposite signs
};

constexpr IdentityPair kPairs[] = {
    {Fn::Sin, Fn::Cos, +1},
    {Fn::Cos, Fn::Sin, +1},
    {Fn::Cosh, Fn::Sinh, -1},
    {Fn::Sinh, Fn::Cosh, -1},
};

void collect_args(const Expr& term, std::set<Expr, ExprLess>& circ, std::set<Expr, ExprLess>& hyp) {
  for (const auto& f : factors_of(term)) {
    const Expr& g = f.is(Kind::Power) ? f.base() : f;
    if (!g.is(Kind::Function)) continue;
    if (g.fn() == Fn::Sin || g.fn() == Fn::Cos) circ.insert(g.arg());
    if (g.fn() == Fn::Sinh || g.fn() == Fn::Cosh) hyp.insert(g.arg());
  }
}

Expr pythagorean(const Expr& sum) {
  Expr current = sum;
  for (int iter = 0; iter < 64 && current.is(Kind::Sum); ++iter) {
    std::map<Expr, Rational, ExprLess> coeffs;
    std::set<Expr, ExprLess> circ, hyp;
    for (const auto& t : current.operands()) {
      auto [c, r] = split_coefficient(t);
      coeffs[r] += c;
      collect_args(r, circ, hyp);
    }
    bool changed = false;
    for (const auto& [r, c] : coeffs) {
      for (const auto& pair : kPairs) {
        const auto& args = (pair.first == Fn::Sin || pair.first == Fn::Cos) ? circ : hyp;
        for (const auto& u : args) {
          Expr base_t = r * pow(apply(pair.first, u), minus_two());
          Expr partner = base_t * pow(apply(pair.second, u), Expr(2));
          if (partner == r) continue;
          auto it = coeffs.find(partner);
          if (it == coeffs.end()) continue;
          const Rational& c2 = it->second;
          if (pair.partner_sign > 0 && c.sign() != c2.sign()) continue;
          if (pair.partner_sign < 0 && c.sign() == c2.sign()) continue;
          Rational ac = c.is_negative() ? -c : c;
          Rational ac2 = c2.is_negative() ? -c2 : c2;
          Rational m = ac < ac2 ? ac : ac2;
          Rational mc = c.is_negative() ? -m : m;     // amount taken from this term
          Rational mp = c2.is_negative() ? -m : m;    // amount taken from the partner
          // first^2 term and second^2 term each lose m; T gains the coefficient
          // of the first^2 term (sin^2 / cosh^2 carries the sign of T).
          Rational gain = (pair.first == Fn::Sin || pair.first == Fn::Cos) ? mc
                          : (pair.first == Fn::Cosh ? mc : mp);
          std::vector<Expr> terms;
          for (const auto& [r2, c3] : coeffs) {
            Rational cc = c3;
            if (r2 == r) cc = cc - mc;
            if (r2 == partner) cc = cc - mp;
            terms.push_back(Expr(cc) * r2);
          }
          terms.push_back(Expr(gain) * base_t);
          current = add(std::move(terms));
          changed = true;
          break;
        }
        if (changed) break;
      }
      if (changed) break;
    }
    if (!changed) break;
  }
  return current;
}

// --- rational cancellation -------------------------------------------------
//
// Terms of a sum sharing a denominator are combined and, viewed as
// polynomials in their atoms (anything that is not a sum, product or positive
// integer power), divided exactly by the sum factors of the denominator.

using Mono = std::vector<int>;
using Poly = std::map<Mono, Rational>;

constexpr std::size_t kMaxPolyTerms = 200;
constexpr std::size_t kMaxAtoms = 16;

struct AtomTable {
  std::vector<Expr> atoms;
  int index(const Expr& a) {
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (atoms[i] == a) return static_cast<int>(i);
    if (atoms.size() >= kMaxAtoms) throw std::length_error("too many atoms");
    atoms.push_back(a);
    return static_cast<int>(atoms.size() - 1);
  }
};

Mono widen(Mono m, std::size_t n) {
  m.resize(n, 0);
  return m;
}

// nullopt when `e` is not a Laurent polynomial in atoms (sum bases, big sums)
std::optional<Poly> to_poly(const Expr& e, AtomTable& tab) {
  std::vector<std::pair<std::vector<std::pair<int, int>>, Rational>> raw;
  std::vector<Expr> terms = e.is(Kind::Sum) ? std::vector<Expr>(e.operands().begin(), e.operands().end())
                                            : std::vector<Expr>{e};
  if (terms.size() > kMaxPolyTerms) return std::nullopt;
  for (const auto& t : terms) {
    auto [c, rest] = split_coefficient(t);
    std::vector<std::pair<int, int>> mono;
    for (const auto& f : factors_of(rest)) {
      if (f.is_one()) continue;
      if (f.is(Kind::Sum)) return std::nullopt;
      if (f.is(Kind::Power) && f.exponent().is(Kind::Integer)) {
        auto k = f.exponent().number().num();
        if (k < -64 || k > 64 || f.base().is(Kind::Sum)) return std::nullopt;
        mono.emplace_back(tab.index(f.base()), static_cast<int>(k));
      } else {
        mono.emplace_back(tab.index(f), 1);
      }
    }
    raw.emplace_back(std::move(mono), c);
  }
  Poly p;
  for (const auto& [mono, c] : raw) {
    Mono m(tab.atoms.size(), 0);
    for (auto [i, k] : mono) m[static_cast<std::size_t>(i)] += k;
    p[m] += c;
  }
  for (auto it = p.begin(); it != p.end();) it = it->second.is_zero() ? p.erase(it) : std::next(it);
  return p;
}

Poly normalize_width(const Poly& p, std::size_t n) {
  Poly out;
  for (const auto& [m, c] : p) out[widen(m, n)] += c;
  return out;
}

Expr from_poly(const Poly& p, const AtomTable& tab) {
  std::vector<Expr> terms;
  for (const auto& [m, c] : p) {
    std::vector<Expr> fs{Expr(c)};
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i]) fs.push_back(pow(tab.atoms[i], Expr(m[i])));
    terms.push_back(mul(std::move(fs)));
  }
  return add(std::move(terms));
}

// exact quotient n / d in lex order, nullopt when d does not divide n
std::optional<Poly> divide_exact(Poly n, const Poly& d) {
  if (d.empty()) return std::nullopt;
  const auto& [dm, dc] = *d.rbegin();
  Poly q;
  for (int guard = 0; !n.empty(); ++guard) {
    if (guard > 400 || n.size() > 4 * kMaxPolyTerms) return std::nullopt;
    const auto [nm, nc] = *n.rbegin();
    Mono qm(nm.size());
    for (std::size_t i = 0; i < nm.size(); ++i) {
      qm[i] = nm[i] - dm[i];
      if (qm[i] < 0) return std::nullopt;
    }
    Rational qc = nc / dc;
    q[qm] += qc;
    for (const auto& [m, c] : d) {
      Mono prod(m.size());
      for (std::size_t i = 0; i < m.size(); ++i) prod[i] = m[i] + qm[i];
      Rational& slot = n[prod];
      slot = slot - qc * c;
      if (slot.is_zero()) n.erase(prod);
    }
  }
  return q;
}

// multiplies by the monomial that clears negative exponents, recorded in `shift`
Poly shift_nonnegative(const Poly& p, Mono& shift) {
  std::size_t n = p.empty() ? 0 : p.begin()->first.size();
  shift.assign(n, 0);
  for (const auto& [m, c] : p)
    for (std::size_t i = 0; i < n; ++i) shift[i] = std::max(shift[i], -m[i]);
  Poly out;
  for (const auto& [m, c] : p) {
    Mono r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = m[i] + shift[i];
    out[r] = c;
  }
  return out;
}

Poly unshift(const Poly& p, const Mono& shift) {
  Poly out;
  for (const auto& [m, c] : p) {
    Mono r(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) r[i] = m[i] - (i < shift.size() ? shift[i] : 0);
    out[r] = c;
  }
  return out;
}

// d = lc * x^m * primitive; returns (lc * x^m, primitive)
std::pair<Poly, Poly> split_content(const Poly& d) {
  Mono low = d.begin()->first;
  for (const auto& [m, c] : d)
    for (std::size_t i = 0; i < m.size(); ++i) low[i] = std::min(low[i], m[i]);
  Rational lc = d.rbegin()->second;
  Poly prim;
  for (const auto& [m, c] : d) {
    Mono r(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) r[i] = m[i] - low[i];
    prim[r] = c / lc;
  }
  return {Poly{{low, lc}}, prim};
}

// numerator / denominator with the denominator's sum factors cancelled where
// they divide exactly; nullopt when nothing cancels
std::optional<Expr> cancel(const Expr& num, const std::vector<Expr>& den_factors) {
  AtomTable tab;
  auto n = to_poly(num, tab);
  if (!n) return std::nullopt;
  bool any = false;
  std::vector<Expr> rest;
  Mono shift;
  for (const auto& f : den_factors) {
    bool is_pow = f.is(Kind::Power) && f.exponent().is(Kind::Integer);
    Expr base = is_pow ? f.base() : f;
    std::int64_t k = is_pow ? f.exponent().number().num() : 1;
    if (!base.is(Kind::Sum)) {
      rest.push_back(f);
      continue;
    }
    auto d = to_poly(expand(base), tab);
    if (!d || d->empty()) {
      rest.push_back(f);
      continue;
    }
    auto [content, prim] = split_content(normalize_width(*d, tab.atoms.size()));
    if (prim.size() < 2) {
      rest.push_back(f);
      continue;
    }
    std::int64_t left = k;
    while (left > 0) {
      auto q = divide_exact(shift_nonnegative(normalize_width(*n, tab.atoms.size()), shift), prim);
      if (!q) break;
      n = unshift(*q, shift);
      --left;
      any = true;
      rest.push_back(from_poly(content, tab));
    }
    if (left > 0) {
      // no exact division left: still move the content out of the sum
      Expr c = from_poly(content, tab);
      if (!c.is_one()) {
        any = true;
        rest.push_back(pow(c, Expr(left)));
        rest.push_back(pow(from_poly(prim, tab), Expr(left)));
      } else {
        rest.push_back(pow(base, Expr(left)));
      }
    }
  }
  if (!any) return std::nullopt;
  return expand(from_poly(*n, tab) / mul(std::move(rest)));
}

bool has_sum_denominator(const Expr& t) {
  for (const auto& f : factors_of(t))
    if (f.is(Kind::Power) && f.base().is(Kind::Sum) && f.exponent().is_number() &&
        f.exponent().number().is_negative())
      return true;
  return false;
}

// applies to sums and to single quotients with a sum in the denominator
Expr cancel_sum(const Expr& sum) {
  if (sum.is(Kind::Product) && has_sum_denominator(sum)) {
    try {
      std::vector<Expr> num, den;
      for (const auto& f : sum.operands()) {
        if (f.is(Kind::Power) && f.base().is(Kind::Sum) && f.exponent().is_number() &&
            f.exponent().number().is_negative())
          den.push_back(pow(f.base(), Expr(-f.exponent().number())));
        else
          num.push_back(f);
      }
      auto r = cancel(mul(num), den);
      if (r && node_count(*r) < node_count(sum)) return *r;
    } catch (const std::exception&) {
    }
    return sum;
  }
  if (!sum.is(Kind::Sum) || sum.operands().size() > kMaxPolyTerms) return sum;
  // group by the sum factors of the denominator; monomial denominators stay
// with the numerator as negative exponents
  std::map<Expr, std::vector<Expr>, ExprLess> groups;
  for (const auto& t : sum.operands()) {
    std::vector<Expr> num, den;
    for (const auto& f : factors_of(t)) {
      if (f.is(Kind::Power) && f.base().is(Kind::Sum) && f.exponent().is_number() &&
          f.exponent().number().is_negative())
        den.push_back(pow(f.base(), Expr(-f.exponent().number())));
      else
        num.push_back(f);
    }
    groups[mul(std::move(den))].push_back(mul(std::move(num)));
  }
  bool changed = false;
  std::vector<Expr> out;
  for (const auto& [den, nums] : groups) {
    Expr original = add(nums) / den;
    std::optional<Expr> r;
    if (!den.is_one()) {
      try {
        r = cancel(add(nums), factors_of(den));
      } catch (const std::exception&) {
        r.reset();
      }
    }
    if (r && node_count(*r) < node_count(expand(original))) {
      out.push_back(*r);
      changed = true;
    } else {
      for (const auto& nm : nums) out.push_back(nm / den);
    }
  }
  return changed ? add(std::move(out)) : sum;
}

Expr pass(const Expr& e) {
  Expr r = transform(e, rewrite_node);
  r = expand(r);
  r = transform(r, [](const Expr& n) { return n.is(Kind::Sum) ? pythagorean(n) : n; });
  r = transform(r, cancel_sum);
  return r;
}

}  // namespace

Expr expand(const Expr& n, std::size_t max_terms) {
  if (n.operands().empty()) return n;
  if (is_small_sum_power(n)) return expand_node(pow(expand(n.base(), max_terms), n.exponent()), max_terms);
  if (!n.is(Kind::Product)) {
    std::vector<Expr> ops;
    for (const auto& o : n.operands()) ops.push_back(expand(o, max_terms));
    return rebuild(n, std::move(ops));
  }
  // Sum powers stay opaque while the plain sums are distributed, so that
  // (b + y)^2 can still cancel against a (b + y)^-2 inside the other factors.
  std::vector<Expr> fs;
  for (const auto& f : n.operands())
    fs.push_back(is_small_sum_power(f) ? pow(expand(f.base(), max_terms), f.exponent()) : expand(f, max_terms));
  Expr p = mul(fs);
  if (!p.is(Kind::Product)) return expand_node(p, max_terms);
  std::vector<Expr> plain(p.operands().begin(), p.operands().end());
  Expr d = distribute(plain, max_terms);
  if (d.is_zero()) return p;
  if (!d.is(Kind::Sum)) return expand_node(d, max_terms);
  std::vector<Expr> terms;
  for (const auto& t : d.operands()) terms.push_back(expand_node(t, max_terms));
  return add(std::move(terms));
}

Expr simplify(const Expr& e) {
  Expr current = e;
  for (int i = 0; i < 12; ++i) {
    Expr next = pass(current);
    if (next == current) break;
    current = next;
  }
  return current;
}

Expr factor_common(const Expr& e) {
  if (!e.is(Kind::Sum)) return e;
  // exponent of each base common to all terms (smallest, same sign as the first)
  std::map<Expr, Rational, ExprLess> common;
  bool first = true;
  for (const auto& t : e.operands()) {
    std::map<Expr, Rational, ExprLess> here;
    for (const auto& f : factors_of(split_coefficient(t).second)) {
      if (f.is_one()) continue;
      bool numeric_exp = f.is(Kind::Power) && f.exponent().is_number();
      Expr base = numeric_exp ? f.base() : f;
      Rational k = numeric_exp ? f.exponent().number() : Rational(1);
      here[base] = k;
    }
    if (first) {
      common = here;
      first = false;
      continue;
    }
    for (auto it = common.begin(); it != common.end();) {
      auto h = here.find(it->first);
      if (h == here.end() || h->second.is_negative() != it->second.is_negative()) {
        it = common.erase(it);
        continue;
      }
      if (it->second.is_negative() ? it->second < h->second : h->second < it->second) it->second = h->second;
      ++it;
    }
  }
  if (common.empty()) return e;
  std::vector<Expr> cf;
  for (const auto& [b, k] : common) cf.push_back(pow(b, Expr(k)));
  Expr c = mul(std::move(cf));
  std::vector<Expr> rest;
  for (const auto& t : e.operands()) rest.push_back(t / c);
  return mul({c, add(std::move(rest))});
}

}  // namespace sundman::expr
