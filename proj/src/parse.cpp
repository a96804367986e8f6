#include "sundman/parse.hpp"

#include <cctype>
#include <vector>

#include "sundman/errors.hpp"

namespace sundman::expr {

namespace {

enum class Tok { Number, Name, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

const std::vector<std::string> kOperandStart = {"number", "identifier", "(", "-"};
const std::vector<std::string> kAfterOperand = {"+", "-", "*", "/", "^", ")", "end of input"};

bool is_arbitrary_name(const std::string& s, const ParseOptions& opt) {
  if (opt.constants.count(s)) return true;
  if (s.empty() || (s[0] != 'c' && s[0] != 'C')) return false;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

class Lexer {
 public:
  Lexer(std::string_view src, const ParseOptions& opt) : src_(src), opt_(opt) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", pos_});
        return out;
      }
      std::size_t start = pos_;
      char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
          ++pos_;
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        std::string t(src_.substr(start, pos_ - start));
        if (t == ".") throw SyntaxError("malformed number at offset " + std::to_string(start), start, {"number"});
        out.push_back({Tok::Number, t, start});
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '\'') {
          if (!opt_.allow_prime)
            throw SyntaxError("derivative token not allowed here at offset " + std::to_string(pos_), pos_,
                              kAfterOperand);
          ++pos_;
        }
        out.push_back({Tok::Name, std::string(src_.substr(start, pos_ - start)), start});
        continue;
      }
      Tok k;
      switch (c) {
        case '+': k = Tok::Plus; break;
        case '-': k = Tok::Minus; break;
        case '*': k = Tok::Star; break;
        case '/': k = Tok::Slash; break;
        case '^': k = Tok::Caret; break;
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        case ',': k = Tok::Comma; break;
        default:
          throw SyntaxError(std::string("unexpected character '") + c + "' at offset " + std::to_string(start),
                            start, kOperandStart);
      }
      ++pos_;
      out.push_back({k, std::string(1, c), start});
    }
  }

 private:
  std::string_view src_;
  const ParseOptions& opt_;
  std::size_t pos_ = 0;
};

Rational parse_number(const Token& t) {
  auto dot = t.text.find('.');
  std::string whole = t.text.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : t.text.substr(dot + 1);
  try {
    Rational value(0);
    for (char d : whole) value = value * Rational(10) + Rational(d - '0');
    Rational scale(1);
    for (char d : frac) {
      scale = scale * Rational(10);
      value = value + Rational(d - '0') / scale;
    }
    return value;
  } catch (const std::overflow_error&) {
    throw SyntaxError("number literal too large at offset " + std::to_string(t.offset), t.offset, {"number"});
  }
}

class Parser {
 public:
  Parser(std::vector<Token> toks, const ParseOptions& opt) : toks_(std::move(toks)), opt_(opt) {}

  Expr parse_all() {
    Expr e = parse_expr(0);
    if (peek().kind != Tok::End) fail(kAfterOperand);
    return e;
  }

 private:
  static int left_bp(Tok k) {
    switch (k) {
      case Tok::Plus:
      case Tok::Minus:
        return 10;
      case Tok::Star:
      case Tok::Slash:
        return 20;
      case Tok::Caret:
        return 40;
      default:
        return 0;
    }
  }

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::vector<std::string>& expected) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    std::string msg = "unexpected " + got + " at offset " + std::to_string(t.offset) + "; expected one of:";
    for (const auto& e : expected) msg += " " + e;
    throw SyntaxError(msg, t.offset, expected);
  }

  void expect(Tok k, const std::string& what) {
    if (peek().kind != k) fail({what});
    ++pos_;
  }

  Expr parse_expr(int min_bp) {
    Expr lhs = nud();
    while (true) {
      Tok k = peek().kind;
      int bp = left_bp(k);
      if (bp == 0 || bp <= min_bp) {
        if (k == Tok::Number || k == Tok::Name || k == Tok::LParen) fail(kAfterOperand);
        break;
      }
      next();
      if (k == Tok::Caret) {
        Expr rhs = parse_expr(bp - 1);
        lhs = pow(lhs, rhs);
      } else {
        Expr rhs = parse_expr(bp);
        switch (k) {
          case Tok::Plus: lhs = lhs + rhs; break;
          case Tok::Minus: lhs = lhs - rhs; break;
          case Tok::Star: lhs = lhs * rhs; break;
          default:
            if (rhs.is_zero()) throw DomainError("division by zero in literal expression");
            lhs = lhs / rhs;
            break;
        }
      }
    }
    return lhs;
  }

  Expr nud() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number:
        next();
        return Expr(parse_number(t));
      case Tok::Minus:
        next();
        return -parse_expr(30);
      case Tok::Plus:
        next();
        return parse_expr(30);
      case Tok::LParen: {
        next();
        Expr e = parse_expr(0);
        expect(Tok::RParen, ")");
        return e;
      }
      case Tok::Name:
        return name();
      default:
        fail(kOperandStart);
    }
  }

  Expr name() {
    Token t = next();
    const bool call = peek().kind == Tok::LParen;
    if (t.text == "int") {
      if (!call) fail({"("});
      next();
      Expr body = parse_expr(0);
      expect(Tok::Comma, ",");
      if (peek().kind != Tok::Name) fail({"identifier"});
      Token v = next();
      expect(Tok::RParen, ")");
      try {
        return integral(body, v.text);
      } catch (const std::invalid_argument& ex) {
        throw SyntaxError(ex.what(), v.offset, {"identifier"});
      }
    }
    if (call) {
      auto fn = fn_from_name(t.text);
      if (!fn) throw UnknownFunction(t.text, t.offset);
      next();
      Expr a = parse_expr(0);
      expect(Tok::RParen, ")");
      return apply(*fn, a);
    }
    if (fn_from_name(t.text))
      throw SyntaxError("function '" + t.text + "' used without an argument at offset " + std::to_string(t.offset),
                        t.offset, {"("});
    if (t.text == "pi") return Expr::pi();
    if (t.text == "e") return Expr::euler();
    if (is_arbitrary_name(t.text, opt_)) return Expr::arbitrary(t.text);
    return Expr::variable(t.text);
  }

  std::vector<Token> toks_;
  const ParseOptions& opt_;
  std::size_t pos_ = 0;
};

// Printing levels: higher binds tighter.
constexpr int kSum = 10;
constexpr int kProduct = 20;
constexpr int kUnary = 30;
constexpr int kPower = 40;
constexpr int kAtom = 50;

std::string print(const Expr& e);

bool is_negative_numeric_exponent(const Expr& f) {
  return f.is(Kind::Power) && f.exponent().is_number() && f.exponent().number().is_negative();
}

int level(const Expr& e) {
  switch (e.kind()) {
    case Kind::Sum:
      return kSum;
    case Kind::Product:
      return split_coefficient(e).first.is_negative() ? kUnary - 1 : kProduct;
    case Kind::Rational:
      return e.number().is_negative() ? kUnary - 1 : kProduct;
    case Kind::Integer:
      return e.number().is_negative() ? kUnary : kAtom;
    case Kind::Power:
      if (e.exponent().is_number() && e.exponent().number() == Rational(1, 2)) return kAtom;
      if (is_negative_numeric_exponent(e)) return kProduct;
      return kPower;
    default:
      return kAtom;
  }
}

std::string wrap(const Expr& e, int min_level) {
  std::string s = print(e);
  if (level(e) < min_level) return "(" + s + ")";
  return s;
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string print_product(const Expr& e) {
  auto [coef, rest] = split_coefficient(e);
  std::vector<Expr> factors;
  if (rest.is(Kind::Product)) {
    factors.assign(rest.operands().begin(), rest.operands().end());
  } else if (!rest.is_one()) {
    factors.push_back(rest);
  }
  std::string sign;
  if (coef.is_negative()) {
    sign = "-";
    coef = -coef;
  }
  std::vector<std::string> num, den;
  std::vector<Expr> num_f, den_f;
  for (const auto& f : factors) {
    if (f.is(Kind::Power) && f.base().is(Kind::Integer) && f.exponent().is_number() &&
        f.exponent().number() == Rational(1, 2) && coef.den() % f.base().number().num() == 0) {
      coef = coef * f.base().number();
      den_f.push_back(f);
    } else if (is_negative_numeric_exponent(f)) {
      den_f.push_back(pow(f.base(), Expr(-f.exponent().number())));
    } else {
      num_f.push_back(f);
    }
  }
  if (coef.num() != 1 || num_f.empty()) num.push_back(std::to_string(coef.num()));
  for (const auto& f : num_f) num.push_back(wrap(f, kUnary));
  if (coef.den() != 1) den.push_back(std::to_string(coef.den()));
  for (const auto& f : den_f) den.push_back(wrap(f, kUnary));
  std::string out = sign + join(num, "*");
  if (!den.empty()) {
    if (den.size() == 1) {  // already wrapped by precedence
      out += "/" + den[0];
    } else {
      out += "/(" + join(den, "*") + ")";
    }
  }
  return out;
}

std::string print_sum(const Expr& e) {
  std::string out;
  bool first = true;
  for (const auto& t : e.operands()) {
    auto [c, rest] = split_coefficient(t);
    if (first) {
      out = print(t);
      first = false;
    } else if (c.is_negative()) {
      out += " - " + wrap(-t, kProduct);
    } else {
      out += " + " + wrap(t, kProduct);
    }
  }
  return out;
}

std::string print(const Expr& e) {
  switch (e.kind()) {
    case Kind::Integer:
    case Kind::Rational:
      return e.number().to_string();
    case Kind::NamedConstant:
    case Kind::ArbitraryConstant:
    case Kind::Variable:
      return e.name();
    case Kind::Function:
      return std::string(fn_name(e.fn())) + "(" + print(e.arg()) + ")";
    case Kind::Integral:
      return "int(" + print(e.integrand()) + ", " + e.name() + ")";
    case Kind::Sum:
      return print_sum(e);
    case Kind::Product:
      return print_product(e);
    case Kind::Power: {
      const Expr& ex = e.exponent();
      if (ex.is_number() && ex.number() == Rational(1, 2)) return "sqrt(" + print(e.base()) + ")";
      if (is_negative_numeric_exponent(e)) return print_product(e);
      std::string exps = print(ex);
      bool simple = (ex.is(Kind::Integer) && !ex.number().is_negative()) || ex.is(Kind::Variable) ||
                    ex.is(Kind::NamedConstant) || ex.is(Kind::ArbitraryConstant);
      return wrap(e.base(), kAtom) + "^" + (simple ? exps : "(" + exps + ")");
    }
  }
  return {};
}

}  // namespace

Expr parse(std::string_view text, const ParseOptions& options) {
  Lexer lex(text, options);
  Parser p(lex.run(), options);
  return p.parse_all();
}

std::string to_string(const Expr& e) { return print(e); }

std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

}  // namespace sundman::expr
