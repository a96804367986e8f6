#include "sundman/rational.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sundman {

namespace {

using Wide = __int128;

std::int64_t narrow(Wide v) {
  if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("rational overflow");
  return static_cast<std::int64_t>(v);
}

Rational make(Wide n, Wide d) {
  if (d == 0) throw std::domain_error("rational division by zero");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  Wide a = n < 0 ? -n : n;
  Wide b = d;
  while (b != 0) {
    Wide t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    n /= a;
    d /= a;
  }
  return Rational(narrow(n), narrow(d));
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw std::domain_error("rational with zero denominator");
  if (d < 0) {
    if (n == INT64_MIN || d == INT64_MIN) throw std::overflow_error("rational overflow");
    n = -n;
    d = -d;
  }
  std::int64_t g = std::gcd(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  num_ = n;
  den_ = d;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::int64_t Rational::floor() const noexcept {
  std::int64_t q = num_ / den_;
  if ((num_ % den_ != 0) && (num_ < 0)) --q;
  return q;
}

Rational Rational::operator-() const { return make(-static_cast<Wide>(num_), den_); }

Rational operator+(const Rational& a, const Rational& b) {
  return make(static_cast<Wide>(a.num_) * b.den_ + static_cast<Wide>(b.num_) * a.den_,
              static_cast<Wide>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  return make(static_cast<Wide>(a.num_) * b.num_, static_cast<Wide>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw std::domain_error("rational division by zero");
  return make(static_cast<Wide>(a.num_) * b.den_, static_cast<Wide>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  Wide l = static_cast<Wide>(a.num_) * b.den_;
  Wide r = static_cast<Wide>(b.num_) * a.den_;
  if (l < r) return std::strong_ordering::less;
  if (l > r) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Rational Rational::pow(const Rational& base, std::int64_t k) {
  if (k == 0) return Rational(1);
  if (base.is_zero()) {
    if (k < 0) throw std::domain_error("zero to a negative power");
    return Rational(0);
  }
  Rational b = k < 0 ? Rational(1) / base : base;
  std::int64_t e = k < 0 ? -k : k;
  if (e > 256) throw std::overflow_error("rational power exponent too large");
  Rational r(1);
  while (e > 0) {
    if (e & 1) r = r * b;
    e >>= 1;
    if (e > 0) b = b * b;
  }
  return r;
}

std::optional<Rational> Rational::approximate(double x, std::int64_t max_den, double tol) {
  if (!std::isfinite(x) || std::fabs(x) > 1e15) return std::nullopt;
  // Continued-fraction convergents.
  double v = x;
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int i = 0; i < 40; ++i) {
    double a = std::floor(v);
    if (std::fabs(a) > 1e15) break;
    auto ai = static_cast<std::int64_t>(a);
    std::int64_t p2 = ai * p1 + p0;
    std::int64_t q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    if (std::fabs(static_cast<double>(p2) / static_cast<double>(q2) - x) <= tol) return Rational(p2, q2);
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    double frac = v - a;
    if (frac < 1e-300) break;
    v = 1.0 / frac;
  }
  return std::nullopt;
}

std::optional<std::int64_t> exact_root(std::int64_t n, std::int64_t k) {
  if (n < 0 || k <= 0) return std::nullopt;
  if (k == 1) return n;
  auto r = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(k))));
  for (std::int64_t c = std::max<std::int64_t>(0, r - 1); c <= r + 1; ++c) {
    Wide p = 1;
    bool over = false;
    for (std::int64_t i = 0; i < k; ++i) {
      p *= c;
      if (p > static_cast<Wide>(n)) {
        over = true;
        break;
      }
    }
    if (!over && p == n) return c;
  }
  return std::nullopt;
}

}  // namespace sundman
