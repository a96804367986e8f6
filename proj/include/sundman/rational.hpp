#pragma once

#include <cstdint>
#include <compare>
#include <optional>
#include <string>

namespace sundman {

/// Exact rational p/q in lowest terms with q > 0. Arithmetic is checked and
/// throws std::overflow_error instead of wrapping.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t n, std::int64_t d);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }

  bool is_integer() const noexcept { return den_ == 1; }
  bool is_zero() const noexcept { return num_ == 0; }
  bool is_one() const noexcept { return num_ == 1 && den_ == 1; }
  bool is_negative() const noexcept { return num_ < 0; }
  int sign() const noexcept { return (num_ > 0) - (num_ < 0); }

  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string to_string() const;

  /// Integer part rounded toward -infinity.
  std::int64_t floor() const noexcept;

  Rational operator-() const;
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  /// a^k for integer k; throws std::domain_error for 0^negative.
  static Rational pow(const Rational& base, std::int64_t k);

  /// Best rational approximation with denominator <= max_den if within tol of x.
  static std::optional<Rational> approximate(double x, std::int64_t max_den, double tol);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Exact integer k-th root of n >= 0 if it exists.
std::optional<std::int64_t> exact_root(std::int64_t n, std::int64_t k);

}  // namespace sundman
