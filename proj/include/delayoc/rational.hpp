#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace delayoc {

/// Exact rational number in lowest terms with a positive denominator.
///
/// Delays, horizon endpoints and the lattice step are carried as Rationals so
/// that r = h*k and s = h*l hold exactly. Arithmetic is checked: an operation
/// whose reduced result does not fit in 64 bits throws std::overflow_error.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num);  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }
  bool is_negative() const { return num_ < 0; }

  /// Smallest integer >= *this.
  std::int64_t ceil() const;
  std::int64_t floor() const;

  /// "p/q", or "p" when the denominator is 1.
  std::string str() const;

  /// Accepts "p/q", integers, and finite decimals ("0.25", "-1.5e-3").
  /// Decimals convert exactly to a power-of-ten denominator.
  static Rational parse(std::string_view text);

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const;

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  friend Rational gcd_rational(const Rational& p, const Rational& q);

 private:
  static Rational from_wide(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& q);

/// Largest g with p/g and q/g both integers; a zero argument is ignored.
/// Throws std::invalid_argument when both are zero or either is negative.
Rational gcd_rational(const Rational& p, const Rational& q);

}  // namespace delayoc
