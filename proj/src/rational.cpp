#include "delayoc/rational.hpp"

#include <cctype>
#include <charconv>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace delayoc {

namespace {

using i128 = __int128;

i128 abs128(i128 v) { return v < 0 ? -v : v; }

i128 gcd128(i128 a, i128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits64(i128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() &&
         v <= std::numeric_limits<std::int64_t>::max();
}

std::int64_t parse_int(std::string_view digits, std::string_view whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw std::invalid_argument("invalid rational '" + std::string(whole) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Rational::Rational(std::int64_t num) : num_(num), den_(1) {}

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  *this = from_wide(num, den);
}

Rational Rational::from_wide(i128 num, i128 den) {
  if (den == 0) throw std::domain_error("rational division by zero");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (!fits64(num) || !fits64(den)) throw std::overflow_error("rational overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

std::int64_t Rational::floor() const {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return q;
}

std::int64_t Rational::ceil() const {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ > 0) ++q;
  return q;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(std::string_view text) {
  const std::string_view whole = text;
  text = trim(text);
  if (text.empty()) throw std::invalid_argument("empty rational");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto p = trim(text.substr(0, slash));
    auto q = trim(text.substr(slash + 1));
    if (!p.empty() && p.front() == '+') p.remove_prefix(1);
    return Rational(parse_int(p, whole), parse_int(q, whole));
  }

  bool negative = false;
  if (text.front() == '+' || text.front() == '-') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }

  std::string_view mantissa = text;
  int exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = text.substr(0, e);
    auto exp_part = text.substr(e + 1);
    bool exp_neg = false;
    if (!exp_part.empty() && (exp_part.front() == '+' || exp_part.front() == '-')) {
      exp_neg = exp_part.front() == '-';
      exp_part.remove_prefix(1);
    }
    if (exp_part.empty()) throw std::invalid_argument("invalid rational '" + std::string(whole) + "'");
    auto mag = parse_int(exp_part, whole);
    if (mag > 18) throw std::overflow_error("rational exponent too large in '" + std::string(whole) + "'");
    exponent = static_cast<int>(exp_neg ? -mag : mag);
  }

  std::string digits;
  int frac_len = 0;
  bool seen_dot = false;
  for (char c : mantissa) {
    if (c == '.') {
      if (seen_dot) throw std::invalid_argument("invalid rational '" + std::string(whole) + "'");
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_dot) ++frac_len;
    } else {
      throw std::invalid_argument("invalid rational '" + std::string(whole) + "'");
    }
  }
  if (digits.empty()) throw std::invalid_argument("invalid rational '" + std::string(whole) + "'");

  i128 num = parse_int(digits, whole);
  i128 den = 1;
  int shift = exponent - frac_len;
  for (; shift > 0; --shift) num *= 10;
  for (; shift < 0; ++shift) den *= 10;
  return from_wide(negative ? -num : num, den);
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational::from_wide(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
  return Rational::from_wide(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return Rational::from_wide(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw std::domain_error("rational division by zero");
  return Rational::from_wide(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
}

Rational Rational::operator-() const { return from_wide(-i128(num_), den_); }

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  return i128(a.num_) * b.den_ <=> i128(b.num_) * a.den_;
}

std::ostream& operator<<(std::ostream& os, const Rational& q) { return os << q.str(); }

Rational gcd_rational(const Rational& p, const Rational& q) {
  if (p.is_negative() || q.is_negative()) throw std::invalid_argument("gcd_rational: negative argument");
  if (p.is_zero() && q.is_zero()) throw std::invalid_argument("gcd_rational: both arguments are zero");
  if (p.is_zero()) return q;
  if (q.is_zero()) return p;
  // gcd(a/b, c/d) = gcd(a*d, c*b) / (b*d), then reduced.
  i128 lhs = i128(p.num()) * q.den();
  i128 rhs = i128(q.num()) * p.den();
  return Rational::from_wide(gcd128(lhs, rhs), i128(p.den()) * q.den());
}

}  // namespace delayoc
