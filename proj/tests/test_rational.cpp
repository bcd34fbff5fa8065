#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "delayoc/rational.hpp"

using delayoc::Rational;
using delayoc::gcd_rational;

TEST(Rational, NormalizesSignAndTerms) {
  Rational q(6, -4);
  EXPECT_EQ(q.num(), -3);
  EXPECT_EQ(q.den(), 2);
  EXPECT_EQ(q.str(), "-3/2");
  EXPECT_EQ(Rational(4, 2).str(), "2");
  EXPECT_THROW(Rational(1, 0), std::invalid_argument);
}

TEST(Rational, Arithmetic) {
  const Rational a(1, 3), b(1, 6);
  EXPECT_EQ(a + b, Rational(1, 2));
  EXPECT_EQ(a - b, Rational(1, 6));
  EXPECT_EQ(a * b, Rational(1, 18));
  EXPECT_EQ(a / b, Rational(2));
  EXPECT_EQ(-a, Rational(-1, 3));
  EXPECT_TRUE(b < a);
  EXPECT_THROW(a / Rational(0), std::domain_error);
}

TEST(Rational, CeilFloor) {
  EXPECT_EQ(Rational(7, 2).ceil(), 4);
  EXPECT_EQ(Rational(7, 2).floor(), 3);
  EXPECT_EQ(Rational(-7, 2).ceil(), -3);
  EXPECT_EQ(Rational(-7, 2).floor(), -4);
  EXPECT_EQ(Rational(3).ceil(), 3);
}

TEST(Rational, ParsesFractionsAndDecimalsExactly) {
  EXPECT_EQ(Rational::parse("1/2"), Rational(1, 2));
  EXPECT_EQ(Rational::parse("-3/9"), Rational(-1, 3));
  EXPECT_EQ(Rational::parse("0.25"), Rational(1, 4));
  EXPECT_EQ(Rational::parse("0.1"), Rational(1, 10));
  EXPECT_EQ(Rational::parse("-1.5e-3"), Rational(-3, 2000));
  EXPECT_EQ(Rational::parse("2.5E2"), Rational(250));
  EXPECT_EQ(Rational::parse("7"), Rational(7));
  for (const char* bad : {"", "1/", "/2", "1//2", "abc", "1.2.3", "1/0", "1e", "0x10"}) {
    EXPECT_THROW(Rational::parse(bad), std::invalid_argument) << bad;
  }
}

TEST(Rational, OverflowIsDetected) {
  const Rational big(std::numeric_limits<std::int64_t>::max() / 2);
  EXPECT_THROW(big * Rational(4), std::overflow_error);
  const Rational p(1, 4294967311LL), q(1, 4294967357LL);
  EXPECT_THROW(p * q, std::overflow_error);
}

TEST(Rational, Gcd) {
  EXPECT_EQ(gcd_rational(Rational(1), Rational(2)), Rational(1));
  EXPECT_EQ(gcd_rational(Rational(1, 2), Rational(1, 3)), Rational(1, 6));
  EXPECT_EQ(gcd_rational(Rational(3, 4), Rational(0)), Rational(3, 4));
  EXPECT_EQ(gcd_rational(Rational(0), Rational(5, 7)), Rational(5, 7));
  EXPECT_THROW(gcd_rational(Rational(0), Rational(0)), std::invalid_argument);
  EXPECT_THROW(gcd_rational(Rational(-1), Rational(1)), std::invalid_argument);
}

TEST(Rational, GcdDividesBothProperty) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> num(1, 500), den(1, 60);
  for (int i = 0; i < 500; ++i) {
    const Rational p(num(rng), den(rng)), q(num(rng), den(rng));
    const Rational g = gcd_rational(p, q);
    EXPECT_TRUE((p / g).is_integer());
    EXPECT_TRUE((q / g).is_integer());
    // Maximal: the two quotients are coprime.
    std::int64_t a = (p / g).num(), b = (q / g).num();
    while (b) {
      a %= b;
      std::swap(a, b);
    }
    EXPECT_EQ(a, 1);
  }
}
