#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "delayoc/expr.hpp"

using namespace delayoc;

namespace {

double ev(const std::string& text, const Env& env = {}) { return eval(Expr::parse(text), env); }

// Random well-formed expression over x0, x1, t.
std::string random_expr(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 7);
  switch (pick(rng)) {
    case 0: {
      std::uniform_real_distribution<double> v(0.0, 5.0);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", v(rng));
      return buf;
    }
    case 1: {
      const char* names[] = {"x0", "x1", "t"};
      return names[rng() % 3];
    }
    case 2:
      return "(" + random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1) + ")";
    case 3:
      return random_expr(rng, depth - 1) + " - " + random_expr(rng, depth - 1);
    case 4:
      return random_expr(rng, depth - 1) + "*" + random_expr(rng, depth - 1);
    case 5:
      return "-" + random_expr(rng, depth - 1);
    case 6: {
      const char* f[] = {"sin", "cos", "tanh", "exp"};
      return std::string(f[rng() % 4]) + "(" + random_expr(rng, depth - 1) + "/4)";
    }
    default:
      return "(" + random_expr(rng, depth - 1) + ")^2";
  }
}

}  // namespace

TEST(Expr, Precedence) {
  EXPECT_DOUBLE_EQ(ev("1 + 2*3"), 7.0);
  EXPECT_DOUBLE_EQ(ev("(1 + 2)*3"), 9.0);
  EXPECT_DOUBLE_EQ(ev("2^3^2"), 512.0);
  EXPECT_DOUBLE_EQ(ev("-2^2"), -4.0);
  EXPECT_DOUBLE_EQ(ev("8/4/2"), 1.0);
  EXPECT_DOUBLE_EQ(ev("1 - 2 - 3"), -4.0);
  EXPECT_DOUBLE_EQ(ev("2*-3"), -6.0);
  EXPECT_DOUBLE_EQ(ev("2^-1"), 0.5);
}

TEST(Expr, FunctionsAndVariables) {
  const Env env{{"x0", 0.5}, {"t", 2.0}};
  EXPECT_DOUBLE_EQ(ev("exp(t) - exp(2 - t)", env), std::exp(2.0) - 1.0);
  EXPECT_DOUBLE_EQ(ev("log(t)", env), std::log(2.0));
  EXPECT_DOUBLE_EQ(ev("sqrt(x0)", env), std::sqrt(0.5));
  EXPECT_DOUBLE_EQ(ev("sin(x0) + cos(x0)", env), std::sin(0.5) + std::cos(0.5));
  EXPECT_DOUBLE_EQ(ev("tanh(1 - t)*x0^2", env), std::tanh(-1.0) * 0.25);
  EXPECT_DOUBLE_EQ(ev("1.5e-3"), 1.5e-3);
  EXPECT_DOUBLE_EQ(ev("2E+2"), 200.0);
}

TEST(Expr, ParseErrorsReportOffset) {
  try {
    Expr::parse("x0 +");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
  try {
    Expr::parse("foo(1)");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  for (const char* bad : {"", "(", ")", "1 +* 2", "x0 x1", "exp 1", "1e", "2..3", "@", "x0)", "sin()", "X0"}) {
    EXPECT_THROW(Expr::parse(bad), ParseError) << bad;
  }
}

TEST(Expr, DomainErrorsNameTheSubexpression) {
  try {
    ev("1 + log(x0 - 1)", Env{{"x0", 1.0}});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.subexpression(), "log(x0 - 1)");
  }
  EXPECT_THROW(ev("1/(t - t)", Env{{"t", 3.0}}), DomainError);
  EXPECT_THROW(ev("sqrt(-1)"), DomainError);
  EXPECT_THROW(ev("(-2)^0.5"), DomainError);
  EXPECT_DOUBLE_EQ(ev("(-2)^3"), -8.0);
  EXPECT_THROW(ev("exp(1000)"), DomainError);
}

TEST(Expr, UnboundVariable) {
  try {
    ev("x0 + y", Env{{"x0", 1.0}});
    FAIL();
  } catch (const UnboundVariable& e) {
    EXPECT_EQ(e.name(), "y");
  }
  EXPECT_THROW(Program(Expr::parse("x3"), VarLayout({"x0"})), UnboundVariable);
}

TEST(Expr, VariablesAreCollected) {
  const auto vars = Expr::parse("xd0*ud0 + t - x0").variables();
  EXPECT_EQ(vars, (std::set<std::string>{"t", "ud0", "x0", "xd0"}));
}

TEST(Expr, GradientMatchesClosedForm) {
  const auto [v, g] = eval_grad(Expr::parse("x0^2*sin(x1) + exp(t*x0)"), Env{{"x0", 0.7}, {"x1", 0.3}, {"t", 1.5}},
                                {"x0", "x1", "t"});
  EXPECT_NEAR(v, 0.49 * std::sin(0.3) + std::exp(1.05), 1e-15);
  EXPECT_NEAR(g[0], 1.4 * std::sin(0.3) + 1.5 * std::exp(1.05), 1e-14);
  EXPECT_NEAR(g[1], 0.49 * std::cos(0.3), 1e-15);
  EXPECT_NEAR(g[2], 0.7 * std::exp(1.05), 1e-14);
}

TEST(Expr, PrintReparseRoundTripProperty) {
  std::mt19937 rng(42);
  const Env env{{"x0", 0.3}, {"x1", -0.7}, {"t", 1.1}};
  for (int i = 0; i < 500; ++i) {
    const std::string text = random_expr(rng, 5);
    const Expr e = Expr::parse(text);
    const Expr back = Expr::parse(e.str());
    EXPECT_EQ(back.str(), e.str()) << text;
    const double a = eval(e, env), b = eval(back, env);
    EXPECT_EQ(a, b) << text << " -> " << e.str();
  }
}

TEST(Expr, ConstantsRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mag(-300, 300);
  for (int i = 0; i < 200; ++i) {
    const double v = std::pow(10.0, mag(rng)) * ((rng() & 1) ? 1.0 : -1.0);
    EXPECT_EQ(eval(Expr::constant(v), {}), v);
    EXPECT_EQ(eval(Expr::parse(Expr::constant(v).str()), {}), v);
  }
}

TEST(Expr, SubstituteShiftsTime) {
  const Expr e = substitute(Expr::parse("exp(t) - t^2"), "t", "t + 1/2");
  EXPECT_NEAR(eval(e, Env{{"t", 1.0}}), std::exp(1.5) - 2.25, 1e-14);
}

TEST(Expr, NestingLimit) {
  std::string deep(150, '(');
  deep += "1";
  deep += std::string(150, ')');
  EXPECT_THROW(Expr::parse(deep), ParseError);
  std::string ok(20, '(');
  ok += "1" + std::string(20, ')');
  EXPECT_DOUBLE_EQ(ev(ok), 1.0);
}

TEST(Expr, FuzzedInputNeverCrashes) {
  std::mt19937 rng(1234);
  const std::string alphabet = "x0123456789+-*/^().e tdusinexpcolgqrh\t\n,;";
  std::size_t len = 1;
  for (int i = 0; i < 400; ++i) {
    std::string s(len, ' ');
    for (auto& c : s) c = alphabet[rng() % alphabet.size()];
    try {
      const Expr e = Expr::parse(s);
      try {
        (void)eval(e, Env{{"x0", 0.5}, {"t", 0.25}, {"d", 1.0}, {"u", 2.0}});
      } catch (const EvalError&) {
      }
    } catch (const ParseError&) {
    }
    len = len * 3 / 2 + 1;
    if (len > 65536) len = 1;
  }
  // A 64 KiB well-formed sum parses and evaluates.
  std::string big = "1";
  while (big.size() < 65536) big += " + 1";
  EXPECT_DOUBLE_EQ(ev(big), static_cast<double>((big.size() + 3) / 4));
}
