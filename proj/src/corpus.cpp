#include "delayoc/corpus.hpp"

#include <cmath>
#include <stdexcept>

namespace delayoc {

namespace {

Piece piece(Rational t0, Rational t1, std::initializer_list<const char*> exprs) {
  Piece p{t0, t1, {}};
  for (const char* e : exprs) p.exprs.push_back(Expr::parse(e));
  return p;
}

// Shorthand for the recurring factor (e^2 + 1).
constexpr const char* kE2p1 = "(exp(2) + 1)";

std::string with_e(std::string text) {
  const std::string key = "E2P1";
  for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos)) {
    text.replace(pos, key.size(), kE2p1);
  }
  return text;
}

Piece piece_s(Rational t0, Rational t1, const std::string& text) {
  return Piece{t0, t1, {Expr::parse(with_e(text))}};
}

}  // namespace

const ExpectedValue& CorpusEntry::value(std::string_view key) const {
  for (const auto& e : expected) {
    if (e.key == key) return e;
  }
  throw std::invalid_argument("no expected value '" + std::string(key) + "' for " + name);
}

CorpusEntry gollmann() {
  CorpusEntry c;
  c.name = "gollmann";
  c.description = "scalar problem with state delay 1 and control delay 2 on [0, 3]";

  ProblemDef& p = c.problem;
  p.name = "gollmann";
  p.n = 1;
  p.m = 1;
  p.a = Rational(0);
  p.b = Rational(3);
  p.r = Rational(1);
  p.s = Rational(2);
  p.f0 = Expr::parse("x0^2 + u0^2");
  p.f = {Expr::parse("xd0*ud0")};
  p.g0 = Expr::parse("0");
  p.phi = {Expr::parse("1")};
  p.psi = {Expr::parse("0")};
  p.omega = {std::nullopt};
  p.terminal = {std::nullopt};

  CandidateSolution cand;
  cand.x_star = {piece(0, 2, {"1"}), piece_s(2, 3, "(exp(t - 2) + exp(4 - t))/E2P1")};
  cand.u_star = {piece_s(0, 1, "(exp(t) - exp(2 - t))/E2P1"), piece(1, 3, {"0"})};

  const std::string eta1 = "(-2*t + 5 + 2*(exp(2) - 1)/E2P1^2)";
  const std::string eta2 =
      "(-(4*exp(2)/E2P1^2 + 2)*t + 4*(exp(2) - 1)/E2P1^2 + 6 + (exp(2*t - 2) - exp(6 - 2*t))/E2P1^2)";
  const std::string eta3 = "(2*(exp(4 - t) - exp(t - 2))/E2P1)";
  const std::string c1 =
      "((2*t*(3*exp(4) + 4*exp(2) + 3) + exp(2*t) - exp(4 - 2*t) - 15*exp(4) - 32*exp(2) - 9)/(2*E2P1^2))";
  const std::string c2 =
      "((2*t*(3*exp(4) + 10*exp(2) + 3) + 2*(exp(6 - 2*t) - exp(2*t - 2)) - 17*exp(4) - 44*exp(2) - 7)"
      "/(2*E2P1^2))";
  const std::string c3 = "((4*exp(2)*(t - 3) + 5*(exp(2*t - 4) - exp(8 - 2*t)))/(2*E2P1^2))";
  cand.S = {piece_s(0, 1, eta1 + "*x0 + " + c1), piece_s(1, 2, eta2 + "*x0 + " + c2),
            piece_s(2, 3, eta3 + "*x0 + " + c3)};
  c.candidate = std::move(cand);

  c.verify.tol = Tolerances{1e-6, 1e-9, 1e-6, 1e-3};
  c.verify.convention = Convention::Minus;
  c.verify.search.box = Interval{-2.0, 2.0};

  const double e2 = std::exp(2.0);
  c.expected = {
      {"cost", 2.0 + std::tanh(1.0), 1e-3,
       "C_D[u*] = 2 + tanh(1); independent high-precision quadrature of the closed-form candidate"},
      {"minus_S_a", 2.0 + std::tanh(1.0), 1e-9, "-S(0, 1) = -(eta1(0) + c1(0)) from the value function coefficients"},
      {"x_b", 2.0 * std::exp(1.0) / (e2 + 1.0), 1e-6, "x*(3) = 2e/(e^2 + 1) from the closed-form trajectory"},
      {"x_2.5", (std::exp(0.5) + std::exp(1.5)) / (e2 + 1.0), 1e-12, "x*(2.5) = (e^0.5 + e^1.5)/(e^2 + 1)"},
      {"u_0", (1.0 - e2) / (e2 + 1.0), 1e-12, "u*(0) = (1 - e^2)/(e^2 + 1) = -tanh(1)"},
      {"plus_gap_0", 4.0 * std::pow(std::tanh(1.0), 2), 1e-6,
       "with eta = +dS/dx the maximizer at t = 0 is -u*(0); gap = 4 u*(0)^2"},
  };
  return c;
}

CorpusEntry lq_riccati() {
  CorpusEntry c;
  c.name = "lq";
  c.description = "non-delayed LQ problem with a Riccati value function (degenerate mode)";

  ProblemDef& p = c.problem;
  p.name = "lq";
  p.n = 1;
  p.m = 1;
  p.a = Rational(0);
  p.b = Rational(1);
  p.r = Rational(0);
  p.s = Rational(0);
  p.f0 = Expr::parse("x0^2 + u0^2");
  p.f = {Expr::parse("u0")};
  p.g0 = Expr::parse("0");
  p.phi = {Expr::parse("1")};
  p.psi = {Expr::parse("0")};
  p.omega = {std::nullopt};
  p.terminal = {std::nullopt};
  p.degenerate = true;

  CandidateSolution cand;
  cand.x_star = {piece(0, 1, {"(exp(1 - t) + exp(t - 1))/(exp(1) + exp(-1))"})};
  cand.u_star = {piece(0, 1, {"-(exp(1 - t) - exp(t - 1))/(exp(1) + exp(-1))"})};
  cand.S = {piece(0, 1, {"-tanh(1 - t)*x0^2"})};
  cand.feedback = {Expr::parse("-tanh(1 - t)*x0")};
  c.candidate = std::move(cand);

  c.verify.tol = Tolerances{1e-8, 1e-9, 1e-6, 1e-4};
  c.verify.convention = Convention::Plus;
  c.verify.search.box = Interval{-2.0, 2.0};

  c.expected = {
      {"cost", std::tanh(1.0), 1e-4, "Riccati solution p(t) = tanh(1 - t) of -p' = 1 - p^2, p(1) = 0"},
      {"minus_S_a", std::tanh(1.0), 1e-12, "-S(0, 1) = tanh(1)"},
      {"x_b", 1.0 / std::cosh(1.0), 1e-6, "x*(1) = 1/cosh(1)"},
  };
  return c;
}

std::vector<std::string> corpus_names() { return {"gollmann", "lq"}; }

CorpusEntry corpus_entry(std::string_view name) {
  if (name == "gollmann") return gollmann();
  if (name == "lq" || name == "lq_riccati") return lq_riccati();
  throw std::invalid_argument("unknown example '" + std::string(name) + "' (available: gollmann, lq)");
}

}  // namespace delayoc
