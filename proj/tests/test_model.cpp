#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "delayoc/corpus.hpp"
#include "delayoc/model.hpp"
#include "delayoc/simsteps.hpp"

using namespace delayoc;

namespace {

ProblemDef scalar(Rational a, Rational b, Rational r, Rational s) {
  ProblemDef p = gollmann().problem;
  p.a = a;
  p.b = b;
  p.r = r;
  p.s = s;
  return p;
}

void expect_lattice_invariants(const ProblemDef& p, const DelayLattice& lat) {
  EXPECT_EQ(p.r - lat.h * Rational(lat.k), Rational(0));
  EXPECT_EQ(p.s - lat.h * Rational(lat.l), Rational(0));
  EXPECT_EQ(lat.a + lat.h * Rational(lat.N), lat.b_tilde);
  EXPECT_GE(lat.b_tilde, p.b);
  EXPECT_GE(lat.N, 2 * lat.k + 2);
}

}  // namespace

TEST(Lattice, GollmannNeedsRefinement) {
  const auto p = gollmann().problem;
  const auto lat = build_lattice(p);
  EXPECT_EQ(lat.h, Rational(1, 2));
  EXPECT_EQ(lat.k, 2);
  EXPECT_EQ(lat.l, 4);
  EXPECT_EQ(lat.N, 6);
  EXPECT_EQ(lat.b_tilde, Rational(3));
  expect_lattice_invariants(p, lat);
}

TEST(Lattice, HorizonExtension) {
  const auto p = scalar(0, Rational(27, 10), 1, 2);
  const auto lat = build_lattice(p);
  EXPECT_EQ(lat.h, Rational(1, 2));
  EXPECT_EQ(lat.N, 6);
  EXPECT_EQ(lat.b_tilde, Rational(3));
  expect_lattice_invariants(p, lat);
}

TEST(Lattice, EqualDelaysNoRefinement) {
  const auto p = scalar(0, 10, 1, 1);
  const auto lat = build_lattice(p);
  EXPECT_EQ(lat.h, Rational(1));
  EXPECT_EQ(lat.k, 1);
  EXPECT_EQ(lat.l, 1);
  EXPECT_EQ(lat.N, 10);
}

TEST(Lattice, InvariantsOnRandomProblems) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> num(0, 12), den(1, 6), span(1, 40);
  for (int i = 0; i < 300; ++i) {
    Rational r(num(rng), den(rng)), s(num(rng), den(rng));
    if (r.is_zero() && s.is_zero()) r = Rational(1);
    // The horizon must exceed 2r for a lattice to exist.
    const Rational b = Rational(-1, 3) + r * Rational(2) + Rational(span(rng), den(rng));
    const auto p = scalar(Rational(-1, 3), b, r, s);
    const auto lat = build_lattice(p);
    expect_lattice_invariants(p, lat);
    // Delayed lookups from any node land on a node or in history when the step divides h.
    const StepGrid grid(lat, 16);
    for (std::int64_t j = 0; j <= grid.steps; ++j) {
      const std::int64_t back = j - lat.k * grid.substeps;
      if (back >= 0) EXPECT_NEAR(grid.time(back), grid.time(j) - r.to_double(), 1e-12);
    }
  }
}

TEST(Lattice, ShortHorizonIsRejected) {
  EXPECT_THROW(build_lattice(scalar(0, 2, 1, 2)), ModelError);
}

TEST(Lattice, DegenerateIsOneBlock) {
  const auto p = lq_riccati().problem;
  const auto lat = build_lattice(p);
  EXPECT_EQ(lat.N, 1);
  EXPECT_EQ(lat.k, 0);
  EXPECT_EQ(lat.l, 0);
  EXPECT_EQ(lat.h, Rational(1));
}

TEST(Validate, CorpusEntriesAreClean) {
  EXPECT_TRUE(validate_problem(gollmann().problem).empty());
  EXPECT_TRUE(validate_problem(lq_riccati().problem).empty());
}

TEST(Validate, ForbiddenVariable) {
  auto p = gollmann().problem;
  p.f0 = Expr::parse("x0^2 + eta0");
  const auto d = validate_problem(p);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0], "f0: variable eta0 not permitted");
}

TEST(Validate, BothDelaysZeroNeedsDegenerateFlag) {
  auto p = scalar(0, 3, 0, 0);
  const auto d = validate_problem(p);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NE(d[0].find("delays must not both be zero"), std::string::npos);
  p.degenerate = true;
  EXPECT_TRUE(validate_problem(p).empty());
}

TEST(Validate, ReportsEachProblem) {
  auto p = gollmann().problem;
  p.b = Rational(0);
  p.r = Rational(-1);
  p.g0 = Expr::parse("u0");
  p.phi = {Expr::parse("x0")};
  const auto d = validate_problem(p);
  EXPECT_EQ(d.size(), 4u);
  EXPECT_EQ(validate_problem(p), d);  // idempotent
  EXPECT_THROW(build_lattice(p), ModelError);
  EXPECT_THROW(CompiledProblem{p}, ModelError);
}

TEST(Validate, NonFiniteInitialState) {
  auto p = gollmann().problem;
  p.phi = {Expr::parse("log(t)")};
  const auto d = validate_problem(p);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NE(d[0].find("phi1"), std::string::npos);
}

TEST(Signal, HistoryLookups) {
  const auto c = gollmann();
  auto prob = std::make_shared<const CompiledProblem>(c.problem);
  const auto lat = build_lattice(c.problem);
  const auto u = ControlSignal::zero(prob, lat);
  EXPECT_EQ(u.at(-1.0)[0], 0.0);
  const auto x = integrate_dde(prob, lat, u, IntegratorConfig{16});
  EXPECT_EQ(x.at(-0.5)[0], 1.0);
  EXPECT_EQ(x.at(0.0)[0], 1.0);
  EXPECT_THROW(x.at(-3.5), ModelError);
  EXPECT_THROW(x.at(3.5), ModelError);
}

TEST(Signal, SampledIsLeftContinuous) {
  const auto c = gollmann();
  auto prob = std::make_shared<const CompiledProblem>(c.problem);
  const auto lat = build_lattice(c.problem);
  std::vector<double> z(12);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = static_cast<double>(i);
  const auto u = ControlSignal::sampled(prob, lat, 2, z);
  EXPECT_EQ(u.at(0.0)[0], 0.0);
  EXPECT_EQ(u.at(0.1)[0], 0.0);
  EXPECT_EQ(u.at(0.25)[0], 0.0);   // left-continuous at the sample boundary
  EXPECT_EQ(u.at(0.26)[0], 1.0);
  EXPECT_EQ(u.at(3.0)[0], 11.0);
  EXPECT_THROW(ControlSignal::sampled(prob, lat, 2, std::vector<double>(5)), ModelError);
}

TEST(Signal, TrajectoryNodesAreBitIdentical) {
  const auto c = gollmann();
  auto prob = std::make_shared<const CompiledProblem>(c.problem);
  const auto lat = build_lattice(c.problem);
  const BoundCandidate cand(prob, lat, *c.candidate);
  const auto x = integrate_dde(prob, lat, cand.control(), IntegratorConfig{32});
  for (std::int64_t j = 0; j < x.node_count(); ++j) {
    EXPECT_EQ(x.at(x.grid().time(j))[0], x.node(j)[0]);
  }
  // Linear between nodes.
  const double t = x.grid().time(100) + 0.25 * x.grid().dt;
  EXPECT_DOUBLE_EQ(x.at(t)[0], 0.75 * x.node(100)[0] + 0.25 * x.node(101)[0]);
}

TEST(Piecewise, LookupAndCoverage) {
  const VarLayout tl({"t"});
  Piecewise pw({{0, 1, {Expr::parse("t")}}, {1, 3, {Expr::parse("2*t")}}}, tl);
  EXPECT_EQ(pw.index_at(0.5), 0);
  EXPECT_EQ(pw.index_at(1.0), 0);
  EXPECT_EQ(pw.index_at(2.0), 1);
  EXPECT_EQ(pw.index_at(3.5), -1);
  EXPECT_EQ(pw.index_for(1.0, 1.5), 1);
  EXPECT_TRUE(pw.coverage_problem(0, 3).empty());
  EXPECT_FALSE(pw.coverage_problem(0, 4).empty());
  Piecewise gap({{0, 1, {Expr::parse("t")}}, {2, 3, {Expr::parse("t")}}}, tl);
  EXPECT_NE(gap.coverage_problem(0, 3).find("gap"), std::string::npos);
  EXPECT_THROW(Piecewise({{1, 1, {Expr::parse("t")}}}, tl), ModelError);
}
