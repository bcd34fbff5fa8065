#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "delayoc/corpus.hpp"
#include "delayoc/sufficiency.hpp"
#include "delayoc/transcribe.hpp"

using namespace delayoc;

namespace {

struct Case {
  explicit Case(ProblemDef def) : lattice(build_lattice(def)), problem(std::make_shared<const CompiledProblem>(def)) {}
  DelayLattice lattice;
  std::shared_ptr<const CompiledProblem> problem;
};

std::vector<double> random_z(std::size_t size, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-0.8, 0.8);
  std::vector<double> z(size);
  for (auto& v : z) v = U(rng);
  return z;
}

}  // namespace

TEST(Transcription, Layout) {
  Case c(gollmann().problem);
  const Transcription tr(c.problem, c.lattice, TranscribeConfig{16});
  EXPECT_EQ(tr.size(), 6u * 16u);
  EXPECT_EQ(tr.integrator().substeps_per_h, 64);
  EXPECT_DOUBLE_EQ(tr.sample_width(), 0.5 / 16);
  const Transcription tr48(c.problem, c.lattice, TranscribeConfig{48});
  EXPECT_EQ(tr48.integrator().substeps_per_h, 96);
  EXPECT_THROW(Transcription(c.problem, c.lattice, TranscribeConfig{16, 40}), std::invalid_argument);
}

TEST(Objective, ZeroControl) {
  Case c(gollmann().problem);
  const std::vector<double> z(6 * 16, 0.0);
  EXPECT_NEAR(objective(c.problem, c.lattice, z, TranscribeConfig{16}), 3.0, 1e-14);
}

TEST(Objective, SampledCandidate) {
  const auto entry = gollmann();
  Case c(entry.problem);
  const BoundCandidate cand(c.problem, c.lattice, *entry.candidate);
  const std::int64_t q = 32;
  const double width = 0.5 / q;
  std::vector<double> z(static_cast<std::size_t>(6 * q));
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = cand.u((static_cast<double>(i) + 0.5) * width)[0];
  EXPECT_NEAR(objective(c.problem, c.lattice, z, TranscribeConfig{q}), entry.value("cost").value, 2e-3);
}

TEST(Objective, TerminalPenalty) {
  auto def = gollmann().problem;
  def.terminal = {Interval{0.0, 0.5}};
  Case c(def);
  const Transcription tr(c.problem, c.lattice, TranscribeConfig{8});
  const std::vector<double> z(tr.size(), 0.0);
  EXPECT_NEAR(tr.terminal_residual(z), 0.5, 1e-14);
  EXPECT_NEAR(tr.objective(z), 3.0 + 100.0 * 0.25, 1e-12);
}

TEST(Objective, BlowUpIsInfinite) {
  auto def = gollmann().problem;
  def.f = {Expr::parse("x0^3*(1 + u0)")};
  def.phi = {Expr::parse("4")};
  Case c(def);
  const Transcription tr(c.problem, c.lattice, TranscribeConfig{4});
  const std::vector<double> z(tr.size(), 0.0);
  EXPECT_TRUE(std::isinf(tr.objective(z)));
}

TEST(Objective, Deterministic) {
  Case c(gollmann().problem);
  const Transcription tr(c.problem, c.lattice, TranscribeConfig{8});
  const auto z = random_z(tr.size(), 3);
  EXPECT_EQ(tr.objective(z), tr.objective(z));
  EXPECT_EQ(tr.gradient(z, true), tr.gradient(z, true));
}

TEST(Gradient, MatchesCentralDifferences) {
  Case c(gollmann().problem);
  const Transcription tr(c.problem, c.lattice, TranscribeConfig{4});
  for (unsigned seed : {1u, 2u, 3u}) {
    auto z = random_z(tr.size(), seed);
    const auto g = tr.gradient(z);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double keep = z[i];
      z[i] = keep + 1e-6;
      const double fp = tr.objective(z);
      z[i] = keep - 1e-6;
      const double fm = tr.objective(z);
      z[i] = keep;
      const double fd = (fp - fm) / 2e-6;
      num += (fd - g[i]) * (fd - g[i]);
      den += g[i] * g[i];
    }
    EXPECT_LE(std::sqrt(num / den), 1e-5) << "seed " << seed;
  }
}

TEST(Gradient, SerialAndParallelAgree) {
  Case c(gollmann().problem);
  const Transcription tr(c.problem, c.lattice, TranscribeConfig{8});
  const auto z = random_z(tr.size(), 8);
  EXPECT_EQ(tr.gradient(z, true), tr.gradient(z, false));
}

TEST(Gradient, LqAnalyticAtZero) {
  // x' = u, x(0) = 1, two samples c1, c2. At c = 0 the cost derivative is
  // 2 * int x_c dt, i.e. (3/4, 1/4); Simpson is exact for these quadratics.
  Case c(lq_riccati().problem);
  const std::vector<double> z(2, 0.0);
  const auto g = objective_grad(c.problem, c.lattice, z, TranscribeConfig{2, 4});
  ASSERT_EQ(g.size(), 2u);
  EXPECT_NEAR(g[0], 0.75, 1e-14);
  EXPECT_NEAR(g[1], 0.25, 1e-14);
  const auto g1 = objective_grad(c.problem, c.lattice, std::vector<double>{0.0}, TranscribeConfig{1, 2});
  EXPECT_NEAR(g1[0], 1.0, 1e-14);
}

TEST(Gradient, DeadCoordinatesAreZero) {
  auto def = gollmann().problem;
  def.b = Rational(27, 10);
  Case c(def);
  const Transcription tr(c.problem, c.lattice, TranscribeConfig{10});
  const auto z = random_z(tr.size(), 4);
  const auto g = tr.gradient(z);
  int dead = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double start = static_cast<double>(i) * tr.sample_width();
    EXPECT_EQ(static_cast<bool>(tr.dead()[i]), start >= 2.7 - 1e-12) << i;
    if (tr.dead()[i]) {
      EXPECT_EQ(g[i], 0.0);
      ++dead;
    }
  }
  EXPECT_EQ(dead, 6);
}

TEST(Solve, Gollmann) {
  const auto entry = gollmann();
  Case c(entry.problem);
  SolveOptions opts;
  opts.transcription.q = 16;
  const auto res = solve(c.problem, c.lattice, opts);
  EXPECT_LE(res.cost, 2.82);
  EXPECT_GE(res.cost, entry.value("cost").value - 1e-3);
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.objective, res.cost, 1e-9);
  // Cost reported equals cost_delayed of the unstacked pair.
  const IntegratorConfig cfg{Transcription(c.problem, c.lattice, opts.transcription).integrator()};
  EXPECT_NEAR(cost_delayed(*c.problem, c.lattice, res.trajectory, res.control, cfg), res.cost, 1e-9);
  // The value function bounds the achieved cost from below.
  const BoundCandidate cand(c.problem, c.lattice, *entry.candidate);
  const double gap = std::fabs(res.cost - cand.S(0.0, std::vector<double>{1.0}).value * -1.0);
  EXPECT_LE(gap, (res.cost - entry.value("cost").value) + 1e-3);
}

TEST(Solve, Lq) {
  Case c(lq_riccati().problem);
  SolveOptions opts;
  opts.transcription.q = 16;
  const auto res = solve(c.problem, c.lattice, opts);
  EXPECT_NEAR(res.cost, std::tanh(1.0), 1e-2);
  EXPECT_TRUE(res.converged);
}

TEST(Solve, PureControlPenalty) {
  auto def = gollmann().problem;
  def.f = {Expr::parse("0")};
  def.f0 = Expr::parse("u0^2");
  def.g0 = Expr::parse("x0^2");
  Case c(def);
  SolveOptions opts;
  opts.transcription.q = 4;
  opts.seed = random_z(6 * 4, 5);
  const auto res = solve(c.problem, c.lattice, opts);
  EXPECT_TRUE(res.converged);
  for (double v : res.z) EXPECT_NEAR(v, 0.0, 1e-6);
  EXPECT_NEAR(res.cost, 1.0, 1e-10);
}

TEST(Solve, ObjectiveNeverIncreases) {
  Case c(gollmann().problem);
  SolveOptions opts;
  opts.transcription.q = 4;
  opts.seed = random_z(6 * 4, 6);
  double prev = objective(c.problem, c.lattice, *opts.seed, opts.transcription);
  for (int it = 1; it <= 8; ++it) {
    opts.max_iter = it;
    const auto res = solve(c.problem, c.lattice, opts);
    EXPECT_LE(res.objective, prev) << "iteration " << it;
    prev = res.objective;
  }
}

TEST(Solve, BoundsAreRespected) {
  auto def = gollmann().problem;
  def.omega = {Interval{-0.2, 0.2}};
  Case c(def);
  SolveOptions opts;
  opts.transcription.q = 4;
  const auto res = solve(c.problem, c.lattice, opts);
  for (double v : res.z) {
    EXPECT_GE(v, -0.2);
    EXPECT_LE(v, 0.2);
  }
  EXPECT_NEAR(res.z[0], -0.2, 1e-12);
}

TEST(Solve, DeterministicAcrossRuns) {
  Case c(gollmann().problem);
  SolveOptions opts;
  opts.transcription.q = 4;
  opts.max_iter = 30;
  const auto a = solve(c.problem, c.lattice, opts);
  opts.parallel = false;
  const auto b = solve(c.problem, c.lattice, opts);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.iterations, b.iterations);
}
