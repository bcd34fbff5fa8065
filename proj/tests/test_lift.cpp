#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "delayoc/corpus.hpp"
#include "delayoc/lift.hpp"
#include "delayoc/simsteps.hpp"

using namespace delayoc;

namespace {

struct Fixture {
  CorpusEntry entry = gollmann();
  std::shared_ptr<const CompiledProblem> problem = std::make_shared<const CompiledProblem>(entry.problem);
  DelayLattice lattice = build_lattice(entry.problem);
  LiftedProblem lp = lift_problem(problem, lattice);
};

}  // namespace

TEST(Lift, GollmannWiring) {
  Fixture f;
  EXPECT_EQ(f.lp.stacked_state_dim(), 6);
  EXPECT_EQ(f.lp.stacked_control_dim(), 6);
  EXPECT_EQ(f.lp.history_state_indices(), (std::vector<std::int64_t>{-6, -5, -4, -3, -2, -1}));
  EXPECT_EQ(f.lp.history_control_indices(), (std::vector<std::int64_t>{-4, -3, -2, -1}));
  const auto& w = f.lp.wiring();
  ASSERT_EQ(w.size(), 6u);
  EXPECT_EQ(w[0].delayed_state, (Source{Source::Kind::History, -2}));
  EXPECT_EQ(w[0].delayed_control, (Source{Source::Kind::History, -4}));
  EXPECT_EQ(w[3].delayed_state, (Source{Source::Kind::Block, 1}));
  EXPECT_EQ(w[3].delayed_control, (Source{Source::Kind::History, -1}));
  EXPECT_EQ(w[5].delayed_state, (Source{Source::Kind::Block, 3}));
  EXPECT_EQ(w[5].delayed_control, (Source{Source::Kind::Block, 1}));
  EXPECT_EQ(w[4].time_offset, Rational(2));
  EXPECT_EQ(f.lp.terminal_block(), 5);

  std::vector<double> v(1);
  for (auto i : f.lp.history_state_indices()) {
    for (double t : {0.0, 0.25, 0.5}) {
      f.lp.history_state(i, t, v);
      EXPECT_EQ(v[0], 1.0);
    }
  }
  for (auto i : f.lp.history_control_indices()) {
    f.lp.history_control(i, 0.3, v);
    EXPECT_EQ(v[0], 0.0);
  }
  const std::string dump = f.lp.dump();
  EXPECT_NE(dump.find("history -2"), std::string::npos);
  EXPECT_NE(dump.find("N = 6"), std::string::npos);
}

TEST(Lift, WiringIndicesAlwaysResolve) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> d(0, 6);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = gollmann().problem;
    p.r = Rational(d(rng), 2);
    p.s = Rational(d(rng), 3);
    if (p.r.is_zero() && p.s.is_zero()) p.s = Rational(1);
    p.b = Rational(7);
    auto prob = std::make_shared<const CompiledProblem>(p);
    const auto lat = build_lattice(p);
    const auto lp = lift_problem(prob, lat);
    for (const auto& w : lp.wiring()) {
      for (const auto& [src, delay] : {std::pair{w.delayed_state, lat.k}, std::pair{w.delayed_control, lat.l}}) {
        if (delay == 0) {
          EXPECT_EQ(src.kind, Source::Kind::Self);
        } else if (w.block - delay >= 0) {
          EXPECT_EQ(src, (Source{Source::Kind::Block, w.block - delay}));
        } else {
          EXPECT_EQ(src, (Source{Source::Kind::History, w.block - delay}));
          EXPECT_GE(src.index, -lat.k - lat.l);
        }
      }
    }
  }
}

TEST(Lift, StackControlOfCandidate) {
  Fixture f;
  const BoundCandidate cand(f.problem, f.lattice, *f.entry.candidate);
  const auto theta = stack_control(cand.control(), f.lp);
  EXPECT_EQ(theta.blocks(), 6);
  for (double t : {0.0, 0.1, 0.37, 0.5}) {
    EXPECT_NEAR(theta.at(0, t)[0], cand.u(t)[0], 1e-15);
    EXPECT_NEAR(theta.at(1, t)[0], cand.u(t + 0.5)[0], 1e-14);
    for (int i = 2; i < 6; ++i) EXPECT_NEAR(theta.at(i, t)[0], 0.0, 1e-15);
  }
  EXPECT_EQ(theta.at(-2, 0.2)[0], 0.0);
}

TEST(Lift, StackUnstackControlRoundTrip) {
  Fixture f;
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<double> z(6 * 4);
  for (auto& v : z) v = U(rng);
  const auto u = ControlSignal::sampled(f.problem, f.lattice, 4, z);
  const auto back = unstack_control(stack_control(u, f.lp));
  EXPECT_EQ(back.samples(), u.samples());

  const BoundCandidate cand(f.problem, f.lattice, *f.entry.candidate);
  const auto pieces = unstack_control(stack_control(cand.control(), f.lp));
  for (int j = 0; j <= 300; ++j) {
    const double t = 3.0 * j / 300;
    EXPECT_NEAR(pieces.at(t)[0], cand.control().at(t)[0], 1e-15);
  }
}

TEST(Lift, StackUnstackStateIsExact) {
  Fixture f;
  const BoundCandidate cand(f.problem, f.lattice, *f.entry.candidate);
  const auto x = integrate_dde(f.problem, f.lattice, cand.control(), IntegratorConfig{32});
  const auto back = unstack_state(stack_state(x, f.lp), f.lp);
  for (std::int64_t j = 0; j < x.node_count(); ++j) EXPECT_EQ(back.node(j)[0], x.node(j)[0]);
}

TEST(Lift, ConstantBlocksUnstackToConstant) {
  Fixture f;
  StackedPath<double> path(6, 8, 1, 0.0, 0.5 / 8);
  for (std::int64_t i = 0; i < 6; ++i) {
    for (std::int64_t j = 0; j <= 8; ++j) path.node(i, j)[0] = 2.5;
  }
  const auto x = unstack_state(path, f.lp);
  for (std::int64_t j = 0; j < x.node_count(); ++j) EXPECT_EQ(x.node(j)[0], 2.5);
}

TEST(Lift, LinkViolationIsReported) {
  Fixture f;
  StackedPath<double> path(6, 8, 1, 0.0, 0.5 / 8);
  for (std::int64_t i = 0; i < 6; ++i) {
    for (std::int64_t j = 0; j <= 8; ++j) path.node(i, j)[0] = static_cast<double>(i);
  }
  EXPECT_THROW(unstack_state(path, f.lp), ModelError);
}
