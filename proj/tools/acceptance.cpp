// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "delayoc/corpus.hpp"
#include "delayoc/lift.hpp"
#include "delayoc/simsteps.hpp"
#include "delayoc/sufficiency.hpp"
#include "delayoc/transcribe.hpp"

using namespace delayoc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_ms;  // <= 0: no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct Gollmann {
  CorpusEntry entry = gollmann();
  std::shared_ptr<const CompiledProblem> problem = std::make_shared<const CompiledProblem>(entry.problem);
  DelayLattice lattice = build_lattice(entry.problem);
};

double exact_x(double t) {
  return t <= 2.0 ? 1.0 : (std::exp(t - 2.0) + std::exp(4.0 - t)) / (std::exp(2.0) + 1.0);
}

double sup_error(const Trajectory& x) {
  double err = 0.0;
  for (std::int64_t j = 0; j < x.node_count(); ++j) {
    const double t = x.grid().time(j);
    if (t > 3.0 + 1e-12) break;
    err = std::max(err, std::fabs(x.node(j)[0] - exact_x(t)));
  }
  return err;
}

Outcome lattice() {
  const auto p = gollmann().problem;
  const auto lat = build_lattice(p);
  const bool shape = lat.h == Rational(1, 2) && lat.k == 2 && lat.l == 4 && lat.N == 6 && lat.b_tilde == Rational(3);
  const bool exact = lat.h * Rational(lat.k) == p.r && lat.h * Rational(lat.l) == p.s && lat.N > 2 * lat.k + 1;
  return {shape && exact, "h = " + lat.h.str() + ", k = " + std::to_string(lat.k) + ", l = " + std::to_string(lat.l) +
                              ", N = " + std::to_string(lat.N) + ", b~ = " + lat.b_tilde.str()};
}

Outcome simulation() {
  Gollmann g;
  const BoundCandidate cand(g.problem, g.lattice, *g.entry.candidate);
  const double err128 = sup_error(integrate_dde(g.problem, g.lattice, cand.control(), IntegratorConfig{128}));
  double min_ratio = INFINITY, prev = 0.0;
  for (std::int64_t sub : {8, 16, 32, 64}) {
    const double e = sup_error(integrate_dde(g.problem, g.lattice, cand.control(), IntegratorConfig{sub}));
    if (prev > 0.0) min_ratio = std::min(min_ratio, prev / e);
    prev = e;
  }
  return {err128 <= 1e-5 && min_ratio >= 12.0, fmt("sup error %.2e at 128 steps, min halving ratio %.1f", err128, min_ratio)};
}

Outcome cost_identity() {
  Gollmann g;
  const BoundCandidate cand(g.problem, g.lattice, *g.entry.candidate);
  const auto ci = cost_identity_gap(cand, IntegratorConfig{128});
  // -S(0, 1) = -(eta1(0) + c1(0)) straight from the coefficient formulas.
  const double e2 = std::exp(2.0), d = e2 + 1.0;
  const double eta1 = 5.0 + 2.0 * (e2 - 1.0) / (d * d);
  const double c1 = (1.0 - std::exp(4.0) - 15.0 * std::exp(4.0) - 32.0 * e2 - 9.0) / (2.0 * d * d);
  const double minus_s = -(eta1 + c1);
  const double ref = g.entry.value("cost").value;
  const bool ok = std::fabs(ci.cost - ref) <= 1e-3 && std::fabs(ci.cost - minus_s) <= 1e-3 &&
                  std::fabs(ci.minus_S_a - minus_s) <= 1e-9;
  return {ok, fmt("C_D = %.9f, -S(0,1) = %.9f, gap %.2e", ci.cost, minus_s, std::fabs(ci.cost - minus_s))};
}

Outcome hj() {
  Gollmann g;
  const BoundCandidate cand(g.problem, g.lattice, *g.entry.candidate);
  const double base = hj_residual(cand, 32).max_abs;
  double weakest = INFINITY;
  for (std::size_t piece = 0; piece < g.entry.candidate->S.size(); ++piece) {
    auto c = *g.entry.candidate;
    c.S[piece].exprs[0] = Expr::parse("(" + c.S[piece].exprs[0].str() + ") + 0.01*t");
    const BoundCandidate broken(g.problem, g.lattice, c);
    weakest = std::min(weakest, hj_residual(broken, 32).max_abs);
  }
  return {base <= 1e-6 && weakest > 9e-3, fmt("max residual %.2e, smallest perturbed residual %.2e", base, weakest)};
}

Outcome boundary() {
  Gollmann g;
  const BoundCandidate cand(g.problem, g.lattice, *g.entry.candidate);
  const auto b = boundary_gap(cand);
  return {std::fabs(b.S_b) <= 1e-12 && b.g0_b == 0.0 && b.in_terminal_set,
          fmt("|S(3, x*(3))| = %.2e, g0 = %.1f", std::fabs(b.S_b), b.g0_b)};
}

Outcome maximality() {
  Gollmann g;
  const BoundCandidate cand(g.problem, g.lattice, *g.entry.candidate);
  VerifyOptions opts = g.entry.verify;
  opts.search.box = Interval{-2.0, 2.0};
  opts.convention = Convention::Minus;
  const double minus = verify_all(cand, opts).maximality_worst_gap;
  opts.convention = Convention::Plus;
  const double plus = verify_all(cand, opts).maximality_worst_gap;
  return {minus <= 1e-6 && plus > 0.1, fmt("worst gap minus %.2e, plus %.4f", minus, plus)};
}

Outcome lift_equivalence() {
  Gollmann g;
  const auto lp = lift_problem(g.problem, g.lattice);
  const IntegratorConfig cfg{32};
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  double node_err = 0.0, cost_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.6f*sin(%.6f*t) + %.6f*cos(t) + %.6f", c(rng), 3.0 * c(rng), c(rng), c(rng));
    const auto u = ControlSignal::from_pieces(g.problem, g.lattice, {Piece{0, 3, {Expr::parse(buf)}}});
    const auto x = integrate_dde(g.problem, g.lattice, u, cfg);
    const auto theta = stack_control(u, lp);
    const auto path = integrate_lifted(lp, theta, cfg);
    const auto back = unstack_state(path, lp);
    for (std::int64_t j = 0; j < x.node_count(); ++j) node_err = std::max(node_err, std::fabs(back.node(j)[0] - x.node(j)[0]));
    cost_err = std::max(cost_err, std::fabs(cost_lifted(lp, path, theta, cfg) - cost_delayed(*g.problem, g.lattice, x, u, cfg)));
  }
  return {node_err <= 1e-9 && cost_err <= 1e-9, fmt("max node error %.2e, max cost error %.2e", node_err, cost_err)};
}

Outcome solver() {
  Gollmann g;
  SolveOptions opts;
  opts.transcription.q = 16;
  opts.max_iter = 2000;
  const auto rg = solve(g.problem, g.lattice, opts);
  const auto lq = lq_riccati();
  auto lqp = std::make_shared<const CompiledProblem>(lq.problem);
  const auto rl = solve(lqp, build_lattice(lq.problem), opts);
  const bool ok = rg.cost <= 2.82 && std::fabs(rl.cost - std::tanh(1.0)) <= 1e-2;
  return {ok, fmt("gollmann cost %.6f, lq cost %.6f (tanh 1 = %.6f)", rg.cost, rl.cost, std::tanh(1.0))};
}

Outcome ad_gradient() {
  Gollmann g;
  const Transcription tr(g.problem, g.lattice, TranscribeConfig{4});
  std::mt19937 rng(10);
  std::uniform_real_distribution<double> U(-0.8, 0.8);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    std::vector<double> z(tr.size());
    for (auto& v : z) v = U(rng);
    const auto grad = tr.gradient(z);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double keep = z[i];
      z[i] = keep + 1e-6;
      const double fp = tr.objective(z);
      z[i] = keep - 1e-6;
      const double fm = tr.objective(z);
      z[i] = keep;
      const double fd = (fp - fm) / 2e-6;
      num += (fd - grad[i]) * (fd - grad[i]);
      den += grad[i] * grad[i];
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  return {worst <= 1e-5, fmt("worst relative error %.2e over 10 random vectors", worst)};
}

Outcome degenerate() {
  const auto lq = lq_riccati();
  auto problem = std::make_shared<const CompiledProblem>(lq.problem);
  const BoundCandidate cand(problem, build_lattice(lq.problem), *lq.candidate);
  VerifyOptions opts = lq.verify;
  opts.tol.hj = 1e-8;
  const auto rep = verify_all(cand, opts);
  return {rep.pass() && rep.degenerate,
          fmt("hj %.2e, maximality %.2e, cost gap %.2e", rep.hj_max_residual, rep.maximality_worst_gap,
              rep.cost_identity_gap)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "lattice", 1.0, lattice},
      {2, "candidate simulation", 1000.0, simulation},
      {3, "cost identity", 1000.0, cost_identity},
      {4, "hj residual", 1000.0, hj},
      {5, "boundary", 0.0, boundary},
      {6, "maximality", 0.0, maximality},
      {7, "lift equivalence", 10000.0, lift_equivalence},
      {8, "solver", 120000.0, solver},
      {9, "ad gradient", 0.0, ad_gradient},
      {10, "degenerate path", 0.0, degenerate},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_ms <= 0.0 || ms <= c.budget_ms;
    const bool pass = out.pass && in_time;
    if (!pass) ++failed;
    std::printf("[%s] %2d %-21s %9.2f ms  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, ms, out.detail.c_str(),
                in_time ? "" : " (over time budget)");
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
