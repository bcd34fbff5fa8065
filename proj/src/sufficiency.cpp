#include "delayoc/sufficiency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace delayoc {

namespace {

constexpr double kBreakTol = 1e-9;
constexpr double kGolden = 0.6180339887498949;

VarLayout s_layout(int n) {
  std::vector<std::string> names{"t"};
  for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
  return VarLayout(std::move(names));
}

Piecewise compile_pieces(const std::vector<Piece>& pieces, const VarLayout& layout, std::size_t width,
                         const char* what, const Rational& lo, const Rational& hi) {
  if (pieces.empty()) throw VerificationError(std::string(what) + ": no pieces");
  for (const auto& p : pieces) {
    if (p.exprs.size() != width) {
      throw VerificationError(std::string(what) + ": piece [" + p.t0.str() + ", " + p.t1.str() + "] has " +
                              std::to_string(p.exprs.size()) + " components, expected " + std::to_string(width));
    }
  }
  try {
    Piecewise pw(pieces, layout);
    if (auto gap = pw.coverage_problem(lo, hi); !gap.empty()) {
      throw VerificationError(std::string(what) + ": pieces do not cover [" + lo.str() + ", " + hi.str() +
                              "]: " + gap);
    }
    return pw;
  } catch (const ModelError& e) {
    throw VerificationError(std::string(what) + ": " + e.what());
  } catch (const UnboundVariable& e) {
    throw VerificationError(std::string(what) + ": " + e.what());
  }
}

bool near_any(double t, const std::vector<double>& points, double tol) {
  return std::any_of(points.begin(), points.end(), [&](double p) { return std::fabs(t - p) <= tol; });
}

/// Per-time data needed to evaluate M(u) for the maximality check.
struct MaxContext {
  const CompiledProblem* p = nullptr;
  bool two_terms = false;
  bool share_control = false;  // s = 0: u(t - s) is u(t)
  std::vector<double> slots1, slots2;
  std::vector<double> eta1, eta2;

  double hamiltonian(std::vector<double>& slots, const std::vector<double>& eta) const {
    double h = -p->running_cost<double>(slots);
    std::vector<double> f(static_cast<std::size_t>(p->n()));
    p->dynamics<double>(slots, f);
    for (std::size_t i = 0; i < f.size(); ++i) h += eta[i] * f[i];
    return h;
  }

  double M(std::span<const double> u) {
    for (int j = 0; j < p->m(); ++j) {
      slots1[p->u_slot(j)] = u[static_cast<std::size_t>(j)];
      if (share_control) slots1[p->ud_slot(j)] = u[static_cast<std::size_t>(j)];
    }
    double v = hamiltonian(slots1, eta1);
    if (two_terms) {
      for (int j = 0; j < p->m(); ++j) slots2[p->ud_slot(j)] = u[static_cast<std::size_t>(j)];
      v += hamiltonian(slots2, eta2);
    }
    return v;
  }
};

void put(const CompiledProblem& p, std::vector<double>& slots, double t, const std::vector<double>& x,
         const std::vector<double>& xd, const std::vector<double>& u, const std::vector<double>& ud) {
  slots.assign(p.slot_count(), 0.0);
  slots[CompiledProblem::t_slot()] = t;
  for (int i = 0; i < p.n(); ++i) {
    slots[p.x_slot(i)] = x[static_cast<std::size_t>(i)];
    slots[p.xd_slot(i)] = xd[static_cast<std::size_t>(i)];
  }
  for (int j = 0; j < p.m(); ++j) {
    slots[p.u_slot(j)] = u[static_cast<std::size_t>(j)];
    slots[p.ud_slot(j)] = ud[static_cast<std::size_t>(j)];
  }
}

template <class F>
double golden_max(F&& f, double lo, double hi, double& arg) {
  double c = hi - kGolden * (hi - lo);
  double d = lo + kGolden * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && hi - lo > 1e-13 * std::max(1.0, std::fabs(lo) + std::fabs(hi)); ++it) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kGolden * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kGolden * (hi - lo);
      fd = f(d);
    }
  }
  if (fc >= fd) {
    arg = c;
    return fc;
  }
  arg = d;
  return fd;
}

}  // namespace

std::string to_string(Convention c) {
  switch (c) {
    case Convention::Plus:
      return "plus";
    case Convention::Minus:
      return "minus";
    case Convention::Auto:
      return "auto";
  }
  return "?";
}

Convention parse_convention(std::string_view text) {
  if (text == "plus") return Convention::Plus;
  if (text == "minus") return Convention::Minus;
  if (text == "auto") return Convention::Auto;
  throw std::invalid_argument("convention must be plus, minus or auto (got '" + std::string(text) + "')");
}

BoundCandidate::BoundCandidate(std::shared_ptr<const CompiledProblem> problem, DelayLattice lattice,
                               CandidateSolution cand, IntegratorConfig cfg)
    : problem_(std::move(problem)), lattice_(std::move(lattice)), cand_(std::move(cand)) {
  const auto& def = problem_->def();
  const int n = def.n;
  const int m = def.m;
  a_ = def.a.to_double();
  b_ = def.b.to_double();
  const VarLayout time_layout({"t"});
  const VarLayout sl = s_layout(n);

  u_pw_ = compile_pieces(cand_.u_star, time_layout, static_cast<std::size_t>(m), "ustar", def.a, def.b);
  S_pw_ = compile_pieces(cand_.S, sl, 1, "S", def.a, def.b);
  if (!cand_.x_star.empty()) {
    x_pw_ = compile_pieces(cand_.x_star, time_layout, static_cast<std::size_t>(n), "xstar", def.a, def.b);
  }
  if (!cand_.dS_dt.empty()) dSdt_pw_ = compile_pieces(cand_.dS_dt, sl, 1, "dSdt", def.a, def.b);
  if (!cand_.dS_dx.empty()) {
    dSdx_pw_ = compile_pieces(cand_.dS_dx, sl, static_cast<std::size_t>(n), "dSdx", def.a, def.b);
  }
  if (!cand_.feedback.empty()) {
    if (cand_.feedback.size() != static_cast<std::size_t>(m)) {
      throw VerificationError("feedback: expected " + std::to_string(m) + " components");
    }
    const VarLayout fl = problem_->layout();
    for (const auto& e : cand_.feedback) {
      for (const auto& v : e.variables()) {
        if (v.rfind("u", 0) == 0 || v.rfind("ud", 0) == 0) {
          throw VerificationError("feedback: variable " + v + " not permitted");
        }
      }
      try {
        feedback_.emplace_back(e, fl);
      } catch (const UnboundVariable& err) {
        throw VerificationError(std::string("feedback: ") + err.what());
      }
    }
  }

  // u* must stay inside Omega; checked on a fixed sample of each piece.
  for (std::size_t pi = 0; pi < cand_.u_star.size(); ++pi) {
    const double t0 = cand_.u_star[pi].t0.to_double();
    const double t1 = cand_.u_star[pi].t1.to_double();
    std::vector<double> val(static_cast<std::size_t>(m));
    for (int q = 0; q <= 64; ++q) {
      const double slot[1] = {t0 + (t1 - t0) * q / 64.0};
      u_pw_.eval_piece<double>(static_cast<int>(pi), slot, val);
      for (int j = 0; j < m; ++j) {
        const auto& om = def.omega[static_cast<std::size_t>(j)];
        if (om && !(val[j] >= om->lo - 1e-12 && val[j] <= om->hi + 1e-12)) {
          std::ostringstream os;
          os << "ustar: component " << j << " = " << val[j] << " at t = " << slot[0] << " outside Omega [" << om->lo
             << ", " << om->hi << "]";
          throw VerificationError(os.str());
        }
      }
    }
  }

  std::vector<Piece> extended = cand_.u_star;
  auto last = std::max_element(extended.begin(), extended.end(),
                               [](const Piece& l, const Piece& r) { return l.t1 < r.t1; });
  if (last->t1 < lattice_.b_tilde) last->t1 = lattice_.b_tilde;
  control_.emplace(ControlSignal::from_pieces(problem_, lattice_, std::move(extended)));

  if (cand_.x_star.empty()) sim_.emplace(integrate_dde(problem_, lattice_, *control_, cfg));

  s_breaks_ = S_pw_.breakpoints();
}

std::vector<double> BoundCandidate::x(double t) const {
  std::vector<double> out(static_cast<std::size_t>(problem_->n()));
  if (t <= a_) {
    problem_->history_state(t, out);
    return out;
  }
  if (sim_) {
    const auto& g = sim_->grid();
    auto j = static_cast<std::int64_t>(std::floor((t - g.a) / g.dt));
    j = std::clamp<std::int64_t>(j, 0, g.steps - 1);
    const double theta = std::clamp((t - g.time(j)) / g.dt, 0.0, 1.0);
    sim_->interpolate(j, theta, out);
    return out;
  }
  const int idx = x_pw_.index_at(t);
  if (idx < 0) {
    std::ostringstream os;
    os << "xstar undefined at t = " << t;
    throw VerificationError(os.str());
  }
  const double slot[1] = {t};
  x_pw_.eval_piece<double>(idx, slot, out);
  return out;
}

std::vector<double> BoundCandidate::u(double t) const {
  std::vector<double> out(static_cast<std::size_t>(problem_->m()));
  if (t < a_) {
    problem_->history_control(t, out);
    return out;
  }
  const int idx = u_pw_.index_at(t);
  if (idx < 0) {
    std::ostringstream os;
    os << "ustar undefined at t = " << t;
    throw VerificationError(os.str());
  }
  const double slot[1] = {t};
  u_pw_.eval_piece<double>(idx, slot, out);
  return out;
}

SJet BoundCandidate::S(double t, std::span<const double> x) const {
  const int idx = S_pw_.index_at(t);
  if (idx < 0) {
    std::ostringstream os;
    os << "S undefined at t = " << t;
    throw VerificationError(os.str());
  }
  return S_piece(idx, t, x);
}

SJet BoundCandidate::S_piece(int piece, double t, std::span<const double> x) const {
  const int n = problem_->n();
  SJet jet;
  jet.dx.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> slots(static_cast<std::size_t>(n) + 1);
  slots[0] = t;
  std::copy(x.begin(), x.end(), slots.begin() + 1);
  double v[1];
  S_pw_.eval_piece<double>(piece, slots, v);
  jet.value = v[0];

  auto pick = [&](const Piecewise& pw) {
    const int i = pw.index_at(t);
    if (i < 0) throw VerificationError("closed-form S derivative undefined at a requested time");
    return i;
  };
  std::vector<Dual> dslots(slots.size());
  Dual dv[1];
  if (!dSdt_pw_.empty()) {
    dSdt_pw_.eval_piece<double>(pick(dSdt_pw_), slots, v);
    jet.dt = v[0];
  } else {
    for (std::size_t c = 0; c < slots.size(); ++c) dslots[c] = Dual(slots[c], c == 0 ? 1.0 : 0.0);
    S_pw_.eval_piece<Dual>(piece, dslots, dv);
    jet.dt = dv[0].d;
  }
  if (!dSdx_pw_.empty()) {
    dSdx_pw_.eval_piece<double>(pick(dSdx_pw_), slots, jet.dx);
  } else {
    for (int i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < slots.size(); ++c) {
        dslots[c] = Dual(slots[c], c == static_cast<std::size_t>(i) + 1 ? 1.0 : 0.0);
      }
      S_pw_.eval_piece<Dual>(piece, dslots, dv);
      jet.dx[static_cast<std::size_t>(i)] = dv[0].d;
    }
  }
  return jet;
}

std::vector<double> BoundCandidate::feedback(double t, std::span<const double> x, std::span<const double> xd,
                                             std::span<const double> eta) const {
  if (feedback_.empty()) return {};
  const auto& p = *problem_;
  std::vector<double> slots(p.slot_count(), 0.0);
  slots[CompiledProblem::t_slot()] = t;
  for (int i = 0; i < p.n(); ++i) {
    slots[p.x_slot(i)] = x[static_cast<std::size_t>(i)];
    slots[p.xd_slot(i)] = xd[static_cast<std::size_t>(i)];
    slots[p.eta_slot(i)] = eta[static_cast<std::size_t>(i)];
  }
  std::vector<double> out;
  for (const auto& prog : feedback_) out.push_back(prog.run<double>(slots));
  return out;
}

double BoundCandidate::s_continuity_gap() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < s_breaks_.size(); ++i) {
    const double t = s_breaks_[i];
    const auto xt = x(t);
    const double left = S_piece(static_cast<int>(i), t, xt).value;
    const double right = S_piece(static_cast<int>(i) + 1, t, xt).value;
    worst = std::max(worst, std::fabs(left - right));
  }
  return worst;
}

HjResult hj_residual(const BoundCandidate& cand, int density, bool parallel) {
  if (density < 1) throw std::invalid_argument("grid density must be positive");
  const auto& p = cand.problem();
  const auto& lat = cand.lattice();
  const double a = lat.a.to_double();
  const double h = lat.h.to_double();
  const double b = p.def().b.to_double();
  const double r = p.def().r.to_double();
  const double s = p.def().s.to_double();

  std::vector<double> times;
  for (std::int64_t i = 0; i < lat.N; ++i) {
    for (int q = 0; q < density; ++q) {
      const double t = a + h * (static_cast<double>(i) + (q + 0.5) / density);
      if (t >= b) continue;
      if (near_any(t, cand.s_breakpoints(), kBreakTol)) continue;
      times.push_back(t);
    }
  }

  HjResult out;
  out.times = times;
  out.residuals.assign(times.size(), 0.0);
  const auto count = static_cast<std::int64_t>(times.size());
  std::exception_ptr failure;

#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t idx = 0; idx < count; ++idx) {
    try {
      const double t = times[static_cast<std::size_t>(idx)];
      const auto x = cand.x(t);
      const auto xd = cand.x(t - r);
      const auto u = cand.u(t);
      const auto ud = cand.u(t - s);
      std::vector<double> slots;
      put(p, slots, t, x, xd, u, ud);
      const SJet jet = cand.S(t, x);
      std::vector<double> f(static_cast<std::size_t>(p.n()));
      p.dynamics<double>(slots, f);
      double res = jet.dt - p.running_cost<double>(slots);
      for (std::size_t c = 0; c < f.size(); ++c) res += jet.dx[c] * f[c];
      out.residuals[static_cast<std::size_t>(idx)] = res;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::fabs(out.residuals[i]) > out.max_abs) {
      out.max_abs = std::fabs(out.residuals[i]);
      out.worst_time = times[i];
    }
  }
  return out;
}

BoundaryResult boundary_gap(const BoundCandidate& cand) {
  const auto& p = cand.problem();
  const double b = p.def().b.to_double();
  BoundaryResult out;
  out.x_b = cand.x(b);
  out.S_b = cand.S(b, out.x_b).value;
  out.g0_b = p.terminal_cost<double>(out.x_b);
  out.gap = std::fabs(out.S_b + out.g0_b);
  for (std::size_t i = 0; i < out.x_b.size(); ++i) {
    const auto& bound = p.def().terminal[i];
    if (bound && !(out.x_b[i] >= bound->lo - 1e-9 && out.x_b[i] <= bound->hi + 1e-9)) out.in_terminal_set = false;
  }
  return out;
}

MaximalityPoint maximality_gap(const BoundCandidate& cand, double t, Convention convention,
                               const SearchBox& search) {
  if (convention == Convention::Auto) throw std::invalid_argument("maximality_gap needs plus or minus");
  const auto& p = cand.problem();
  const auto& def = p.def();
  const int n = def.n;
  const int m = def.m;
  const double sigma = convention == Convention::Plus ? 1.0 : -1.0;
  const double r = def.r.to_double();
  const double s = def.s.to_double();
  const double b = def.b.to_double();

  std::vector<Interval> box(static_cast<std::size_t>(m));
  std::vector<bool> free_dim(static_cast<std::size_t>(m), false);
  for (int j = 0; j < m; ++j) {
    const auto& bound = def.omega[static_cast<std::size_t>(j)];
    if (bound) {
      box[static_cast<std::size_t>(j)] = *bound;
    } else if (search.box) {
      box[static_cast<std::size_t>(j)] = *search.box;
      free_dim[static_cast<std::size_t>(j)] = true;
    } else {
      throw VerificationError("control u" + std::to_string(j) +
                              " is unconstrained; maximality needs a search box");
    }
  }

  MaxContext ctx;
  ctx.p = &p;
  ctx.share_control = cand.lattice().l == 0;
  ctx.two_terms = !def.degenerate && !ctx.share_control && t <= b - s + 1e-12;

  const auto x = cand.x(t);
  const auto ustar = cand.u(t);
  const auto jet = cand.S(t, x);
  ctx.eta1.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ctx.eta1[static_cast<std::size_t>(i)] = sigma * jet.dx[static_cast<std::size_t>(i)];
  put(p, ctx.slots1, t, x, cand.x(t - r), ustar, cand.u(t - s));
  if (ctx.two_terms) {
    const double ts = t + s;
    const auto xs = cand.x(ts);
    const auto jet2 = cand.S(ts, xs);
    ctx.eta2.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ctx.eta2[static_cast<std::size_t>(i)] = sigma * jet2.dx[static_cast<std::size_t>(i)];
    put(p, ctx.slots2, ts, xs, cand.x(ts - r), cand.u(ts), ustar);
  }

  MaximalityPoint out;
  out.t = t;
  out.candidate = ustar;
  const double m_star = ctx.M(ustar);

  // Coarse grid, capped at about 2^18 points overall.
  int pts = std::max(2, search.grid_points);
  while (m > 1 && std::pow(static_cast<double>(pts), m) > 262144.0 && pts > 5) --pts;
  std::vector<double> u(static_cast<std::size_t>(m)), best_u = ustar;
  double best = m_star;
  std::vector<int> counter(static_cast<std::size_t>(m), 0);
  auto grid_value = [&](int j, int c) {
    const auto& iv = box[static_cast<std::size_t>(j)];
    return iv.lo + (iv.hi - iv.lo) * c / (pts - 1);
  };
  bool grid_done = false;
  std::vector<double> grid_best_u;
  double grid_best = -std::numeric_limits<double>::infinity();
  while (!grid_done) {
    for (int j = 0; j < m; ++j) u[static_cast<std::size_t>(j)] = grid_value(j, counter[static_cast<std::size_t>(j)]);
    const double v = ctx.M(u);
    if (v > grid_best) {
      grid_best = v;
      grid_best_u = u;
    }
    int j = 0;
    while (j < m && ++counter[static_cast<std::size_t>(j)] == pts) counter[static_cast<std::size_t>(j++)] = 0;
    grid_done = j == m;
  }

  // Cyclic golden-section refinement within one grid cell of the best point.
  u = grid_best_u;
  double val = grid_best;
  for (int cycle = 0; cycle < (m == 1 ? 1 : 6); ++cycle) {
    for (int j = 0; j < m; ++j) {
      const auto& iv = box[static_cast<std::size_t>(j)];
      const double cell = (iv.hi - iv.lo) / (pts - 1);
      const double lo = std::max(iv.lo, u[static_cast<std::size_t>(j)] - cell);
      const double hi = std::min(iv.hi, u[static_cast<std::size_t>(j)] + cell);
      auto line = [&](double z) {
        std::vector<double> w = u;
        w[static_cast<std::size_t>(j)] = z;
        return ctx.M(w);
      };
      double arg = u[static_cast<std::size_t>(j)];
      const double v = golden_max(line, lo, hi, arg);
      if (v > val) {
        val = v;
        u[static_cast<std::size_t>(j)] = arg;
      }
    }
  }
  if (val > best) {
    best = val;
    best_u = u;
  }

  // Growth beyond the user box on free components signals an unbounded M.
  for (int j = 0; j < m; ++j) {
    if (!free_dim[static_cast<std::size_t>(j)]) continue;
    const auto& iv = box[static_cast<std::size_t>(j)];
    const double cell = (iv.hi - iv.lo) / (pts - 1);
    const double uj = best_u[static_cast<std::size_t>(j)];
    for (double edge : {iv.lo, iv.hi}) {
      if (std::fabs(uj - edge) > cell) continue;
      std::vector<double> w = best_u;
      w[static_cast<std::size_t>(j)] = edge + (edge - 0.5 * (iv.lo + iv.hi));
      if (ctx.M(w) > best + 1e-9 * std::max(1.0, std::fabs(best))) {
        std::ostringstream os;
        os << "maximality objective grows beyond the search box at t = " << t << " (component u" << j
           << "); widen the box or bound omega";
        throw VerificationError(os.str());
      }
    }
  }

  out.gap = best - m_star;
  out.argmax = best_u;
  return out;
}

CostIdentity cost_identity_gap(const BoundCandidate& cand, const IntegratorConfig& cfg) {
  const auto& p = cand.problem();
  const Trajectory traj = integrate_dde(cand.problem_ptr(), cand.lattice(), cand.control(), cfg);
  CostIdentity out;
  out.cost = cost_delayed(p, cand.lattice(), traj, cand.control(), cfg);
  const double a = p.def().a.to_double();
  const auto xa = p.initial_state();
  out.minus_S_a = -cand.S(a, xa).value;
  out.gap = std::fabs(out.cost - out.minus_S_a);
  return out;
}

std::vector<double> maximality_grid(const BoundCandidate& cand, int density) {
  if (density < 1) throw std::invalid_argument("grid density must be positive");
  const auto& def = cand.problem().def();
  const auto& lat = cand.lattice();
  const double a = lat.a.to_double();
  const double h = lat.h.to_double();
  const double b = def.b.to_double();
  const double bs = def.degenerate ? b : (def.b - def.s).to_double();
  std::vector<double> times;
  for (std::int64_t i = 0; i <= lat.N * density; ++i) {
    const double t = a + h * static_cast<double>(i) / density;
    if (t > b + 1e-12) break;
    if (near_any(t, cand.s_breakpoints(), kBreakTol)) continue;
    times.push_back(std::min(t, b));
  }
  for (double e : {a, bs}) {
    if (!near_any(e, times, 1e-12)) times.push_back(e);
  }
  std::sort(times.begin(), times.end());
  return times;
}

namespace {

struct Sweep {
  double worst = 0.0;
  double worst_time = 0.0;
};

Sweep sweep(const BoundCandidate& cand, const std::vector<double>& times, Convention c, const SearchBox& box,
            bool parallel) {
  std::vector<double> gaps(times.size(), 0.0);
  const auto count = static_cast<std::int64_t>(times.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      gaps[static_cast<std::size_t>(i)] = maximality_gap(cand, times[static_cast<std::size_t>(i)], c, box).gap;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  Sweep out;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (gaps[i] > out.worst) {
      out.worst = gaps[i];
      out.worst_time = times[i];
    }
  }
  return out;
}

}  // namespace

VerificationReport verify_all(const BoundCandidate& cand, const VerifyOptions& opts) {
  VerificationReport rep;
  rep.tol = opts.tol;
  rep.degenerate = cand.problem().def().degenerate;
  rep.convention_requested = opts.convention;

  const auto hj = hj_residual(cand, opts.hj_density, opts.parallel);
  rep.hj_max_residual = hj.max_abs;
  rep.hj_worst_time = hj.worst_time;

  const auto bd = boundary_gap(cand);
  rep.boundary_gap = bd.gap;
  rep.terminal_in_set = bd.in_terminal_set;

  const auto times = maximality_grid(cand, opts.max_density);
  if (opts.convention == Convention::Auto) {
    const Sweep minus = sweep(cand, times, Convention::Minus, opts.search, opts.parallel);
    const Sweep plus = sweep(cand, times, Convention::Plus, opts.search, opts.parallel);
    const bool use_plus = plus.worst < minus.worst;
    const Sweep& chosen = use_plus ? plus : minus;
    rep.convention_used = use_plus ? Convention::Plus : Convention::Minus;
    rep.maximality_worst_gap = chosen.worst;
    rep.maximality_worst_time = chosen.worst_time;
    rep.maximality_other_gap = use_plus ? minus.worst : plus.worst;
  } else {
    const Sweep one = sweep(cand, times, opts.convention, opts.search, opts.parallel);
    rep.convention_used = opts.convention;
    rep.maximality_worst_gap = one.worst;
    rep.maximality_worst_time = one.worst_time;
  }

  if (cand.has_feedback()) {
    const double sigma = rep.convention_used == Convention::Plus ? 1.0 : -1.0;
    const double r = cand.problem().def().r.to_double();
    double worst = 0.0;
    for (double t : times) {
      const auto x = cand.x(t);
      const auto jet = cand.S(t, x);
      std::vector<double> eta = jet.dx;
      for (auto& e : eta) e *= sigma;
      const auto fb = cand.feedback(t, x, cand.x(t - r), eta);
      const auto us = cand.u(t);
      for (std::size_t j = 0; j < fb.size(); ++j) worst = std::max(worst, std::fabs(fb[j] - us[j]));
    }
    rep.feedback_gap = worst;
  }

  const auto ci = cost_identity_gap(cand, opts.cfg);
  rep.cost = ci.cost;
  rep.minus_S_a = ci.minus_S_a;
  rep.cost_identity_gap = ci.gap;
  rep.s_continuity_gap = cand.s_continuity_gap();

  rep.hj_pass = rep.hj_max_residual <= opts.tol.hj;
  rep.boundary_pass = rep.boundary_gap <= opts.tol.boundary && rep.terminal_in_set;
  rep.maximality_pass = rep.maximality_worst_gap <= opts.tol.maximality;
  rep.cost_pass = rep.cost_identity_gap <= opts.tol.cost;
  return rep;
}

}  // namespace delayoc
