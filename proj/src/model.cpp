#include "delayoc/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "delayoc/hermite.hpp"

namespace delayoc {

namespace {

constexpr std::int64_t kMaxRefinement = 1024;
constexpr double kPieceTol = 1e-12;

std::vector<std::string> indexed(const std::string& prefix, int count) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

void check_vars(const std::string& field, const Expr& e, const std::set<std::string>& allowed,
                std::vector<std::string>& diags) {
  for (const auto& v : e.variables()) {
    if (!allowed.contains(v)) diags.push_back(field + ": variable " + v + " not permitted");
  }
}

void check_bounds(const std::string& field, const std::vector<Bound>& bounds, std::vector<std::string>& diags) {
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (bounds[i] && !(bounds[i]->lo <= bounds[i]->hi)) {
      diags.push_back(field + "[" + std::to_string(i + 1) + "]: lower bound exceeds upper bound");
    }
  }
}

}  // namespace

VarLayout standard_layout(int n, int m) {
  std::vector<std::string> names{"t"};
  for (const auto& prefix : {"x", "xd"}) {
    auto v = indexed(prefix, n);
    names.insert(names.end(), v.begin(), v.end());
  }
  for (const auto& prefix : {"u", "ud"}) {
    auto v = indexed(prefix, m);
    names.insert(names.end(), v.begin(), v.end());
  }
  auto eta = indexed("eta", n);
  names.insert(names.end(), eta.begin(), eta.end());
  return VarLayout(std::move(names));
}

std::vector<std::string> validate_problem(const ProblemDef& p) {
  std::vector<std::string> diags;
  if (p.n < 1) diags.push_back("n: state dimension must be positive");
  if (p.m < 1) diags.push_back("m: control dimension must be positive");
  if (!(p.b > p.a)) diags.push_back("b: horizon end must exceed a");
  if (p.r.is_negative()) diags.push_back("r: state delay must be nonnegative");
  if (p.s.is_negative()) diags.push_back("s: control delay must be nonnegative");
  const bool both_zero = p.r.is_zero() && p.s.is_zero();
  if (both_zero && !p.degenerate) {
    diags.push_back("r, s: delays must not both be zero "
                    "(enable degenerate mode for a non-delayed problem)");
  }
  if (!both_zero && p.degenerate) diags.push_back("degenerate: degenerate mode requires r = s = 0");
  if (p.n < 1 || p.m < 1) return diags;

  auto size_check = [&](const std::string& field, std::size_t got, int want) {
    if (got != static_cast<std::size_t>(want)) {
      diags.push_back(field + ": expected " + std::to_string(want) + " entries, got " + std::to_string(got));
    }
  };
  size_check("f", p.f.size(), p.n);
  size_check("phi", p.phi.size(), p.n);
  size_check("psi", p.psi.size(), p.m);
  size_check("omega", p.omega.size(), p.m);
  size_check("terminal", p.terminal.size(), p.n);

  std::set<std::string> dyn_vars{"t"};
  std::set<std::string> state_vars;
  for (const auto& v : indexed("x", p.n)) {
    dyn_vars.insert(v);
    state_vars.insert(v);
  }
  for (const auto& prefix : {"xd", "u", "ud"}) {
    for (const auto& v : indexed(prefix, prefix[0] == 'x' ? p.n : p.m)) dyn_vars.insert(v);
  }
  const std::set<std::string> time_only{"t"};

  check_vars("f0", p.f0, dyn_vars, diags);
  for (std::size_t i = 0; i < p.f.size(); ++i) check_vars("f" + std::to_string(i + 1), p.f[i], dyn_vars, diags);
  check_vars("g0", p.g0, state_vars, diags);
  for (std::size_t i = 0; i < p.phi.size(); ++i) check_vars("phi" + std::to_string(i + 1), p.phi[i], time_only, diags);
  for (std::size_t j = 0; j < p.psi.size(); ++j) check_vars("psi" + std::to_string(j + 1), p.psi[j], time_only, diags);
  check_bounds("omega", p.omega, diags);
  check_bounds("terminal", p.terminal, diags);

  if (diags.empty()) {
    for (std::size_t i = 0; i < p.phi.size(); ++i) {
      try {
        const double xa = eval(p.phi[i], Env{{"t", p.a.to_double()}});
        if (!std::isfinite(xa)) diags.push_back("phi" + std::to_string(i + 1) + ": x_a is not finite");
      } catch (const EvalError& e) {
        diags.push_back("phi" + std::to_string(i + 1) + ": x_a = phi(a) cannot be evaluated: " + e.what());
      }
    }
  }
  return diags;
}

DelayLattice build_lattice(const ProblemDef& p) {
  if (auto diags = validate_problem(p); !diags.empty()) {
    std::string msg = "invalid problem:";
    for (const auto& d : diags) msg += "\n  " + d;
    throw ModelError(msg);
  }
  DelayLattice lat;
  lat.a = p.a;
  if (p.degenerate) {
    lat.h = p.b - p.a;
    lat.k = 0;
    lat.l = 0;
    lat.N = 1;
    lat.b_tilde = p.b;
    return lat;
  }
  const Rational h0 = gcd_rational(p.r, p.s);
  const Rational span = p.b - p.a;
  for (std::int64_t d = 1; d <= kMaxRefinement; ++d) {
    const Rational h = h0 / Rational(d);
    const Rational k = p.r / h;
    const Rational l = p.s / h;
    const std::int64_t N = (span / h).ceil();
    if (N > 2 * k.num() + 1) {
      lat.h = h;
      lat.k = k.num();
      lat.l = l.num();
      lat.N = N;
      lat.b_tilde = p.a + h * Rational(N);
      return lat;
    }
  }
  throw ModelError("no lattice step h = gcd(r, s)/d with d <= " + std::to_string(kMaxRefinement) +
                   " satisfies N > 2k + 1; the horizon b - a is too short relative to r");
}

StepGrid::StepGrid(const DelayLattice& lattice, std::int64_t substeps_per_h)
    : a(lattice.a.to_double()),
      h(lattice.h.to_double()),
      dt(h / static_cast<double>(substeps_per_h)),
      substeps(substeps_per_h),
      steps(lattice.N * substeps_per_h) {
  if (substeps_per_h < 1) throw std::invalid_argument("substeps per lattice interval must be positive");
}

CompiledProblem::CompiledProblem(ProblemDef def) : def_(std::move(def)) {
  if (auto diags = validate_problem(def_); !diags.empty()) {
    std::string msg = "invalid problem:";
    for (const auto& d : diags) msg += "\n  " + d;
    throw ModelError(msg);
  }
  layout_ = standard_layout(def_.n, def_.m);
  f0_ = Program(def_.f0, layout_);
  for (const auto& e : def_.f) f_.emplace_back(e, layout_);
  g0_ = Program(def_.g0, VarLayout(indexed("x", def_.n)));
  const VarLayout time_layout({"t"});
  for (const auto& e : def_.phi) phi_.emplace_back(e, time_layout);
  for (const auto& e : def_.psi) psi_.emplace_back(e, time_layout);
}

void CompiledProblem::history_state(double t, std::span<double> out) const {
  const double slot[1] = {t};
  for (std::size_t i = 0; i < phi_.size(); ++i) out[i] = phi_[i].run<double>(slot);
}

void CompiledProblem::history_control(double t, std::span<double> out) const {
  const double slot[1] = {t};
  for (std::size_t j = 0; j < psi_.size(); ++j) out[j] = psi_[j].run<double>(slot);
}

std::vector<double> CompiledProblem::initial_state() const {
  std::vector<double> xa(static_cast<std::size_t>(def_.n));
  history_state(def_.a.to_double(), xa);
  return xa;
}

Piecewise::Piecewise(std::vector<Piece> pieces, const VarLayout& layout) : pieces_(std::move(pieces)) {
  for (const auto& p : pieces_) {
    if (!(p.t0 < p.t1)) throw ModelError("piece [" + p.t0.str() + ", " + p.t1.str() + "] is empty");
    if (width_ == 0) width_ = p.exprs.size();
    if (p.exprs.size() != width_ || width_ == 0) throw ModelError("pieces carry inconsistent component counts");
    std::vector<Program> progs;
    for (const auto& e : p.exprs) progs.emplace_back(e, layout);
    programs_.push_back(std::move(progs));
    spans_.emplace_back(p.t0.to_double(), p.t1.to_double());
  }
}

int Piecewise::index_at(double t) const {
  for (std::size_t i = 0; i < spans_.size(); ++i) {
    const double tol = kPieceTol * std::max(1.0, std::fabs(t));
    if (t >= spans_[i].first - tol && t <= spans_[i].second + tol) return static_cast<int>(i);
  }
  return -1;
}

int Piecewise::index_for(double lo, double hi) const { return index_at(0.5 * (lo + hi)); }

std::vector<double> Piecewise::breakpoints() const {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < spans_.size(); ++i) out.push_back(spans_[i].second);
  return out;
}

std::string Piecewise::coverage_problem(const Rational& lo, const Rational& hi) const {
  if (pieces_.empty()) return "no pieces";
  if (pieces_.front().t0 > lo) return "pieces start at " + pieces_.front().t0.str() + " after " + lo.str();
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
    if (pieces_[i + 1].t0 > pieces_[i].t1) {
      return "gap between " + pieces_[i].t1.str() + " and " + pieces_[i + 1].t0.str();
    }
    if (pieces_[i + 1].t0 < pieces_[i].t0) return "pieces are not increasing";
  }
  Rational reach = pieces_.front().t1;
  for (const auto& p : pieces_) reach = std::max(reach, p.t1);
  if (reach < hi) return "pieces end at " + reach.str() + " before " + hi.str();
  return {};
}

ControlSignal ControlSignal::zero(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice) {
  const auto count = static_cast<std::size_t>(lattice.N * problem->m());
  return sampled(std::move(problem), lattice, 1, std::vector<double>(count, 0.0));
}

ControlSignal ControlSignal::from_pieces(std::shared_ptr<const CompiledProblem> problem,
                                         const DelayLattice& lattice, std::vector<Piece> pieces) {
  ControlSignal sig;
  sig.a_ = lattice.a.to_double();
  sig.h_ = lattice.h.to_double();
  sig.lo_ = (lattice.a - problem->def().s).to_double();
  sig.hi_ = lattice.b_tilde.to_double();
  for (const auto& p : pieces) {
    if (p.exprs.size() != static_cast<std::size_t>(problem->m())) {
      throw ModelError("control piece has " + std::to_string(p.exprs.size()) + " components, expected " +
                       std::to_string(problem->m()));
    }
  }
  sig.pieces_ = Piecewise(std::move(pieces), VarLayout({"t"}));
  if (auto gap = sig.pieces_.coverage_problem(lattice.a, lattice.b_tilde); !gap.empty()) {
    throw ModelError("control pieces do not cover [a, b~]: " + gap);
  }
  sig.problem_ = std::move(problem);
  return sig;
}

ControlSignal ControlSignal::sampled(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice,
                                     std::int64_t q, std::vector<double> values) {
  if (q < 1) throw ModelError("samples per lattice interval must be positive");
  const auto want = static_cast<std::size_t>(q * lattice.N * problem->m());
  if (values.size() != want) {
    throw ModelError("sampled control needs " + std::to_string(want) + " values, got " +
                     std::to_string(values.size()));
  }
  ControlSignal sig;
  sig.a_ = lattice.a.to_double();
  sig.h_ = lattice.h.to_double();
  sig.lo_ = (lattice.a - problem->def().s).to_double();
  sig.hi_ = lattice.b_tilde.to_double();
  sig.samples_per_h_ = q;
  sig.samples_ = std::move(values);
  sig.problem_ = std::move(problem);
  return sig;
}

std::vector<double> ControlSignal::at(double t) const {
  const auto m = static_cast<std::size_t>(problem_->m());
  std::vector<double> out(m);
  const double tol = kPieceTol * std::max(1.0, std::fabs(t));
  if (t < lo_ - tol || t > hi_ + tol) {
    std::ostringstream os;
    os << "control lookup at t = " << t << " outside [" << lo_ << ", " << hi_ << "]";
    throw ModelError(os.str());
  }
  if (t < a_) {
    problem_->history_control(t, out);
    return out;
  }
  if (is_sampled()) {
    const double width = h_ / static_cast<double>(samples_per_h_);
    const auto total = static_cast<std::int64_t>(samples_.size() / m);
    auto idx = static_cast<std::int64_t>(std::ceil((t - a_) / width)) - 1;
    idx = std::clamp<std::int64_t>(idx, 0, total - 1);
    std::copy_n(samples_.begin() + idx * static_cast<std::int64_t>(m), m, out.begin());
    return out;
  }
  const int idx = pieces_.index_at(t);
  if (idx < 0) throw ModelError("no control piece covers t = " + std::to_string(t));
  const double slot[1] = {t};
  pieces_.eval_piece<double>(idx, slot, out);
  return out;
}

void ControlSignal::stage(const StepGrid& grid, std::int64_t step, double tau, std::span<double> out) const {
  if (step < 0) {
    problem_->history_control(tau, out);
    return;
  }
  if (is_sampled()) {
    if (grid.substeps % samples_per_h_ != 0) {
      throw ModelError("integration substeps (" + std::to_string(grid.substeps) +
                       ") must be a multiple of the control samples per interval (" +
                       std::to_string(samples_per_h_) + ")");
    }
    const std::int64_t idx = step / (grid.substeps / samples_per_h_);
    const auto m = static_cast<std::size_t>(problem_->m());
    std::copy_n(samples_.begin() + idx * static_cast<std::int64_t>(m), m, out.begin());
    return;
  }
  const int idx = pieces_.index_for(grid.time(step), grid.time(step + 1));
  if (idx < 0) throw ModelError("no control piece covers step starting at t = " + std::to_string(grid.time(step)));
  const double slot[1] = {tau};
  pieces_.eval_piece<double>(idx, slot, out);
}

Trajectory::Trajectory(std::shared_ptr<const CompiledProblem> problem, StepGrid grid)
    : problem_(std::move(problem)), grid_(grid), n_(problem_->n()) {
  const auto& def = problem_->def();
  lo_ = (def.a - def.r - def.s).to_double();
  values_.assign(static_cast<std::size_t>((grid_.steps + 1) * n_), 0.0);
  dleft_.assign(static_cast<std::size_t>(grid_.steps * n_), 0.0);
  dright_.assign(static_cast<std::size_t>(grid_.steps * n_), 0.0);
}

void Trajectory::interpolate(std::int64_t step, double theta, std::span<double> out) const {
  auto y0 = node(step);
  auto y1 = node(step + 1);
  auto m0 = slope_left(step);
  auto m1 = slope_right(step);
  for (int i = 0; i < n_; ++i) out[i] = hermite(y0[i], m0[i], y1[i], m1[i], grid_.dt, theta);
}

std::vector<double> Trajectory::at(double t) const {
  std::vector<double> out(static_cast<std::size_t>(n_));
  const double end = grid_.time(grid_.steps);
  const double tol = kPieceTol * std::max(1.0, std::fabs(t));
  if (t < lo_ - tol || t > end + tol) {
    std::ostringstream os;
    os << "state lookup at t = " << t << " outside [" << lo_ << ", " << end << "]";
    throw ModelError(os.str());
  }
  if (t <= grid_.a) {
    problem_->history_state(t, out);
    return out;
  }
  const double pos = (t - grid_.a) / grid_.dt;
  auto j = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(pos)), 0, grid_.steps);
  if (grid_.time(j) == t) {
    auto v = node(j);
    std::copy(v.begin(), v.end(), out.begin());
    return out;
  }
  if (j + 1 <= grid_.steps && grid_.time(j + 1) == t) {
    auto v = node(j + 1);
    std::copy(v.begin(), v.end(), out.begin());
    return out;
  }
  j = std::min(j, grid_.steps - 1);
  const double w = std::clamp((t - grid_.time(j)) / grid_.dt, 0.0, 1.0);
  auto y0 = node(j);
  auto y1 = node(j + 1);
  for (int i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] = (1.0 - w) * y0[i] + w * y1[i];
  return out;
}

}  // namespace delayoc
