#include "delayoc/lift.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace delayoc {

namespace {

Source resolve(std::int64_t block, std::int64_t delay_blocks) {
  if (delay_blocks == 0) return {Source::Kind::Self, block};
  const std::int64_t idx = block - delay_blocks;
  if (idx >= 0) return {Source::Kind::Block, idx};
  return {Source::Kind::History, idx};
}

std::string describe(const Source& s) {
  switch (s.kind) {
    case Source::Kind::Self:
      return "self";
    case Source::Kind::Block:
      return "block " + std::to_string(s.index);
    case Source::Kind::History:
      return "history " + std::to_string(s.index);
  }
  return "?";
}

}  // namespace

LiftedProblem::LiftedProblem(std::shared_ptr<const CompiledProblem> base, DelayLattice lattice,
                             std::vector<BlockWiring> wiring)
    : base_(std::move(base)), lattice_(std::move(lattice)), wiring_(std::move(wiring)), h_(lattice_.h.to_double()) {}

std::vector<std::int64_t> LiftedProblem::history_state_indices() const {
  std::vector<std::int64_t> out;
  for (std::int64_t i = -lattice_.k - lattice_.l; i <= -1; ++i) out.push_back(i);
  return out;
}

std::vector<std::int64_t> LiftedProblem::history_control_indices() const {
  std::vector<std::int64_t> out;
  for (std::int64_t i = -lattice_.l; i <= -1; ++i) out.push_back(i);
  return out;
}

void LiftedProblem::history_state(std::int64_t index, double t_local, std::span<double> out) const {
  base_->history_state(t_local + h_ * static_cast<double>(index), out);
}

void LiftedProblem::history_control(std::int64_t index, double t_local, std::span<double> out) const {
  base_->history_control(t_local + h_ * static_cast<double>(index), out);
}

std::string LiftedProblem::dump() const {
  std::ostringstream os;
  const auto& lat = lattice_;
  os << "lifted problem on [" << lat.a << ", " << (lat.a + lat.h) << "]\n";
  os << "  h = " << lat.h << ", k = " << lat.k << ", l = " << lat.l << ", N = " << lat.N << "\n";
  os << "  stacked state dimension   = " << stacked_state_dim() << "\n";
  os << "  stacked control dimension = " << stacked_control_dim() << "\n";
  os << "  history state blocks      = ";
  auto hs = history_state_indices();
  if (hs.empty()) os << "none";
  else os << hs.front() << ".." << hs.back();
  os << " (phi(t + h i))\n";
  os << "  history control blocks    = ";
  auto hc = history_control_indices();
  if (hc.empty()) os << "none";
  else os << hc.front() << ".." << hc.back();
  os << " (psi(t + h i))\n";
  os << "  terminal cost reads block " << terminal_block() << "\n";
  os << "  links: xi_i(a+h) = xi_{i+1}(a) for i = 0.." << (lat.N - 2) << "\n\n";
  os << std::left << std::setw(7) << "block" << std::setw(12) << "offset" << std::setw(16) << "x(t-r) from"
     << "u(t-s) from\n";
  for (const auto& w : wiring_) {
    os << std::left << std::setw(7) << w.block << std::setw(12) << w.time_offset.str() << std::setw(16)
       << describe(w.delayed_state) << describe(w.delayed_control) << "\n";
  }
  return os.str();
}

LiftedProblem lift_problem(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice) {
  std::vector<BlockWiring> wiring;
  wiring.reserve(static_cast<std::size_t>(lattice.N));
  for (std::int64_t i = 0; i < lattice.N; ++i) {
    BlockWiring w;
    w.block = i;
    w.time_offset = lattice.h * Rational(i);
    w.delayed_state = resolve(i, lattice.k);
    w.delayed_control = resolve(i, lattice.l);
    // Every slot must point at an earlier block, the block itself, or a
    // history component inside the declared range.
    auto check = [&](const Source& s, std::int64_t lowest, const char* what) {
      const bool ok = (s.kind == Source::Kind::Self && s.index == i) ||
                      (s.kind == Source::Kind::Block && s.index >= 0 && s.index < i) ||
                      (s.kind == Source::Kind::History && s.index < 0 && s.index >= lowest);
      if (!ok) throw ModelError("block " + std::to_string(i) + ": unresolved " + what + " argument");
    };
    check(w.delayed_state, -lattice.k - lattice.l, "delayed state");
    check(w.delayed_control, -lattice.l, "delayed control");
    wiring.push_back(w);
  }
  return LiftedProblem(std::move(problem), lattice, std::move(wiring));
}

StackedControl stack_control(const ControlSignal& u, const LiftedProblem& lp) {
  StackedControl theta;
  theta.problem_ = lp.base_ptr();
  theta.lattice_ = lp.lattice();
  theta.a_ = lp.lattice().a.to_double();
  theta.h_ = lp.lattice().h.to_double();
  const auto& lat = lp.lattice();
  const auto m = static_cast<std::size_t>(lp.base().m());

  if (u.is_sampled()) {
    theta.samples_per_h_ = u.samples_per_h();
    const auto per_block = static_cast<std::size_t>(u.samples_per_h()) * m;
    for (std::int64_t i = 0; i < lat.N; ++i) {
      StackedControl::Block blk;
      auto first = u.samples().begin() + static_cast<std::ptrdiff_t>(per_block * static_cast<std::size_t>(i));
      blk.samples.assign(first, first + static_cast<std::ptrdiff_t>(per_block));
      theta.blocks_.push_back(std::move(blk));
    }
    return theta;
  }

  const VarLayout time_layout({"t"});
  for (std::int64_t i = 0; i < lat.N; ++i) {
    const Rational lo = lat.interval_start(i);
    const Rational hi = lat.interval_start(i + 1);
    const Rational shift = lat.h * Rational(i);
    StackedControl::Block blk;
    std::vector<Piece> local;
    for (const auto& p : u.pieces().pieces()) {
      const Rational t0 = std::max(p.t0, lo);
      const Rational t1 = std::min(p.t1, hi);
      if (!(t0 < t1)) continue;
      blk.source.push_back({t0, t1, p.exprs});
      Piece moved{t0 - shift, t1 - shift, {}};
      for (const auto& e : p.exprs) {
        moved.exprs.push_back(shift.is_zero() ? e : substitute(e, "t", "t + " + shift.str()));
      }
      local.push_back(std::move(moved));
    }
    blk.pieces = Piecewise(std::move(local), time_layout);
    theta.blocks_.push_back(std::move(blk));
  }
  return theta;
}

ControlSignal unstack_control(const StackedControl& theta) {
  if (theta.is_sampled()) {
    std::vector<double> values;
    for (const auto& blk : theta.blocks_) values.insert(values.end(), blk.samples.begin(), blk.samples.end());
    return ControlSignal::sampled(theta.problem_, theta.lattice_, theta.samples_per_h_, std::move(values));
  }
  std::vector<Piece> pieces;
  for (const auto& blk : theta.blocks_) pieces.insert(pieces.end(), blk.source.begin(), blk.source.end());
  return ControlSignal::from_pieces(theta.problem_, theta.lattice_, std::move(pieces));
}

std::vector<double> StackedControl::at(std::int64_t block, double t_local) const {
  std::vector<double> out(static_cast<std::size_t>(problem_->m()));
  if (block < 0) {
    problem_->history_control(t_local + h_ * static_cast<double>(block), out);
    return out;
  }
  const auto& blk = blocks_.at(static_cast<std::size_t>(block));
  if (is_sampled()) {
    const double width = h_ / static_cast<double>(samples_per_h_);
    auto idx = static_cast<std::int64_t>(std::ceil((t_local - a_) / width)) - 1;
    idx = std::clamp<std::int64_t>(idx, 0, samples_per_h_ - 1);
    std::copy_n(blk.samples.begin() + idx * problem_->m(), out.size(), out.begin());
    return out;
  }
  const int idx = blk.pieces.index_at(t_local);
  if (idx < 0) throw ModelError("stacked control block " + std::to_string(block) + " undefined at local time");
  const double slot[1] = {t_local};
  blk.pieces.eval_piece<double>(idx, slot, out);
  return out;
}

void StackedControl::stage(std::int64_t block, std::int64_t step, std::int64_t substeps, double tau_local,
                           std::span<double> out) const {
  if (block < 0) {
    problem_->history_control(tau_local + h_ * static_cast<double>(block), out);
    return;
  }
  const auto& blk = blocks_[static_cast<std::size_t>(block)];
  if (is_sampled()) {
    if (substeps % samples_per_h_ != 0) {
      throw ModelError("integration substeps must be a multiple of the control samples per interval");
    }
    const std::int64_t idx = step / (substeps / samples_per_h_);
    std::copy_n(blk.samples.begin() + idx * problem_->m(), out.size(), out.begin());
    return;
  }
  const double dt = h_ / static_cast<double>(substeps);
  const int idx = blk.pieces.index_for(a_ + static_cast<double>(step) * dt, a_ + static_cast<double>(step + 1) * dt);
  if (idx < 0) throw ModelError("stacked control block " + std::to_string(block) + " undefined inside a step");
  const double slot[1] = {tau_local};
  blk.pieces.eval_piece<double>(idx, slot, out);
}

StackedPath<double> stack_state(const Trajectory& x, const LiftedProblem& lp) {
  const auto& g = x.grid();
  StackedPath<double> path(lp.blocks(), g.substeps, x.n(), g.a, g.dt);
  for (std::int64_t i = 0; i < lp.blocks(); ++i) {
    for (std::int64_t j = 0; j <= g.substeps; ++j) {
      auto src = x.node(i * g.substeps + j);
      std::copy(src.begin(), src.end(), path.node(i, j).begin());
    }
    for (std::int64_t j = 0; j < g.substeps; ++j) {
      auto sl = x.slope_left(i * g.substeps + j);
      auto sr = x.slope_right(i * g.substeps + j);
      std::copy(sl.begin(), sl.end(), path.slope_left(i, j).begin());
      std::copy(sr.begin(), sr.end(), path.slope_right(i, j).begin());
    }
  }
  return path;
}

Trajectory unstack_state(const StackedPath<double>& path, const LiftedProblem& lp, double link_tol) {
  const StepGrid grid(lp.lattice(), path.substeps());
  Trajectory x(lp.base_ptr(), grid);
  const std::int64_t sub = path.substeps();
  for (std::int64_t i = 0; i < path.blocks(); ++i) {
    if (i > 0) {
      auto prev = path.node(i - 1, sub);
      auto next = path.node(i, 0);
      for (int c = 0; c < path.n(); ++c) {
        if (std::fabs(prev[c] - next[c]) > link_tol) {
          std::ostringstream os;
          os << "linking condition violated between blocks " << (i - 1) << " and " << i << ": |"
             << prev[c] << " - " << next[c] << "| > " << link_tol;
          throw ModelError(os.str());
        }
      }
    }
    for (std::int64_t j = 0; j <= sub; ++j) {
      auto src = path.node(i, j);
      std::copy(src.begin(), src.end(), x.node(i * sub + j).begin());
    }
    for (std::int64_t j = 0; j < sub; ++j) {
      auto sl = path.slope_left(i, j);
      auto sr = path.slope_right(i, j);
      std::copy(sl.begin(), sl.end(), x.slope_left(i * sub + j).begin());
      std::copy(sr.begin(), sr.end(), x.slope_right(i * sub + j).begin());
    }
  }
  return x;
}

}  // namespace delayoc
