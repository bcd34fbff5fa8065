#include "delayoc/simsteps.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "delayoc/hermite.hpp"

namespace delayoc {

namespace {

/// Position of b on the global step grid: b = a + (full + rho) * dt.
struct HorizonCut {
  std::int64_t full = 0;
  double rho = 0.0;
};

HorizonCut cut_at_b(const CompiledProblem& problem, const DelayLattice& lattice, std::int64_t substeps) {
  const Rational pos = (problem.def().b - lattice.a) * Rational(substeps) / lattice.h;
  HorizonCut cut;
  cut.full = pos.floor();
  cut.rho = (pos - Rational(cut.full)).to_double();
  return cut;
}

template <class T>
void fill_slots(const CompiledProblem& p, std::vector<T>& slots, double t, std::span<const T> x,
                std::span<const T> xd, std::span<const T> u, std::span<const T> ud) {
  slots[CompiledProblem::t_slot()] = T(t);
  for (int i = 0; i < p.n(); ++i) {
    slots[p.x_slot(i)] = x[static_cast<std::size_t>(i)];
    slots[p.xd_slot(i)] = xd[static_cast<std::size_t>(i)];
  }
  for (int j = 0; j < p.m(); ++j) {
    slots[p.u_slot(j)] = u[static_cast<std::size_t>(j)];
    slots[p.ud_slot(j)] = ud[static_cast<std::size_t>(j)];
  }
}

template <class T>
bool all_finite(std::span<const T> v) {
  for (const auto& e : v) {
    if (!std::isfinite(value_of(e))) return false;
  }
  return true;
}

[[noreturn]] void blow_up(double t) {
  std::ostringstream os;
  os << "state became non-finite at t = " << t;
  throw IntegrationError(os.str(), t);
}

// Evaluation failures inside the right-hand side count as blow-up at t.
template <class T>
void dynamics_at(const CompiledProblem& p, std::span<const T> slots, std::span<T> out, double t) {
  try {
    p.dynamics<T>(slots, out);
  } catch (const DomainError& e) {
    std::ostringstream os;
    os << "dynamics failed at t = " << t << ": " << e.what();
    throw IntegrationError(os.str(), t);
  }
}

/// Composite Simpson over steps [s0, s1) pairing steps (s0 must be even),
/// with a single Hermite-midpoint Simpson step for an odd remainder.
/// integrand(step, theta) evaluates f0 at fraction theta of `step`.
template <class T, class F>
T simpson_steps(std::int64_t s0, std::int64_t s1, double dt, F&& integrand) {
  T sum(0.0);
  std::int64_t j = s0;
  for (; j + 1 < s1; j += 2) {
    sum += (integrand(j, 0.0) + integrand(j, 1.0) * 4.0 + integrand(j + 1, 1.0)) * (dt / 3.0);
  }
  if (j < s1) sum += (integrand(j, 0.0) + integrand(j, 0.5) * 4.0 + integrand(j, 1.0)) * (dt / 6.0);
  return sum;
}

template <class T, class F>
T simpson_partial(std::int64_t step, double rho, double dt, F&& integrand) {
  if (rho <= 0.0) return T(0.0);
  return (integrand(step, 0.0) + integrand(step, 0.5 * rho) * 4.0 + integrand(step, rho)) * (rho * dt / 6.0);
}

}  // namespace

void IntegratorConfig::validate() const {
  if (substeps_per_h < 2 || substeps_per_h % 2 != 0) {
    throw std::invalid_argument("substeps per lattice interval must be even and at least 2 (got " +
                                std::to_string(substeps_per_h) + ")");
  }
}

Trajectory integrate_dde(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice,
                         const ControlSignal& u, const IntegratorConfig& cfg) {
  cfg.validate();
  const CompiledProblem& p = *problem;
  const StepGrid grid(lattice, cfg.substeps_per_h);
  Trajectory traj(problem, grid);

  const auto n = static_cast<std::size_t>(p.n());
  const auto m = static_cast<std::size_t>(p.m());
  const std::int64_t k_steps = lattice.k * grid.substeps;
  const std::int64_t l_steps = lattice.l * grid.substeps;
  const double r = p.def().r.to_double();
  const double s = p.def().s.to_double();

  std::vector<double> slots(p.slot_count(), 0.0);
  std::vector<double> xd(n), uu(m), ud(m), xs(n), k1(n), k2(n), k3(n), k4(n);

  // f at fraction theta of step J with current state xs.
  auto rhs = [&](std::int64_t J, double theta, std::span<const double> x, std::span<double> out) {
    const double tau = theta == 1.0 ? grid.time(J + 1) : grid.time(J) + theta * grid.dt;
    if (lattice.k == 0) {
      std::copy(x.begin(), x.end(), xd.begin());
    } else if (J - k_steps < 0) {
      p.history_state(tau - r, xd);
    } else {
      traj.interpolate(J - k_steps, theta, xd);
    }
    u.stage(grid, J, tau, uu);
    if (lattice.l == 0) {
      ud = uu;
    } else {
      u.stage(grid, J - l_steps, tau - s, ud);
    }
    fill_slots<double>(p, slots, tau, x, xd, uu, ud);
    dynamics_at<double>(p, slots, out, tau);
  };

  auto x0 = traj.node(0);
  p.history_state(grid.a, x0);
  for (std::int64_t J = 0; J < grid.steps; ++J) {
    auto xj = traj.node(J);
    const double dt = grid.dt;
    rhs(J, 0.0, xj, k1);
    for (std::size_t i = 0; i < n; ++i) xs[i] = xj[i] + 0.5 * dt * k1[i];
    rhs(J, 0.5, xs, k2);
    for (std::size_t i = 0; i < n; ++i) xs[i] = xj[i] + 0.5 * dt * k2[i];
    rhs(J, 0.5, xs, k3);
    for (std::size_t i = 0; i < n; ++i) xs[i] = xj[i] + dt * k3[i];
    rhs(J, 1.0, xs, k4);
    auto xn = traj.node(J + 1);
    for (std::size_t i = 0; i < n; ++i) xn[i] = xj[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!all_finite<double>(xn)) blow_up(grid.time(J + 1));
    std::copy(k1.begin(), k1.end(), traj.slope_left(J).begin());
    rhs(J, 1.0, xn, traj.slope_right(J));
  }
  return traj;
}

std::vector<double> state_at_b(const Trajectory& x, const DelayLattice& lattice) {
  const auto cut = cut_at_b(x.problem(), lattice, x.grid().substeps);
  std::vector<double> out(static_cast<std::size_t>(x.n()));
  if (cut.rho == 0.0) {
    auto v = x.node(cut.full);
    std::copy(v.begin(), v.end(), out.begin());
  } else {
    x.interpolate(cut.full, cut.rho, out);
  }
  return out;
}

double cost_delayed(const CompiledProblem& p, const DelayLattice& lattice, const Trajectory& x,
                    const ControlSignal& u, const IntegratorConfig& cfg) {
  cfg.validate();
  const StepGrid& grid = x.grid();
  if (grid.substeps != cfg.substeps_per_h) throw std::invalid_argument("trajectory grid does not match config");
  const auto n = static_cast<std::size_t>(p.n());
  const auto m = static_cast<std::size_t>(p.m());
  const std::int64_t k_steps = lattice.k * grid.substeps;
  const std::int64_t l_steps = lattice.l * grid.substeps;
  const double r = p.def().r.to_double();
  const double s = p.def().s.to_double();

  std::vector<double> slots(p.slot_count(), 0.0);
  std::vector<double> xs(n), xd(n), uu(m), ud(m);

  auto integrand = [&](std::int64_t J, double theta) {
    const double tau = theta == 1.0 ? grid.time(J + 1) : grid.time(J) + theta * grid.dt;
    x.interpolate(J, theta, xs);
    if (lattice.k == 0) {
      xd = xs;
    } else if (J - k_steps < 0) {
      p.history_state(tau - r, xd);
    } else {
      x.interpolate(J - k_steps, theta, xd);
    }
    u.stage(grid, J, tau, uu);
    if (lattice.l == 0) {
      ud = uu;
    } else {
      u.stage(grid, J - l_steps, tau - s, ud);
    }
    fill_slots<double>(p, slots, tau, xs, xd, uu, ud);
    return p.running_cost<double>(slots);
  };

  const auto cut = cut_at_b(p, lattice, grid.substeps);
  double total = simpson_steps<double>(0, cut.full, grid.dt, integrand);
  total += simpson_partial<double>(cut.full, cut.rho, grid.dt, integrand);
  const auto xb = state_at_b(x, lattice);
  return total + p.terminal_cost<double>(xb);
}

template <class T>
void integrate_lifted_into(const LiftedProblem& lp, const BlockControlFn<T>& control, const IntegratorConfig& cfg,
                           StackedPath<T>& path, std::int64_t first_block) {
  cfg.validate();
  const CompiledProblem& p = lp.base();
  const auto n = static_cast<std::size_t>(p.n());
  const auto m = static_cast<std::size_t>(p.m());
  const std::int64_t sub = cfg.substeps_per_h;
  const double h = lp.lattice().h.to_double();
  const double dt = path.dt();

  std::vector<T> slots(p.slot_count(), T(0.0));
  std::vector<T> xd(n), uu(m), ud(m), xs(n), k1(n), k2(n), k3(n), k4(n);
  std::vector<double> hist_x(n), hist_u(m);

  for (std::int64_t i = first_block; i < lp.blocks(); ++i) {
    const BlockWiring& w = lp.wiring()[static_cast<std::size_t>(i)];
    const double offset = h * static_cast<double>(i);

    auto rhs = [&](std::int64_t j, double theta, std::span<const T> x, std::span<T> out) {
      const double tau = theta == 1.0 ? path.local_time(j + 1) : path.local_time(j) + theta * dt;
      switch (w.delayed_state.kind) {
        case Source::Kind::Self:
          std::copy(x.begin(), x.end(), xd.begin());
          break;
        case Source::Kind::Block:
          path.interpolate(w.delayed_state.index, j, theta, xd);
          break;
        case Source::Kind::History:
          lp.history_state(w.delayed_state.index, tau, hist_x);
          for (std::size_t c = 0; c < n; ++c) xd[c] = T(hist_x[c]);
          break;
      }
      control(i, j, tau, uu);
      switch (w.delayed_control.kind) {
        case Source::Kind::Self:
          ud = uu;
          break;
        case Source::Kind::Block:
          control(w.delayed_control.index, j, tau, ud);
          break;
        case Source::Kind::History:
          lp.history_control(w.delayed_control.index, tau, hist_u);
          for (std::size_t c = 0; c < m; ++c) ud[c] = T(hist_u[c]);
          break;
      }
      fill_slots<T>(p, slots, tau + offset, x, xd, uu, ud);
      dynamics_at<T>(p, slots, out, tau + offset);
    };

    auto start = path.node(i, 0);
    if (i == 0) {
      p.history_state(lp.lattice().a.to_double(), hist_x);
      for (std::size_t c = 0; c < n; ++c) start[c] = T(hist_x[c]);
    } else {
      auto prev = path.node(i - 1, sub);
      std::copy(prev.begin(), prev.end(), start.begin());
    }

    for (std::int64_t j = 0; j < sub; ++j) {
      auto xj = path.node(i, j);
      rhs(j, 0.0, xj, k1);
      for (std::size_t c = 0; c < n; ++c) xs[c] = xj[c] + k1[c] * (0.5 * dt);
      rhs(j, 0.5, xs, k2);
      for (std::size_t c = 0; c < n; ++c) xs[c] = xj[c] + k2[c] * (0.5 * dt);
      rhs(j, 0.5, xs, k3);
      for (std::size_t c = 0; c < n; ++c) xs[c] = xj[c] + k3[c] * dt;
      rhs(j, 1.0, xs, k4);
      auto xn = path.node(i, j + 1);
      for (std::size_t c = 0; c < n; ++c) {
        xn[c] = xj[c] + (k1[c] + k2[c] * 2.0 + k3[c] * 2.0 + k4[c]) * (dt / 6.0);
      }
      if (!all_finite<T>(xn)) blow_up(path.local_time(j + 1) + offset);
      std::copy(k1.begin(), k1.end(), path.slope_left(i, j).begin());
      rhs(j, 1.0, xn, path.slope_right(i, j));
    }
  }
}

template <class T>
std::vector<T> lifted_state_at_b(const LiftedProblem& lp, const StackedPath<T>& path) {
  const std::int64_t sub = path.substeps();
  const auto cut = cut_at_b(lp.base(), lp.lattice(), sub);
  std::vector<T> out(static_cast<std::size_t>(path.n()));
  if (cut.rho == 0.0) {
    std::int64_t block = cut.full / sub;
    std::int64_t j = cut.full % sub;
    if (block == path.blocks()) {
      block -= 1;
      j = sub;
    }
    auto v = path.node(block, j);
    std::copy(v.begin(), v.end(), out.begin());
  } else {
    path.interpolate(cut.full / sub, cut.full % sub, cut.rho, out);
  }
  return out;
}

template <class T>
T cost_lifted(const LiftedProblem& lp, const StackedPath<T>& path, const BlockControlFn<T>& control,
              const IntegratorConfig& cfg) {
  cfg.validate();
  const CompiledProblem& p = lp.base();
  const auto n = static_cast<std::size_t>(p.n());
  const auto m = static_cast<std::size_t>(p.m());
  const std::int64_t sub = path.substeps();
  const double h = lp.lattice().h.to_double();
  const double dt = path.dt();
  const auto cut = cut_at_b(p, lp.lattice(), sub);

  std::vector<T> slots(p.slot_count(), T(0.0));
  std::vector<T> xs(n), xd(n), uu(m), ud(m);
  std::vector<double> hist_x(n), hist_u(m);

  T total(0.0);
  for (std::int64_t i = 0; i < lp.blocks(); ++i) {
    const std::int64_t first_global = i * sub;
    if (first_global > cut.full || (first_global == cut.full && cut.rho == 0.0)) break;
    const BlockWiring& w = lp.wiring()[static_cast<std::size_t>(i)];
    const double offset = h * static_cast<double>(i);

    auto integrand = [&](std::int64_t j, double theta) {
      const double tau = theta == 1.0 ? path.local_time(j + 1) : path.local_time(j) + theta * dt;
      path.interpolate(i, j, theta, xs);
      switch (w.delayed_state.kind) {
        case Source::Kind::Self:
          xd = xs;
          break;
        case Source::Kind::Block:
          path.interpolate(w.delayed_state.index, j, theta, xd);
          break;
        case Source::Kind::History:
          lp.history_state(w.delayed_state.index, tau, hist_x);
          for (std::size_t c = 0; c < n; ++c) xd[c] = T(hist_x[c]);
          break;
      }
      control(i, j, tau, uu);
      switch (w.delayed_control.kind) {
        case Source::Kind::Self:
          ud = uu;
          break;
        case Source::Kind::Block:
          control(w.delayed_control.index, j, tau, ud);
          break;
        case Source::Kind::History:
          lp.history_control(w.delayed_control.index, tau, hist_u);
          for (std::size_t c = 0; c < m; ++c) ud[c] = T(hist_u[c]);
          break;
      }
      fill_slots<T>(p, slots, tau + offset, xs, xd, uu, ud);
      return p.running_cost<T>(slots);
    };

    const std::int64_t full_local = std::min(sub, cut.full - first_global);
    total += simpson_steps<T>(0, full_local, dt, integrand);
    if (full_local < sub) total += simpson_partial<T>(full_local, cut.rho, dt, integrand);
  }
  const auto xb = lifted_state_at_b<T>(lp, path);
  return total + p.terminal_cost<T>(xb);
}

BlockControlFn<double> as_block_control(const StackedControl& theta, std::int64_t substeps) {
  return [&theta, substeps](std::int64_t block, std::int64_t step, double tau, std::span<double> out) {
    theta.stage(block, step, substeps, tau, out);
  };
}

StackedPath<double> integrate_lifted(const LiftedProblem& lp, const StackedControl& theta,
                                     const IntegratorConfig& cfg) {
  return integrate_lifted<double>(lp, as_block_control(theta, cfg.substeps_per_h), cfg);
}

double cost_lifted(const LiftedProblem& lp, const StackedPath<double>& path, const StackedControl& theta,
                   const IntegratorConfig& cfg) {
  return cost_lifted<double>(lp, path, as_block_control(theta, cfg.substeps_per_h), cfg);
}

template void integrate_lifted_into<double>(const LiftedProblem&, const BlockControlFn<double>&,
                                            const IntegratorConfig&, StackedPath<double>&, std::int64_t);
template void integrate_lifted_into<Dual>(const LiftedProblem&, const BlockControlFn<Dual>&, const IntegratorConfig&,
                                          StackedPath<Dual>&, std::int64_t);
template double cost_lifted<double>(const LiftedProblem&, const StackedPath<double>&, const BlockControlFn<double>&,
                                    const IntegratorConfig&);
template Dual cost_lifted<Dual>(const LiftedProblem&, const StackedPath<Dual>&, const BlockControlFn<Dual>&,
                                const IntegratorConfig&);
template std::vector<double> lifted_state_at_b<double>(const LiftedProblem&, const StackedPath<double>&);
template std::vector<Dual> lifted_state_at_b<Dual>(const LiftedProblem&, const StackedPath<Dual>&);

}  // namespace delayoc
