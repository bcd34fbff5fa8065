#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>

#include "delayoc/lift.hpp"
#include "delayoc/model.hpp"

namespace delayoc {

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Fixed-step classical RK4 with step h / substeps_per_h; running costs use
/// composite Simpson on the same grid.
struct IntegratorConfig {
  std::int64_t substeps_per_h = 128;

  /// Throws std::invalid_argument unless substeps_per_h is even and >= 2.
  void validate() const;
};

/// Method of steps over [a, b_tilde]. Delayed states inside an RK stage come
/// from the cubic Hermite interpolant of an already completed step, or from phi.
Trajectory integrate_dde(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice,
                         const ControlSignal& u, const IntegratorConfig& cfg);

/// g0(x(b)) + int_a^b f0 dt. The extension (b, b_tilde] is excluded.
double cost_delayed(const CompiledProblem& problem, const DelayLattice& lattice, const Trajectory& x,
                    const ControlSignal& u, const IntegratorConfig& cfg);

/// Stacked control in scalar type T: fills `out` (m values) for block >= 0,
/// local step `step`, local time `tau`.
template <class T>
using BlockControlFn = std::function<void(std::int64_t block, std::int64_t step, double tau, std::span<T> out)>;

/// Integrates blocks first_block..N-1 in increasing order on [a, a+h];
/// xi_0(a) = x_a and xi_{i+1}(a) = xi_i(a+h). Blocks before first_block must
/// already be present in `path`.
template <class T>
void integrate_lifted_into(const LiftedProblem& lp, const BlockControlFn<T>& control, const IntegratorConfig& cfg,
                           StackedPath<T>& path, std::int64_t first_block = 0);

template <class T>
StackedPath<T> integrate_lifted(const LiftedProblem& lp, const BlockControlFn<T>& control,
                                const IntegratorConfig& cfg) {
  cfg.validate();
  const double h = lp.lattice().h.to_double();
  StackedPath<T> path(lp.blocks(), cfg.substeps_per_h, lp.base().n(), lp.lattice().a.to_double(),
                      h / static_cast<double>(cfg.substeps_per_h));
  integrate_lifted_into<T>(lp, control, cfg, path, 0);
  return path;
}

StackedPath<double> integrate_lifted(const LiftedProblem& lp, const StackedControl& theta,
                                     const IntegratorConfig& cfg);

/// G0 + int_a^{a+h} F0 dt, where block contributions beyond b are truncated
/// at b and the terminal term is g0(x(b)).
template <class T>
T cost_lifted(const LiftedProblem& lp, const StackedPath<T>& path, const BlockControlFn<T>& control,
              const IntegratorConfig& cfg);

double cost_lifted(const LiftedProblem& lp, const StackedPath<double>& path, const StackedControl& theta,
                   const IntegratorConfig& cfg);

/// State x(b) read from the path (Hermite interpolation when b is off-grid).
template <class T>
std::vector<T> lifted_state_at_b(const LiftedProblem& lp, const StackedPath<T>& path);

std::vector<double> state_at_b(const Trajectory& x, const DelayLattice& lattice);

/// Adapter from a stacked control to the functional form used by the kernels.
BlockControlFn<double> as_block_control(const StackedControl& theta, std::int64_t substeps);

extern template void integrate_lifted_into<double>(const LiftedProblem&, const BlockControlFn<double>&,
                                                   const IntegratorConfig&, StackedPath<double>&, std::int64_t);
extern template void integrate_lifted_into<Dual>(const LiftedProblem&, const BlockControlFn<Dual>&,
                                                 const IntegratorConfig&, StackedPath<Dual>&, std::int64_t);
extern template double cost_lifted<double>(const LiftedProblem&, const StackedPath<double>&,
                                           const BlockControlFn<double>&, const IntegratorConfig&);
extern template Dual cost_lifted<Dual>(const LiftedProblem&, const StackedPath<Dual>&, const BlockControlFn<Dual>&,
                                       const IntegratorConfig&);
extern template std::vector<double> lifted_state_at_b<double>(const LiftedProblem&, const StackedPath<double>&);
extern template std::vector<Dual> lifted_state_at_b<Dual>(const LiftedProblem&, const StackedPath<Dual>&);

}  // namespace delayoc
