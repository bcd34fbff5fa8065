#pragma once

// Single shooting on the lifted problem. The decision vector z holds q
// piecewise-constant samples per lattice interval for each control component,
// sample-major: z[(i*q + p)*m + j] is u_j on [a + h(i + p/q), a + h(i + (p+1)/q)).

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "delayoc/lift.hpp"
#include "delayoc/model.hpp"
#include "delayoc/simsteps.hpp"

namespace delayoc {

struct TranscribeConfig {
  std::int64_t q = 16;
  /// RK4 steps per lattice interval; 0 picks the smallest multiple of 2q that is >= 64.
  std::int64_t substeps = 0;
  /// Weight of the squared distance of x(b) to the terminal box.
  double rho = 100.0;
};

class Transcription {
 public:
  Transcription(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice, TranscribeConfig cfg);

  std::size_t size() const { return size_; }
  std::int64_t q() const { return cfg_.q; }
  const IntegratorConfig& integrator() const { return icfg_; }
  const LiftedProblem& lifted() const { return lp_; }
  double sample_width() const { return width_; }

  /// Lifted cost plus terminal penalty; +inf when the state blows up.
  double objective(std::span<const double> z) const;
  /// Exact gradient of `objective` by one forward-mode sweep per live coordinate.
  std::vector<double> gradient(std::span<const double> z, bool parallel = true) const;
  /// Coordinates whose sample interval starts at or after b.
  const std::vector<bool>& dead() const { return dead_; }

  /// Clamp to the control bounds.
  void project(std::span<double> z) const;
  /// dist(x(b), G) for the path produced by z.
  double terminal_residual(std::span<const double> z) const;

  ControlSignal control(std::span<const double> z) const;

 private:
  template <class T>
  T evaluate(std::span<const T> z, StackedPath<T>& path, std::int64_t first_block) const;

  std::shared_ptr<const CompiledProblem> problem_;
  DelayLattice lattice_;
  LiftedProblem lp_;
  TranscribeConfig cfg_;
  IntegratorConfig icfg_;
  std::size_t size_ = 0;
  double width_ = 0.0;
  std::vector<bool> dead_;
};

double objective(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice,
                 std::span<const double> z, const TranscribeConfig& cfg);
std::vector<double> objective_grad(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice,
                                   std::span<const double> z, const TranscribeConfig& cfg);

struct SolveOptions {
  TranscribeConfig transcription;
  int max_iter = 2000;
  /// Stop when the projected gradient step, measured in L2(a, b~), is below this.
  double tolerance = 1e-6;
  double armijo = 1e-4;
  double shrink = 0.5;
  /// Initial iterate; zero when absent.
  std::optional<std::vector<double>> seed;
  bool parallel = true;
};

struct SolveResult {
  std::vector<double> z;
  ControlSignal control;
  Trajectory trajectory;
  double cost = 0.0;       // cost_delayed of (control, trajectory)
  double objective = 0.0;  // cost plus terminal penalty
  double terminal_residual = 0.0;
  double step_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Projected gradient descent with Armijo backtracking; the gradient is
/// rescaled by 1/sample_width so steps are taken in the L2 metric on controls.
SolveResult solve(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice,
                  const SolveOptions& opts);

}  // namespace delayoc
