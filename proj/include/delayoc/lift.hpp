#pragma once

// Stacking of a delayed problem into a non-delayed one on [a, a+h]:
//   xi_i(t) = x(t + h*i),  theta_i(t) = u(t + h*i),  i = 0..N-1.
// Block i sees its delayed state through xi_{i-k} and its delayed control
// through theta_{i-l}; negative indices are fixed history components
// xi_i = phi(t + h*i), theta_i = psi(t + h*i).

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "delayoc/hermite.hpp"
#include "delayoc/model.hpp"

namespace delayoc {

/// Where one argument of a block's f0/f instance comes from.
struct Source {
  enum class Kind { Self, Block, History };
  Kind kind = Kind::Self;
  std::int64_t index = 0;  // block index (Block) or negative history index (History)

  friend bool operator==(const Source&, const Source&) = default;
};

struct BlockWiring {
  std::int64_t block = 0;
  Rational time_offset;  // h * block
  Source delayed_state;
  Source delayed_control;
};

class LiftedProblem {
 public:
  LiftedProblem(std::shared_ptr<const CompiledProblem> base, DelayLattice lattice,
                std::vector<BlockWiring> wiring);

  const CompiledProblem& base() const { return *base_; }
  std::shared_ptr<const CompiledProblem> base_ptr() const { return base_; }
  const DelayLattice& lattice() const { return lattice_; }
  const std::vector<BlockWiring>& wiring() const { return wiring_; }

  std::int64_t blocks() const { return lattice_.N; }
  std::int64_t stacked_state_dim() const { return lattice_.N * base_->n(); }
  std::int64_t stacked_control_dim() const { return lattice_.N * base_->m(); }

  /// History state indices -k-l..-1 and history control indices -l..-1.
  std::vector<std::int64_t> history_state_indices() const;
  std::vector<std::int64_t> history_control_indices() const;

  /// Fixed history components xi_i(t) = phi(t + h i), theta_i(t) = psi(t + h i), i < 0.
  void history_state(std::int64_t index, double t_local, std::span<double> out) const;
  void history_control(std::int64_t index, double t_local, std::span<double> out) const;

  /// Index of the block whose terminal value enters the lifted terminal cost.
  std::int64_t terminal_block() const { return lattice_.N - 1; }

  /// Human-readable wiring table.
  std::string dump() const;

 private:
  std::shared_ptr<const CompiledProblem> base_;
  DelayLattice lattice_;
  std::vector<BlockWiring> wiring_;
  double h_;
};

/// Builds the wiring table; throws ModelError if any argument slot is unresolved.
LiftedProblem lift_problem(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice);

/// theta_i(t) = u(t + h i) materialized per block on [a, a+h].
class StackedControl {
 public:
  std::int64_t blocks() const { return static_cast<std::int64_t>(blocks_.size()); }
  bool is_sampled() const { return samples_per_h_ > 0; }
  std::int64_t samples_per_h() const { return samples_per_h_; }

  /// Value of block `block` (history block when negative) at local time t.
  std::vector<double> at(std::int64_t block, double t_local) const;

  /// Value inside local step `step` of the block grid at local time tau.
  void stage(std::int64_t block, std::int64_t step, std::int64_t substeps, double tau_local,
             std::span<double> out) const;

 private:
  friend StackedControl stack_control(const ControlSignal& u, const LiftedProblem& lp);
  friend ControlSignal unstack_control(const StackedControl& theta);

  struct Block {
    Piecewise pieces;
    std::vector<Piece> source;
    std::vector<double> samples;
  };

  std::shared_ptr<const CompiledProblem> problem_;
  DelayLattice lattice_;
  std::int64_t samples_per_h_ = 0;
  std::vector<Block> blocks_;
  double a_ = 0.0;
  double h_ = 0.0;
};

StackedControl stack_control(const ControlSignal& u, const LiftedProblem& lp);
ControlSignal unstack_control(const StackedControl& theta);

/// Block-wise state path: block i holds substeps+1 nodes on [a, a+h]
/// plus both end slopes of every step.
template <class T>
class StackedPath {
 public:
  StackedPath() = default;
  StackedPath(std::int64_t blocks, std::int64_t substeps, int n, double a, double dt)
      : blocks_(blocks), substeps_(substeps), n_(n), a_(a), dt_(dt),
        values_(static_cast<std::size_t>(blocks * (substeps + 1) * n)),
        dleft_(static_cast<std::size_t>(blocks * substeps * n)),
        dright_(static_cast<std::size_t>(blocks * substeps * n)) {}

  std::int64_t blocks() const { return blocks_; }
  std::int64_t substeps() const { return substeps_; }
  int n() const { return n_; }
  double dt() const { return dt_; }
  double local_time(std::int64_t step) const { return a_ + static_cast<double>(step) * dt_; }

  std::span<T> node(std::int64_t block, std::int64_t j) {
    return {values_.data() + (block * (substeps_ + 1) + j) * n_, static_cast<std::size_t>(n_)};
  }
  std::span<const T> node(std::int64_t block, std::int64_t j) const {
    return {values_.data() + (block * (substeps_ + 1) + j) * n_, static_cast<std::size_t>(n_)};
  }
  std::span<T> slope_left(std::int64_t block, std::int64_t step) {
    return {dleft_.data() + (block * substeps_ + step) * n_, static_cast<std::size_t>(n_)};
  }
  std::span<T> slope_right(std::int64_t block, std::int64_t step) {
    return {dright_.data() + (block * substeps_ + step) * n_, static_cast<std::size_t>(n_)};
  }
  std::span<const T> slope_left(std::int64_t block, std::int64_t step) const {
    return {dleft_.data() + (block * substeps_ + step) * n_, static_cast<std::size_t>(n_)};
  }
  std::span<const T> slope_right(std::int64_t block, std::int64_t step) const {
    return {dright_.data() + (block * substeps_ + step) * n_, static_cast<std::size_t>(n_)};
  }

  void interpolate(std::int64_t block, std::int64_t step, double theta, std::span<T> out) const {
    auto y0 = node(block, step);
    auto y1 = node(block, step + 1);
    auto m0 = slope_left(block, step);
    auto m1 = slope_right(block, step);
    for (int i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] = hermite(y0[i], m0[i], y1[i], m1[i], dt_, theta);
  }

 private:
  std::int64_t blocks_ = 0;
  std::int64_t substeps_ = 0;
  int n_ = 0;
  double a_ = 0.0;
  double dt_ = 0.0;
  std::vector<T> values_;
  std::vector<T> dleft_;
  std::vector<T> dright_;
};

/// Block decomposition of a trajectory sampled on the lattice-aligned grid.
StackedPath<double> stack_state(const Trajectory& x, const LiftedProblem& lp);

/// Inverse of stack_state. Throws ModelError when a linking condition
/// xi_i(a+h) = xi_{i+1}(a) is violated by more than `link_tol`.
Trajectory unstack_state(const StackedPath<double>& path, const LiftedProblem& lp, double link_tol = 1e-9);

}  // namespace delayoc
