#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "delayoc/expr.hpp"
#include "delayoc/rational.hpp"

namespace delayoc {

/// Thrown for structurally invalid problems and failed lattice construction.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Per-component box constraint; std::nullopt means unconstrained.
using Bound = std::optional<Interval>;

/// Delayed optimal control problem
///
///   minimize   g0(x(b)) + int_a^b f0(t, x(t), x(t-r), u(t), u(t-s)) dt
///   subject to x'(t) = f(t, x(t), x(t-r), u(t), u(t-s)),
///              x = phi on [a-r-s, a], u = psi on [a-s, a),
///              u(t) in omega, x(b) in terminal.
///
/// Expressions use t, x0.., xd0.. (x delayed by r), u0.., ud0.. (u delayed by s).
struct ProblemDef {
  std::string name;
  int n = 1;
  int m = 1;
  Rational a{0};
  Rational b{1};
  Rational r{0};
  Rational s{0};
  Expr f0;
  std::vector<Expr> f;
  Expr g0;
  std::vector<Expr> phi;
  std::vector<Expr> psi;
  std::vector<Bound> omega;
  std::vector<Bound> terminal;
  /// Permits r = s = 0, turning the problem into an ordinary non-delayed one.
  bool degenerate = false;
};

/// Human-readable problems with `p`; empty when the problem is well formed.
std::vector<std::string> validate_problem(const ProblemDef& p);

/// Common step for both delays: r = h*k, s = h*l, a + N*h = b_tilde >= b.
struct DelayLattice {
  Rational a;
  Rational h;
  std::int64_t k = 0;
  std::int64_t l = 0;
  std::int64_t N = 1;
  Rational b_tilde;

  Rational interval_start(std::int64_t i) const { return a + h * Rational(i); }
};

/// Refines gcd(r, s) by the smallest divisor d <= 1024 giving N > 2k+1.
/// Degenerate problems get one block spanning [a, b].
DelayLattice build_lattice(const ProblemDef& p);

/// Uniform integration grid: `substeps` RK steps per lattice interval.
struct StepGrid {
  double a = 0.0;
  double h = 0.0;
  double dt = 0.0;
  std::int64_t substeps = 1;
  std::int64_t steps = 0;  // over [a, b_tilde]

  StepGrid() = default;
  StepGrid(const DelayLattice& lattice, std::int64_t substeps_per_h);

  double time(std::int64_t step) const { return a + static_cast<double>(step) * dt; }
};

/// Problem expressions compiled against the fixed slot layout
/// [t | x0..x{n-1} | xd0.. | u0..u{m-1} | ud0.. | eta0..eta{n-1}].
class CompiledProblem {
 public:
  /// Throws ModelError with the validation diagnostics when `def` is invalid.
  explicit CompiledProblem(ProblemDef def);

  const ProblemDef& def() const { return def_; }
  const VarLayout& layout() const { return layout_; }
  int n() const { return def_.n; }
  int m() const { return def_.m; }

  std::size_t slot_count() const { return layout_.size(); }
  static constexpr std::size_t t_slot() { return 0; }
  std::size_t x_slot(int i) const { return 1 + static_cast<std::size_t>(i); }
  std::size_t xd_slot(int i) const { return 1 + static_cast<std::size_t>(def_.n + i); }
  std::size_t u_slot(int j) const { return 1 + static_cast<std::size_t>(2 * def_.n + j); }
  std::size_t ud_slot(int j) const { return 1 + static_cast<std::size_t>(2 * def_.n + def_.m + j); }
  std::size_t eta_slot(int i) const { return 1 + static_cast<std::size_t>(2 * def_.n + 2 * def_.m + i); }

  template <class T>
  T running_cost(std::span<const T> slots) const {
    return f0_.run<T>(slots);
  }
  template <class T>
  void dynamics(std::span<const T> slots, std::span<T> out) const {
    for (std::size_t i = 0; i < f_.size(); ++i) out[i] = f_[i].run<T>(slots);
  }
  template <class T>
  T terminal_cost(std::span<const T> x) const {
    return g0_.run<T>(x);
  }

  void history_state(double t, std::span<double> out) const;
  void history_control(double t, std::span<double> out) const;
  std::vector<double> initial_state() const;

 private:
  ProblemDef def_;
  VarLayout layout_;
  Program f0_;
  std::vector<Program> f_;
  Program g0_;
  std::vector<Program> phi_;
  std::vector<Program> psi_;
};

VarLayout standard_layout(int n, int m);

/// One closed interval [t0, t1] carrying a vector of expressions.
struct Piece {
  Rational t0;
  Rational t1;
  std::vector<Expr> exprs;
};

/// Piecewise expression vector in (t, and optionally further slots).
/// Lookup picks the first piece containing t.
class Piecewise {
 public:
  Piecewise() = default;
  Piecewise(std::vector<Piece> pieces, const VarLayout& layout);

  bool empty() const { return pieces_.empty(); }
  std::size_t piece_count() const { return pieces_.size(); }
  std::size_t width() const { return width_; }
  const std::vector<Piece>& pieces() const { return pieces_; }

  /// Index of the first piece with t0 <= t <= t1, or -1.
  int index_at(double t) const;
  /// Piece containing the midpoint of [lo, hi]; used for one-sided limits.
  int index_for(double lo, double hi) const;

  template <class T>
  void eval_piece(int index, std::span<const T> slots, std::span<T> out) const {
    const auto& progs = programs_[static_cast<std::size_t>(index)];
    for (std::size_t c = 0; c < progs.size(); ++c) out[c] = progs[c].run<T>(slots);
  }

  /// Lattice-time breakpoints strictly between the first and last endpoint.
  std::vector<double> breakpoints() const;

  /// Empty string when pieces cover [lo, hi] with no gaps; diagnostic otherwise.
  std::string coverage_problem(const Rational& lo, const Rational& hi) const;

 private:
  std::vector<Piece> pieces_;
  std::vector<std::vector<Program>> programs_;
  std::vector<std::pair<double, double>> spans_;
  std::size_t width_ = 0;
};

/// Control with history psi on [a-s, a) and a body on [a, b_tilde].
/// The body is either piecewise expressions in t or left-continuous samples
/// (q per lattice interval).
class ControlSignal {
 public:
  static ControlSignal zero(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice);
  static ControlSignal from_pieces(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice,
                                   std::vector<Piece> pieces);
  /// `values` holds q * N * m entries, sample-major.
  static ControlSignal sampled(std::shared_ptr<const CompiledProblem> problem, const DelayLattice& lattice,
                               std::int64_t q, std::vector<double> values);

  bool is_sampled() const { return samples_per_h_ > 0; }
  std::int64_t samples_per_h() const { return samples_per_h_; }
  const std::vector<double>& samples() const { return samples_; }
  const Piecewise& pieces() const { return pieces_; }
  int m() const { return problem_->m(); }
  const CompiledProblem& problem() const { return *problem_; }

  /// Pointwise value; history for t < a, left-continuous for samples.
  std::vector<double> at(double t) const;

  /// Value used inside integration step `step` of `grid` at time `tau`.
  /// Negative steps read the history. Pieces are chosen by the step midpoint
  /// and evaluated at tau; samples are constant across the step.
  void stage(const StepGrid& grid, std::int64_t step, double tau, std::span<double> out) const;

 private:
  ControlSignal() = default;

  std::shared_ptr<const CompiledProblem> problem_;
  double a_ = 0.0;
  double h_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  Piecewise pieces_;
  std::int64_t samples_per_h_ = 0;
  std::vector<double> samples_;
};

/// State path on the uniform integration grid plus the phi history.
/// Each step also keeps the derivative at both of its ends so that
/// intermediate values are available by cubic Hermite interpolation.
class Trajectory {
 public:
  Trajectory(std::shared_ptr<const CompiledProblem> problem, StepGrid grid);

  const StepGrid& grid() const { return grid_; }
  int n() const { return n_; }
  std::int64_t node_count() const { return grid_.steps + 1; }

  std::span<double> node(std::int64_t j) { return {values_.data() + j * n_, static_cast<std::size_t>(n_)}; }
  std::span<const double> node(std::int64_t j) const {
    return {values_.data() + j * n_, static_cast<std::size_t>(n_)};
  }
  std::span<double> slope_left(std::int64_t step) { return {dleft_.data() + step * n_, static_cast<std::size_t>(n_)}; }
  std::span<double> slope_right(std::int64_t step) {
    return {dright_.data() + step * n_, static_cast<std::size_t>(n_)};
  }
  std::span<const double> slope_left(std::int64_t step) const {
    return {dleft_.data() + step * n_, static_cast<std::size_t>(n_)};
  }
  std::span<const double> slope_right(std::int64_t step) const {
    return {dright_.data() + step * n_, static_cast<std::size_t>(n_)};
  }

  /// Cubic Hermite value inside step `step` at fraction theta in [0, 1].
  void interpolate(std::int64_t step, double theta, std::span<double> out) const;

  /// Pointwise value: phi for t <= a, stored value on nodes (bit-identical),
  /// linear interpolation between nodes. Throws outside [a-r-s, b_tilde].
  std::vector<double> at(double t) const;

  const CompiledProblem& problem() const { return *problem_; }

 private:
  std::shared_ptr<const CompiledProblem> problem_;
  StepGrid grid_;
  int n_;
  double lo_;
  std::vector<double> values_;
  std::vector<double> dleft_;
  std::vector<double> dright_;
};

}  // namespace delayoc
