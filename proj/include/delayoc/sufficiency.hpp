#pragma once

// Verification of a candidate (x*, u*, S) for a delayed problem:
//   HJ:          d1S - f0 + d2S . f = 0 along x*, u*
//   boundary:    S(b, x(b)) = -g0(x(b)),  x(b) in G
//   maximality:  u*(t) maximizes H(t, ..., u, ...) + chi_[a,b-s](t) H(t+s, ..., u)
//   cost:        C_D[u*] = -S(a, x_a)
// where H(t, x, y, u, v, eta) = -f0 + eta . f and eta = sigma * d2S.

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "delayoc/model.hpp"
#include "delayoc/simsteps.hpp"

namespace delayoc {

class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Convention { Plus, Minus, Auto };

std::string to_string(Convention c);
/// "plus", "minus" or "auto"; throws std::invalid_argument otherwise.
Convention parse_convention(std::string_view text);

/// Candidate data. Pieces are closed intervals in t:
///   x_star: n expressions in t (empty: simulate under u_star)
///   u_star: m expressions in t
///   S:      one expression in t, x0..x{n-1}
///   dS_dt, dS_dx: optional closed-form derivatives in the same variables
///   feedback: optional m expressions in t, x0.., xd0.., eta0..
struct CandidateSolution {
  std::vector<Piece> x_star;
  std::vector<Piece> u_star;
  std::vector<Piece> S;
  std::vector<Piece> dS_dt;
  std::vector<Piece> dS_dx;
  std::vector<Expr> feedback;
};

/// Value and derivatives of S at one point.
struct SJet {
  double value = 0.0;
  double dt = 0.0;
  std::vector<double> dx;
};

/// A candidate compiled against a problem and lattice. Provides x*(t) on
/// [a-r-s, b], u*(t) on [a-s, b] and the jet of S. Immutable; safe for
/// concurrent reads.
class BoundCandidate {
 public:
  /// Throws VerificationError when pieces are missing, have the wrong width
  /// or do not cover [a, b].
  BoundCandidate(std::shared_ptr<const CompiledProblem> problem, DelayLattice lattice, CandidateSolution cand,
                 IntegratorConfig cfg = {});

  const CompiledProblem& problem() const { return *problem_; }
  std::shared_ptr<const CompiledProblem> problem_ptr() const { return problem_; }
  const DelayLattice& lattice() const { return lattice_; }
  const CandidateSolution& source() const { return cand_; }
  bool simulated_state() const { return sim_.has_value(); }

  std::vector<double> x(double t) const;
  std::vector<double> u(double t) const;
  /// Piece selected by the first piece containing t.
  SJet S(double t, std::span<const double> x) const;
  /// Same, with a forced piece index (used for one-sided evaluations).
  SJet S_piece(int piece, double t, std::span<const double> x) const;

  /// Feedback law at (t, x, xd, eta); empty when none was supplied.
  std::vector<double> feedback(double t, std::span<const double> x, std::span<const double> xd,
                               std::span<const double> eta) const;
  bool has_feedback() const { return !feedback_.empty(); }

  /// Open-loop control over [a, b~]; the last u* piece is extended to b~.
  const ControlSignal& control() const { return *control_; }

  /// Interior S breakpoints (times where S switches pieces).
  const std::vector<double>& s_breakpoints() const { return s_breaks_; }
  /// Largest |S_left - S_right| at S breakpoints along x*.
  double s_continuity_gap() const;

 private:
  std::shared_ptr<const CompiledProblem> problem_;
  DelayLattice lattice_;
  CandidateSolution cand_;
  Piecewise x_pw_, u_pw_, S_pw_, dSdt_pw_, dSdx_pw_;
  std::vector<Program> feedback_;
  std::optional<ControlSignal> control_;
  std::optional<Trajectory> sim_;
  std::vector<double> s_breaks_;
  double a_ = 0.0;
  double b_ = 0.0;
};

struct HjResult {
  double max_abs = 0.0;
  double worst_time = 0.0;
  std::vector<double> times;
  std::vector<double> residuals;
};

/// Residual at density*N interior nodes t = a + h (i + (p + 1/2)/density),
/// t < b, skipping nodes within 1e-9 of an S breakpoint.
HjResult hj_residual(const BoundCandidate& cand, int density, bool parallel = true);

struct BoundaryResult {
  double gap = 0.0;
  double S_b = 0.0;
  double g0_b = 0.0;
  std::vector<double> x_b;
  bool in_terminal_set = true;
};

BoundaryResult boundary_gap(const BoundCandidate& cand);

/// Search region for the maximality check: one interval per control
/// component. Bounded Omega components use their bounds; free components use
/// `box` and fail with VerificationError when no box is supplied.
struct SearchBox {
  std::optional<Interval> box;
  int grid_points = 64;
};

struct MaximalityPoint {
  double t = 0.0;
  double gap = 0.0;
  std::vector<double> argmax;
  std::vector<double> candidate;
};

/// gap = max_u M(u) - M(u*(t)) >= 0 with M as in the file comment.
/// Degenerate problems and s = 0 use the single-term Hamiltonian.
MaximalityPoint maximality_gap(const BoundCandidate& cand, double t, Convention convention, const SearchBox& search);

struct CostIdentity {
  double cost = 0.0;       // C_D[u*] by simulation and quadrature
  double minus_S_a = 0.0;  // -S(a, x_a)
  double gap = 0.0;
};

CostIdentity cost_identity_gap(const BoundCandidate& cand, const IntegratorConfig& cfg);

struct Tolerances {
  double hj = 1e-6;
  double boundary = 1e-9;
  double maximality = 1e-6;
  double cost = 1e-3;
};

struct VerifyOptions {
  Tolerances tol;
  Convention convention = Convention::Auto;
  SearchBox search;
  int hj_density = 32;
  int max_density = 32;
  IntegratorConfig cfg;
  bool parallel = true;
};

struct VerificationReport {
  Tolerances tol;
  double hj_max_residual = 0.0;
  double hj_worst_time = 0.0;
  double boundary_gap = 0.0;
  bool terminal_in_set = true;
  double maximality_worst_gap = 0.0;
  double maximality_worst_time = 0.0;
  Convention convention_requested = Convention::Auto;
  Convention convention_used = Convention::Minus;
  double maximality_other_gap = -1.0;  // worst gap of the rejected convention under auto
  double cost = 0.0;
  double minus_S_a = 0.0;
  double cost_identity_gap = 0.0;
  double s_continuity_gap = 0.0;
  double feedback_gap = -1.0;  // informational; -1 when no feedback law
  bool degenerate = false;

  bool hj_pass = false;
  bool boundary_pass = false;
  bool maximality_pass = false;
  bool cost_pass = false;
  bool pass() const { return hj_pass && boundary_pass && maximality_pass && cost_pass; }
};

/// Time grid used by the maximality sweep: max_density points per lattice
/// interval on [a, b], minus S breakpoints, plus a and b - s.
std::vector<double> maximality_grid(const BoundCandidate& cand, int density);

VerificationReport verify_all(const BoundCandidate& cand, const VerifyOptions& opts);

}  // namespace delayoc
