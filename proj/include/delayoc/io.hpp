#pragma once

// Text formats:
//
// Problem file
//   [problem]   name, n, m, a, b, r, s, f0, f1..fn, g0, phi1..phin, psi1..psim, degenerate
//   [omega]     u1..um = free | lo hi
//   [terminal]  x1..xn = free | lo hi
//
// Candidate file
//   [xstar] [ustar] [S] [dSdt] [dSdx]   piece = "t0 t1 : e1 ; e2 ; ..."
//   [feedback]                          ustar = "e1 ; e2 ; ..."
//
// One `key = value` per line, `#` starts a comment, values may be double-quoted.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "delayoc/model.hpp"
#include "delayoc/sufficiency.hpp"
#include "delayoc/transcribe.hpp"

namespace delayoc {

/// Malformed input file; the message carries `source:line`.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ProblemDef parse_problem(std::string_view text, const std::string& source = "<problem>");
CandidateSolution parse_candidate(std::string_view text, const std::string& source = "<candidate>");

std::string write_problem(const ProblemDef& p);
std::string write_candidate(const CandidateSolution& c);

/// Reads a whole file; throws InputError when it cannot be opened.
std::string read_file(const std::string& path);

/// Header t,x0..,u0..; one row per grid node on [a, b~]; 12 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& x, const ControlSignal& u);

/// Aligned human-readable report.
std::string format_report(const VerificationReport& r);
/// key=value block, stable key order, no timestamps.
std::string format_report_kv(const VerificationReport& r);

std::string format_lattice(const DelayLattice& lat);

}  // namespace delayoc
