#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "delayoc/corpus.hpp"
#include "delayoc/io.hpp"
#include "delayoc/lift.hpp"
#include "delayoc/simsteps.hpp"
#include "delayoc/sufficiency.hpp"
#include "delayoc/transcribe.hpp"

using namespace delayoc;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kInputError = 2;

struct Loaded {
  std::shared_ptr<const CompiledProblem> problem;
  DelayLattice lattice;
};

Loaded load_problem(const std::string& path) {
  ProblemDef def = parse_problem(read_file(path), path);
  Loaded out;
  out.lattice = build_lattice(def);
  out.problem = std::make_shared<const CompiledProblem>(std::move(def));
  return out;
}

void write_csv_file(const std::string& path, const Trajectory& x, const ControlSignal& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError(path + ": cannot write file");
  write_trajectory_csv(os, x, u);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int cmd_check(const std::string& path) {
  const auto L = load_problem(path);
  const auto& def = L.problem->def();
  const auto& lat = L.lattice;
  std::cout << format_lattice(lat) << "\n";
  if (def.degenerate) {
    std::cout << "degenerate: r = s = 0, single block on [" << def.a << ", " << def.b << "]\n";
    return kOk;
  }
  const bool rk = lat.h * Rational(lat.k) == def.r;
  const bool sl = lat.h * Rational(lat.l) == def.s;
  const bool nk = lat.N > 2 * lat.k + 1;
  std::cout << "r = h*k: " << def.r << " = " << lat.h << "*" << lat.k << (rk ? " ok" : " FAIL") << "\n";
  std::cout << "s = h*l: " << def.s << " = " << lat.h << "*" << lat.l << (sl ? " ok" : " FAIL") << "\n";
  std::cout << "N > 2k+1: " << lat.N << " > " << 2 * lat.k + 1 << (nk ? " ok" : " FAIL") << "\n";
  return rk && sl && nk ? kOk : kCheckFailed;
}

int cmd_lift(const std::string& path) {
  const auto L = load_problem(path);
  std::cout << lift_problem(L.problem, L.lattice).dump();
  return kOk;
}

int cmd_simulate(const std::string& path, const std::string& control, std::int64_t step, const std::string& out) {
  const auto L = load_problem(path);
  IntegratorConfig cfg{step};
  cfg.validate();
  std::optional<ControlSignal> u;
  if (control == "zero") {
    u.emplace(ControlSignal::zero(L.problem, L.lattice));
  } else {
    const auto cand = parse_candidate(read_file(control), control);
    const BoundCandidate bound(L.problem, L.lattice, cand, cfg);
    u.emplace(bound.control());
  }
  const Trajectory x = integrate_dde(L.problem, L.lattice, *u, cfg);
  const double cost = cost_delayed(*L.problem, L.lattice, x, *u, cfg);
  write_csv_file(out, x, *u);
  const auto xb = state_at_b(x, L.lattice);
  std::cout << "cost = " << fixed(cost, 9) << "\n";
  std::cout << "x(b) =";
  for (double v : xb) std::cout << " " << fixed(v, 9);
  std::cout << "\ntrajectory written to " << out << " (" << x.node_count() << " rows)\n";
  return kOk;
}

int run_verify(const BoundCandidate& cand, const VerifyOptions& opts) {
  const auto rep = verify_all(cand, opts);
  std::cout << format_report(rep) << "\n[report]\n" << format_report_kv(rep);
  return rep.pass() ? kOk : kCheckFailed;
}

int cmd_verify(const std::string& path, const std::string& cand_path, VerifyOptions opts) {
  const auto L = load_problem(path);
  const auto cand = parse_candidate(read_file(cand_path), cand_path);
  const BoundCandidate bound(L.problem, L.lattice, cand, opts.cfg);
  return run_verify(bound, opts);
}

int cmd_solve(const std::string& path, SolveOptions opts, const std::string& out) {
  const auto L = load_problem(path);
  const auto res = solve(L.problem, L.lattice, opts);
  write_csv_file(out, res.trajectory, res.control);
  std::cout << "cost              = " << fixed(res.cost, 9) << "\n";
  std::cout << "objective         = " << fixed(res.objective, 9) << "\n";
  std::cout << "terminal residual = " << res.terminal_residual << "\n";
  std::cout << "iterations        = " << res.iterations << "\n";
  std::cout << "step norm         = " << res.step_norm << "\n";
  std::cout << "converged         = " << (res.converged ? "yes" : "no") << "\n";
  std::cout << "trajectory written to " << out << "\n";
  return res.converged ? kOk : kCheckFailed;
}

int cmd_example(const std::string& name, bool run_all, const std::string& export_dir) {
  const CorpusEntry entry = corpus_entry(name);
  if (!export_dir.empty()) {
    std::filesystem::create_directories(export_dir);
    const auto base = std::filesystem::path(export_dir) / entry.name;
    std::ofstream(base.string() + ".problem") << write_problem(entry.problem);
    if (entry.candidate) std::ofstream(base.string() + ".candidate") << write_candidate(*entry.candidate);
    std::cout << "exported " << base.string() << ".problem";
    if (entry.candidate) std::cout << " and " << base.string() << ".candidate";
    std::cout << "\n";
  }
  if (!run_all) {
    std::cout << entry.name << ": " << entry.description << "\nexpected values:\n";
    for (const auto& e : entry.expected) {
      std::cout << "  " << e.key << " = " << fixed(e.value, 9) << " +- " << e.tol << "  [" << e.note << "]\n";
    }
    return kOk;
  }

  auto problem = std::make_shared<const CompiledProblem>(entry.problem);
  const auto lattice = build_lattice(entry.problem);
  const BoundCandidate cand(problem, lattice, *entry.candidate, entry.verify.cfg);
  const auto rep = verify_all(cand, entry.verify);
  const double expected = entry.value("cost").value;

  std::cout << entry.name << ": " << entry.description << "\n";
  std::cout << "lattice: " << format_lattice(lattice) << "\n";
  std::cout << "cost = " << fixed(rep.cost, 6) << " (expected " << fixed(expected, 6) << ")\n\n";
  std::cout << format_report(rep);
  const bool cost_ok = std::fabs(rep.cost - expected) <= entry.value("cost").tol;
  std::cout << "  reference cost: " << (cost_ok ? "PASS" : "FAIL") << "\n";
  return rep.pass() && cost_ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"delayoc: delayed optimal control toolkit"};
  app.require_subcommand(1);

  std::string problem, candidate, control = "zero", out = "trajectory.csv", name, export_dir, convention = "auto";
  std::int64_t step = 128;
  bool run_all = false;
  std::vector<double> box;
  VerifyOptions vopts;
  SolveOptions sopts;

  auto* check = app.add_subcommand("check", "report the delay lattice");
  check->add_option("problem", problem, "problem file")->required();

  auto* lift = app.add_subcommand("lift", "print the block wiring of the lifted problem");
  lift->add_option("problem", problem, "problem file")->required();

  auto* simulate = app.add_subcommand("simulate", "integrate under a control and write the trajectory");
  simulate->add_option("problem", problem, "problem file")->required();
  simulate->add_option("--control", control, "candidate file or 'zero'");
  simulate->add_option("--step", step, "RK4 steps per lattice interval (even)");
  simulate->add_option("--out", out, "CSV output path");

  auto* verify = app.add_subcommand("verify", "check a candidate against the sufficient conditions");
  verify->add_option("problem", problem, "problem file")->required();
  verify->add_option("candidate", candidate, "candidate file")->required();
  verify->add_option("--convention", convention, "plus, minus or auto")
      ->check(CLI::IsMember({"plus", "minus", "auto"}));
  verify->add_option("--tol-hj", vopts.tol.hj, "HJ residual tolerance");
  verify->add_option("--tol-max", vopts.tol.maximality, "maximality gap tolerance");
  verify->add_option("--tol-cost", vopts.tol.cost, "cost identity tolerance");
  verify->add_option("--tol-boundary", vopts.tol.boundary, "boundary gap tolerance");
  verify->add_option("--box", box, "search box LO HI for unconstrained controls")->expected(2);
  verify->add_option("--step", step, "RK4 steps per lattice interval (even)");

  auto* solve_cmd = app.add_subcommand("solve", "direct single shooting on the lifted problem");
  solve_cmd->add_option("problem", problem, "problem file")->required();
  solve_cmd->add_option("--q", sopts.transcription.q, "control samples per lattice interval");
  solve_cmd->add_option("--max-iter", sopts.max_iter, "iteration limit");
  solve_cmd->add_option("--tol", sopts.tolerance, "projected step tolerance");
  solve_cmd->add_option("--rho", sopts.transcription.rho, "terminal penalty weight");
  solve_cmd->add_option("--out", out, "CSV output path");

  auto* example = app.add_subcommand("example", "built-in problems");
  example->add_option("name", name, "gollmann or lq")->required();
  example->add_flag("--run-all", run_all, "verify the built-in candidate");
  example->add_option("--export", export_dir, "write problem and candidate files into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*check) return cmd_check(problem);
    if (*lift) return cmd_lift(problem);
    if (*simulate) return cmd_simulate(problem, control, step, out);
    if (*verify) {
      vopts.convention = parse_convention(convention);
      if (!box.empty()) vopts.search.box = Interval{box[0], box[1]};
      vopts.cfg.substeps_per_h = step;
      vopts.cfg.validate();
      return cmd_verify(problem, candidate, vopts);
    }
    if (*solve_cmd) return cmd_solve(problem, sopts, out);
    if (*example) return cmd_example(name, run_all, export_dir);
  } catch (const IntegrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
