#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "delayoc/corpus.hpp"
#include "delayoc/io.hpp"

using namespace delayoc;

namespace {

const char* kProblem = R"(# scalar test problem
[problem]
name = demo
n = 1
m = 1
a = 0
b = 3
r = 1
s = 2
f0 = x0^2 + u0^2
f1 = xd0*ud0
phi1 = 1
psi1 = 0

[omega]
u1 = -1 1

[terminal]
x1 = free
)";

std::string error_of(const std::string& text, bool candidate = false) {
  try {
    if (candidate) {
      parse_candidate(text, "c.txt");
    } else {
      parse_problem(text, "p.txt");
    }
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

VerificationReport verify_entry(const ProblemDef& def, const CandidateSolution& c, const VerifyOptions& opts) {
  auto problem = std::make_shared<const CompiledProblem>(def);
  const BoundCandidate cand(problem, build_lattice(def), c, opts.cfg);
  return verify_all(cand, opts);
}

}  // namespace

TEST(ProblemFile, Parses) {
  const auto p = parse_problem(kProblem);
  EXPECT_EQ(p.name, "demo");
  EXPECT_EQ(p.r, Rational(1));
  EXPECT_EQ(p.s, Rational(2));
  EXPECT_EQ(p.g0.str(), "0");
  ASSERT_TRUE(p.omega[0].has_value());
  EXPECT_EQ(p.omega[0]->lo, -1.0);
  EXPECT_FALSE(p.terminal[0].has_value());
  EXPECT_FALSE(p.degenerate);
}

TEST(ProblemFile, DecimalsAreExact) {
  std::string text = kProblem;
  text.replace(text.find("b = 3"), 5, "b = 2.7");
  text.replace(text.find("r = 1"), 5, "r = 0.1");
  const auto p = parse_problem(text);
  EXPECT_EQ(p.b, Rational(27, 10));
  EXPECT_EQ(p.r, Rational(1, 10));
}

TEST(ProblemFile, ErrorsNameTheLine) {
  std::string text = kProblem;
  EXPECT_EQ(error_of(text + "bogus = 1\n"), "p.txt:20: unknown key 'bogus' in [terminal]");
  text.replace(text.find("f1 = xd0*ud0"), 12, "f1 = xd0*(ud0");
  EXPECT_EQ(error_of(text).rfind("p.txt:11: f1:", 0), 0u) << error_of(text);
  EXPECT_NE(error_of("[problem]\nn = 1\nn = 1\n").find("duplicate key 'n'"), std::string::npos);
  EXPECT_NE(error_of("n = 1\n").find("outside of any section"), std::string::npos);
  EXPECT_NE(error_of("[problem]\nn\n").find("p.txt:2"), std::string::npos);
  EXPECT_NE(error_of("[problem]\nn = 1\n").find("missing key"), std::string::npos);
  EXPECT_NE(error_of("[weird]\n").find("unknown section"), std::string::npos);
  std::string bad_bound = kProblem;
  bad_bound.replace(bad_bound.find("u1 = -1 1"), 9, "u1 = 1 -1");
  EXPECT_NE(error_of(bad_bound).find("p.txt:16"), std::string::npos);
  std::string bad_var = kProblem;
  bad_var.replace(bad_var.find("f0 = x0^2 + u0^2"), 16, "f0 = x0^2 + eta0");
  EXPECT_NE(error_of(bad_var).find("eta0 not permitted"), std::string::npos);
}

TEST(ProblemFile, RoundTrip) {
  for (const auto& name : corpus_names()) {
    const auto p = corpus_entry(name).problem;
    const auto text = write_problem(p);
    const auto back = parse_problem(text);
    EXPECT_EQ(write_problem(back), text) << name;
    EXPECT_EQ(back.a, p.a);
    EXPECT_EQ(back.b, p.b);
    EXPECT_EQ(back.degenerate, p.degenerate);
  }
}

TEST(CandidateFile, ParsesAndRejects) {
  const char* text = R"([ustar]
piece = "0 1 : -t"
piece = "1 3 : 0"
[S]
piece = "0 3 : t*x0"
[feedback]
ustar = "-eta0"
)";
  const auto c = parse_candidate(text);
  EXPECT_EQ(c.u_star.size(), 2u);
  EXPECT_EQ(c.S.size(), 1u);
  EXPECT_EQ(c.feedback.size(), 1u);
  EXPECT_TRUE(c.x_star.empty());
  EXPECT_NE(error_of("[ustar]\npiece = \"1 0 : 1\"\n[S]\npiece = \"0 1 : 0\"\n", true).find("c.txt:2"),
            std::string::npos);
  EXPECT_NE(error_of("[ustar]\npiece = \"0 2 : 1\"\npiece = \"1 3 : 1\"\n[S]\npiece = \"0 3 : 0\"\n", true)
                .find("increasing"),
            std::string::npos);
  EXPECT_NE(error_of("[ustar]\npiece = \"0 1 : 1\"\n", true).find("missing [S]"), std::string::npos);
  EXPECT_NE(error_of("[S]\npiece = \"0 1 ; 1\"\n", true).find("c.txt:2"), std::string::npos);
  EXPECT_NE(error_of("[ustar]\npiece = \"0 1 : 1\n", true).find("unterminated"), std::string::npos);
}

TEST(CandidateFile, RoundTrip) {
  for (const auto& name : corpus_names()) {
    const auto c = *corpus_entry(name).candidate;
    const auto text = write_candidate(c);
    EXPECT_EQ(write_candidate(parse_candidate(text)), text) << name;
  }
}

TEST(CandidateFile, ExportReloadGivesIdenticalReports) {
  for (const auto& name : corpus_names()) {
    const auto entry = corpus_entry(name);
    const auto def = parse_problem(write_problem(entry.problem));
    const auto cand = parse_candidate(write_candidate(*entry.candidate));
    const auto a = format_report_kv(verify_entry(entry.problem, *entry.candidate, entry.verify));
    const auto b = format_report_kv(verify_entry(def, cand, entry.verify));
    EXPECT_EQ(a, b) << name;
  }
}

TEST(Report, DeterministicAndComplete) {
  const auto entry = gollmann();
  auto opts = entry.verify;
  opts.convention = Convention::Auto;
  const auto rep = verify_entry(entry.problem, *entry.candidate, opts);
  const auto kv = format_report_kv(rep);
  EXPECT_EQ(kv, format_report_kv(verify_entry(entry.problem, *entry.candidate, opts)));
  for (const char* key : {"hj_max_residual=", "boundary_gap=", "maximality_worst_gap=", "maximality_convention_used=minus",
                          "cost_identity_gap=", "pass=true"}) {
    EXPECT_NE(kv.find(key), std::string::npos) << key;
  }
  const auto text = format_report(rep);
  EXPECT_NE(text.find("minus"), std::string::npos);
  EXPECT_NE(text.find("PASS"), std::string::npos);
}

TEST(Report, Lattice) {
  EXPECT_EQ(format_lattice(build_lattice(gollmann().problem)), "h = 1/2, k = 2, l = 4, N = 6, b~ = 3");
}

TEST(Csv, FormatAndRows) {
  const auto entry = gollmann();
  auto problem = std::make_shared<const CompiledProblem>(entry.problem);
  const auto lat = build_lattice(entry.problem);
  const auto u = ControlSignal::zero(problem, lat);
  const auto x = integrate_dde(problem, lat, u, IntegratorConfig{4});
  std::ostringstream os;
  write_trajectory_csv(os, x, u);
  const std::string csv = os.str();
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,x0,u0");
  std::getline(is, line);
  EXPECT_EQ(line, "0.00000000000e+00,1.00000000000e+00,0.00000000000e+00");
  int rows = 1;
  double prev = 0.0;
  while (std::getline(is, line)) {
    const double t = std::stod(line.substr(0, line.find(',')));
    EXPECT_GT(t, prev);
    prev = t;
    ++rows;
  }
  EXPECT_EQ(rows, x.node_count());
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_EQ(csv.back(), '\n');
}
