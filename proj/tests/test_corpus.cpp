#include <gtest/gtest.h>

#include <cmath>

#include "delayoc/corpus.hpp"
#include "delayoc/sufficiency.hpp"

using namespace delayoc;

TEST(Corpus, EntriesValidate) {
  for (const auto& name : corpus_names()) {
    const auto entry = corpus_entry(name);
    EXPECT_EQ(entry.name, name);
    EXPECT_TRUE(validate_problem(entry.problem).empty()) << name;
    EXPECT_TRUE(entry.candidate.has_value()) << name;
  }
  EXPECT_THROW(corpus_entry("nope"), std::invalid_argument);
}

TEST(Corpus, EntriesPassTheirOwnVerification) {
  for (const auto& name : corpus_names()) {
    const auto entry = corpus_entry(name);
    auto problem = std::make_shared<const CompiledProblem>(entry.problem);
    const BoundCandidate cand(problem, build_lattice(entry.problem), *entry.candidate, entry.verify.cfg);
    const auto rep = verify_all(cand, entry.verify);
    EXPECT_TRUE(rep.pass()) << name;
    EXPECT_NEAR(rep.cost, entry.value("cost").value, entry.value("cost").tol) << name;
    EXPECT_NEAR(rep.minus_S_a, entry.value("minus_S_a").value, entry.value("minus_S_a").tol) << name;
  }
}

TEST(Corpus, ExpectedValuesCarryNotes) {
  for (const auto& name : corpus_names()) {
    for (const auto& e : corpus_entry(name).expected) {
      EXPECT_FALSE(e.note.empty()) << name << " " << e.key;
      EXPECT_GT(e.tol, 0.0);
    }
  }
  EXPECT_THROW(gollmann().value("missing"), std::invalid_argument);
}

TEST(Corpus, GollmannCandidateValues) {
  const auto entry = gollmann();
  auto problem = std::make_shared<const CompiledProblem>(entry.problem);
  const BoundCandidate cand(problem, build_lattice(entry.problem), *entry.candidate);
  const double e = std::exp(1.0);
  EXPECT_NEAR(cand.u(0.0)[0], (1.0 - e * e) / (e * e + 1.0), 1e-15);
  EXPECT_NEAR(cand.u(0.0)[0], -0.761594155956, 1e-12);
  EXPECT_NEAR(cand.x(2.5)[0], 0.730762825846359, 1e-12);
  EXPECT_NEAR(cand.x(3.0)[0], 1.0 / std::cosh(1.0), 1e-15);
  // S vanishes identically at the horizon.
  for (double x : {-3.0, -0.5, 0.0, 0.64, 2.0, 10.0}) {
    const std::vector<double> xv{x};
    EXPECT_NEAR(cand.S(3.0, xv).value, 0.0, 1e-13) << x;
  }
  EXPECT_NEAR(-cand.S(0.0, std::vector<double>{1.0}).value, 2.0 + std::tanh(1.0), 1e-12);
}

TEST(Corpus, LqRejectsEmptyHorizon) {
  auto p = lq_riccati().problem;
  p.b = p.a;
  EXPECT_FALSE(validate_problem(p).empty());
}
