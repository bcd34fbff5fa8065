#pragma once

#include <optional>
#include <string>
#include <vector>

#include "delayoc/model.hpp"
#include "delayoc/sufficiency.hpp"

namespace delayoc {

/// A reference value with how it was obtained.
struct ExpectedValue {
  std::string key;
  double value = 0.0;
  double tol = 0.0;
  std::string note;
};

struct CorpusEntry {
  std::string name;
  std::string description;
  ProblemDef problem;
  std::optional<CandidateSolution> candidate;
  VerifyOptions verify;  // tolerances, convention and search box the candidate is checked with
  std::vector<ExpectedValue> expected;

  const ExpectedValue& value(std::string_view key) const;
};

/// min int_0^3 x^2 + u^2 with x' = x(t-1) u(t-2), x = 1 on [-1, 0], u = 0 on [-2, 0),
/// with its closed-form candidate and piecewise value function.
CorpusEntry gollmann();

/// Non-delayed LQ problem x' = u, cost int_0^1 x^2 + u^2, x(0) = 1,
/// with the Riccati value function S = -tanh(1 - t) x^2.
CorpusEntry lq_riccati();

std::vector<std::string> corpus_names();
/// Throws std::invalid_argument for unknown names.
CorpusEntry corpus_entry(std::string_view name);

}  // namespace delayoc
