#pragma once

// Running the enumeration and SMT engines side by side, solution counting,
// and the end-to-end check of a continuous configuration box.

#include <optional>
#include <stdexcept>
#include <string>

#include "fjv/smt.hpp"
#include "fjv/verify.hpp"

namespace fjv {

enum class EngineChoice { Enumeration, Smt, Both };

EngineChoice parse_engine(const std::string& name);  // "enum", "smt", "both"
std::string to_string(EngineChoice choice);

class EngineDisagreement : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct EngineOptions {
  EngineChoice engine = EngineChoice::Enumeration;
  EnumerationOptions enumeration;
  SmtOptions smt;
};

/// With Both, a SAT/UNSAT mismatch is an EngineDisagreement; the
/// enumeration verdict is returned.
Verdict verify_problem(const VerificationProblem& problem, ToleranceMode mode,
                       const EngineOptions& options);

struct SolutionCount {
  std::optional<std::uint64_t> enumeration;
  std::optional<std::uint64_t> smt;
  std::uint64_t value = 0;
  bool complete = true;
};

/// Distinct assignments satisfying the spec with max_i |lambda_i - hat_i|
/// <= eps. Enumeration restricts the level domains; SMT asserts the bound.
SolutionCount count_solutions(const VerificationProblem& problem, const Vector<Rational>& lambda_hat,
                              const Rational& eps_lambda, const EngineOptions& options,
                              ToleranceMode mode = ToleranceMode::Kappa);

struct BoxVerification {
  Verdict verdict;
  AbstractResults abstract;
  BoxEvidence evidence;
  SearchSpace cover;
};

/// Cover set, both tolerance queries, sampled hypotheses, transfer rules.
BoxVerification verify_box(const ObservationSpec& spec, const AbstractGrid& grid,
                           const ConfigBox& box, const InfluenceMatrix<double>& w, double delta,
                           double gamma, const EngineOptions& options, int evidence_samples = 100,
                           std::uint64_t seed = 0);

}  // namespace fjv
