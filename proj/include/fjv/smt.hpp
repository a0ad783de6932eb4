#pragma once

// SMT-LIB2 encoding of the bounded verification problem and parsing of the
// solver's answers. Variables: init_i, lam_i (Int selectors), x_i_t (Real
// opinions), b_i_t (Bool outputs). Every constant is an exact rational.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fjv/solver.hpp"
#include "fjv/verify.hpp"

namespace fjv {

/// max_i |lambda_i - lambda_hat_i| <= eps.
struct LambdaBound {
  Vector<Rational> lambda_hat;
  Rational eps;
};

/// Backend-neutral description of one encoding.
struct Encoding {
  struct Agent {
    bool selectable = true;             // false: fixed opinion, no selectors
    std::vector<int> init_options;      // grid indices
    std::vector<Rational> init_values;  // same length
    std::vector<int> lambda_options;    // grid levels
    std::vector<Rational> lambda_values;
    int observed = -1;                  // column into `observations`, -1 if unobserved
  };
  std::vector<Agent> agents;
  Matrix<Rational> w;
  Rational gamma;
  int horizon = 0;
  int d_lambda = 1;
  std::vector<BinaryOutput> observations;  // per step, observed agents only
  std::vector<std::int64_t> budgets;       // per step mismatch budget
  std::optional<LambdaBound> lambda_bound;

  Index size() const { return static_cast<Index>(agents.size()); }
  /// x_i_t variables, (#agents)(T + 1).
  std::int64_t real_variables() const { return size() * (horizon + 1); }
};

Encoding make_encoding(const VerificationProblem& problem, ToleranceMode mode,
                       const std::optional<LambdaBound>& bound = std::nullopt);

/// Declarations and assertions, starting with set-logic.
std::string encode_body(const Encoding& encoding);
/// Complete script: body, (check-sat), (get-model).
std::string encode_script(const Encoding& encoding);

std::string encode_smtlib(const VerificationProblem& problem, ToleranceMode mode,
                          const std::optional<LambdaBound>& bound = std::nullopt);

/// SMT-LIB real literal: "3.0", "(/ 1.0 4.0)", "(- (/ 1.0 4.0))".
std::string smt_real(const Rational& q);

struct SExpr {
  std::string atom;
  std::vector<SExpr> list;
  bool is_atom = false;
};

/// Parses every top-level s-expression in `text`.
std::vector<SExpr> parse_sexprs(std::string_view text);

/// Integer-valued symbols from a model ((define-fun v () Int 3) ...) or a
/// get-value answer ((v 3) ...). Other sorts are skipped.
std::map<std::string, BigInt> integer_assignments(std::string_view text);

/// Selector values of agents 0..n-1 from a model or get-value answer.
AbstractConfig read_selectors(const std::map<std::string, BigInt>& values, Index n);

/// Reads the selectors of a SAT model, then re-simulates exactly; a
/// configuration that fails is a ValidationGateError, never a silent result.
AbstractConfig parse_model(std::string_view model_text, const VerificationProblem& problem,
                           ToleranceMode mode);

struct SmtOptions {
  SolverOptions solver;
  std::size_t max_witnesses = 100;
  /// Witnesses failing the filter are blocked and the search continues, up
  /// to this many attempts.
  std::size_t max_filter_attempts = 1000;
  WitnessFilter filter;
  /// Blocking-clause counting stops here and reports an incomplete count.
  std::uint64_t count_limit = UINT64_MAX;
};

Verdict smt_verify(const VerificationProblem& problem, ToleranceMode mode,
                   const SmtOptions& options = {});

struct CountResult {
  std::uint64_t count = 0;
  bool complete = false;  // false on solver timeout or when the limit is hit
  double seconds = 0.0;
};

/// Repeated solving with a blocking clause on the full assignment.
CountResult smt_count(const VerificationProblem& problem, ToleranceMode mode,
                      const std::optional<LambdaBound>& bound, const SolverOptions& options,
                      std::uint64_t limit = UINT64_MAX);

}  // namespace fjv
