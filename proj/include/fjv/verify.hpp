#pragma once

// Observation-consistency over a finite family of abstract configurations:
// exhaustive enumeration, solution counting, and the rules that carry an
// abstract verdict over to the concrete configurations it covers.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fjv/abstraction.hpp"
#include "fjv/observation.hpp"

namespace fjv {

struct VerificationProblem {
  ObservationSpec spec;
  AbstractGrid grid;
  SearchSpace space;
  double delta = 0.1;
  double gamma = kDefaultGamma;

  Index agents() const { return grid.agents(); }
  int horizon() const { return spec.horizon(); }
  void validate() const;
};

enum class ToleranceMode { Kappa, KappaPlusDelta, KappaMinusDelta };

/// kappa, kappa + delta, or max(kappa - delta, 0), exactly.
Rational tolerance(const VerificationProblem& problem, ToleranceMode mode);
/// floor(tolerance * n).
std::int64_t tolerance_budget(const VerificationProblem& problem, ToleranceMode mode);

/// Exact rational threshold used by both engines.
Rational exact_gamma(double gamma);

enum class Status { Consistent, Inconsistent, Inconclusive };
enum class Engine { Enumeration, Smt };

std::string to_string(Status status);
std::string to_string(Engine engine);
std::string to_string(ToleranceMode mode);

struct Verdict {
  Status status = Status::Inconclusive;
  Engine engine = Engine::Enumeration;
  std::vector<AbstractConfig> witnesses;  // possibly truncated
  std::uint64_t solution_count = 0;       // configurations found
  bool count_complete = false;            // solution_count is exact
  std::optional<BoxEvidence> evidence;
  std::vector<std::string> notes;
  double solve_seconds = 0.0;  // solver wall time, one-shot SMT queries
};

class SearchSpaceOverflow : public std::length_error {
 public:
  SearchSpaceOverflow(std::uint64_t effective, std::uint64_t cap);
  std::uint64_t effective() const { return effective_; }

 private:
  std::uint64_t effective_;
};

/// Raised when a witness fails exact re-simulation.
class ValidationGateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Extra acceptance test run on configurations that satisfy the spec.
using WitnessFilter = std::function<bool(const AbstractConfig&)>;

struct EnumerationOptions {
  std::uint64_t cap = 10'000'000;
  std::size_t max_witnesses = 100;
  bool stop_at_first = false;
  WitnessFilter filter;
};

/// Configurations whose t = 0 outputs already exceed the budget are skipped
/// without simulation; the cap applies to the remaining count.
std::uint64_t effective_search_size(const VerificationProblem& problem, ToleranceMode mode);

Verdict enumerate_verify(const VerificationProblem& problem, ToleranceMode mode,
                         const EnumerationOptions& options = {});

/// Exact re-simulation of one configuration against the spec.
bool config_satisfies(const VerificationProblem& problem, const AbstractConfig& config,
                      ToleranceMode mode);
/// Throws ValidationGateError unless the configuration lies in the search
/// space and satisfies the spec exactly.
void validate_witness(const VerificationProblem& problem, const AbstractConfig& config,
                      ToleranceMode mode);

/// Levels k with |k / d_lambda - lambda_hat_i| <= eps_lambda, intersected
/// with the problem's options.
SearchSpace restrict_lambda(const VerificationProblem& problem, const Vector<Rational>& lambda_hat,
                            const Rational& eps_lambda);

/// Finite-horizon threshold margin on the exact abstract path.
bool abstract_assumption2(const VerificationProblem& problem, const AbstractConfig& config);

/// Abstract results feeding the transfer rules.
struct AbstractResults {
  Verdict at_plus;                  // tolerance kappa + delta
  std::optional<Verdict> at_minus;  // kappa - delta, witnesses filtered by the threshold margin
};

/// INCONSISTENT when no abstract configuration meets kappa + delta and the
/// box hypotheses hold; CONSISTENT when one meets kappa - delta and passes
/// the threshold margin; INCONCLUSIVE otherwise. Part 2 is skipped when kappa < delta.
Verdict transfer_verdict(const AbstractResults& results, double delta, const Rational& kappa,
                         const std::optional<BoxEvidence>& evidence);

}  // namespace fjv
