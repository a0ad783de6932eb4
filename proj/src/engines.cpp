#include "fjv/engines.hpp"

namespace fjv {

EngineChoice parse_engine(const std::string& name) {
  if (name == "enum") return EngineChoice::Enumeration;
  if (name == "smt") return EngineChoice::Smt;
  if (name == "both") return EngineChoice::Both;
  throw DomainError("unknown engine '" + name + "' (expected enum, smt or both)");
}

std::string to_string(EngineChoice choice) {
  switch (choice) {
    case EngineChoice::Enumeration:
      return "enum";
    case EngineChoice::Smt:
      return "smt";
    case EngineChoice::Both:
      return "both";
  }
  return "?";
}

namespace {

bool decided(const Verdict& v) { return v.status != Status::Inconclusive; }

}  // namespace

Verdict verify_problem(const VerificationProblem& problem, ToleranceMode mode,
                       const EngineOptions& options) {
  if (options.engine == EngineChoice::Enumeration) return enumerate_verify(problem, mode, options.enumeration);
  if (options.engine == EngineChoice::Smt) return smt_verify(problem, mode, options.smt);

  Verdict by_enum = enumerate_verify(problem, mode, options.enumeration);
  const Verdict by_smt = smt_verify(problem, mode, options.smt);
  if (decided(by_smt) && by_smt.status != by_enum.status) {
    throw EngineDisagreement("enumeration says " + to_string(by_enum.status) + ", SMT says " +
                             to_string(by_smt.status) + " at tolerance " + to_string(mode));
  }
  by_enum.notes.push_back(decided(by_smt) ? "SMT verdict agrees" : "SMT verdict inconclusive");
  return by_enum;
}

SolutionCount count_solutions(const VerificationProblem& problem, const Vector<Rational>& lambda_hat,
                              const Rational& eps_lambda, const EngineOptions& options,
                              ToleranceMode mode) {
  SolutionCount out;
  if (options.engine != EngineChoice::Smt) {
    VerificationProblem restricted = problem;
    restricted.space = restrict_lambda(problem, lambda_hat, eps_lambda);
    if (restricted.space.empty()) {
      out.enumeration = 0;
    } else {
      EnumerationOptions eo = options.enumeration;
      eo.stop_at_first = false;
      eo.max_witnesses = 0;
      out.enumeration = enumerate_verify(restricted, mode, eo).solution_count;
    }
    out.value = *out.enumeration;
  }
  if (options.engine != EngineChoice::Enumeration) {
    const CountResult r = smt_count(problem, mode, LambdaBound{lambda_hat, eps_lambda}, options.smt.solver,
                                    options.smt.count_limit);
    out.complete = r.complete;
    out.smt = r.count;
    if (options.engine == EngineChoice::Smt) out.value = r.count;
    else if (r.complete && r.count != *out.enumeration) {
      throw EngineDisagreement("solution counts differ: enumeration " + std::to_string(*out.enumeration) +
                               ", SMT " + std::to_string(r.count));
    }
  }
  return out;
}

BoxVerification verify_box(const ObservationSpec& spec, const AbstractGrid& grid,
                           const ConfigBox& box, const InfluenceMatrix<double>& w, double delta,
                           double gamma, const EngineOptions& options, int evidence_samples,
                           std::uint64_t seed) {
  BoxVerification out;
  out.cover = cover_set(box, grid);
  VerificationProblem problem{spec, grid, out.cover, delta, gamma};
  problem.validate();
  out.evidence = box_evidence(box, grid, w, delta, spec.horizon(), gamma, evidence_samples, seed);

  EngineOptions upper = options;
  upper.enumeration.stop_at_first = true;
  out.abstract.at_plus = verify_problem(problem, ToleranceMode::KappaPlusDelta, upper);

  if (spec.kappa >= rational_from_double(delta)) {
    EngineOptions lower = options;
    const WitnessFilter a2 = [&problem](const AbstractConfig& c) { return abstract_assumption2(problem, c); };
    lower.enumeration.filter = a2;
    lower.enumeration.stop_at_first = true;
    lower.smt.filter = a2;
    out.abstract.at_minus = verify_problem(problem, ToleranceMode::KappaMinusDelta, lower);
  }
  out.verdict = transfer_verdict(out.abstract, delta, spec.kappa, out.evidence);
  return out;
}

}  // namespace fjv
