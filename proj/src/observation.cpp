#include "fjv/observation.hpp"

#include <algorithm>
#include <string>

namespace fjv {

void ObservationSpec::validate() const {
  if (observed.empty()) throw DomainError("observation sequence is empty");
  if (kappa < 0) throw DomainError("kappa must be nonnegative");
  const Index n = observed.front().size();
  for (std::size_t t = 0; t < observed.size(); ++t) {
    if (observed[t].size() != n) {
      throw DimensionError("observation at step " + std::to_string(t) + " has wrong length");
    }
    for (Index i = 0; i < n; ++i) {
      if (observed[t](i) > 1) throw DomainError("observations must be 0 or 1");
    }
  }
}

std::int64_t mismatch_budget(const Rational& tolerance, Index n) {
  return floor_to_int64(tolerance * static_cast<long long>(n));
}

Rational predicate_value(const BinaryOutput& y, const ObservationSpec& spec, int t) {
  if (t < 0 || t > spec.horizon()) throw DomainError("predicate step out of range");
  return spec.kappa - hamming(y, spec.observed[static_cast<std::size_t>(t)]);
}

namespace {

void check_horizon(const std::vector<BinaryOutput>& outputs, const ObservationSpec& spec) {
  if (static_cast<int>(outputs.size()) - 1 < spec.horizon()) {
    throw DimensionError("trajectory shorter than observation horizon");
  }
}

}  // namespace

std::optional<int> first_violation(const std::vector<BinaryOutput>& outputs,
                                   const ObservationSpec& spec) {
  check_horizon(outputs, spec);
  const std::int64_t budget = mismatch_budget(spec.kappa, spec.agents());
  for (int t = 0; t <= spec.horizon(); ++t) {
    const auto k = static_cast<std::size_t>(t);
    if (mismatch_count(outputs[k], spec.observed[k]) > budget) return t;
  }
  return std::nullopt;
}

bool satisfies(const std::vector<BinaryOutput>& outputs, const ObservationSpec& spec) {
  return !first_violation(outputs, spec).has_value();
}

Rational robustness(const std::vector<BinaryOutput>& outputs, const ObservationSpec& spec) {
  check_horizon(outputs, spec);
  Rational worst = predicate_value(outputs[0], spec, 0);
  for (int t = 1; t <= spec.horizon(); ++t) {
    worst = std::min(worst, predicate_value(outputs[static_cast<std::size_t>(t)], spec, t));
  }
  return worst;
}

Formula Formula::negation(Formula f) {
  return Formula(Not{std::make_shared<const Formula>(std::move(f))});
}

Formula Formula::conjunction(Formula a, Formula b) {
  return Formula(And{std::make_shared<const Formula>(std::move(a)),
                     std::make_shared<const Formula>(std::move(b))});
}

Formula Formula::disjunction(Formula a, Formula b) {
  return negation(conjunction(negation(std::move(a)), negation(std::move(b))));
}

bool Formula::evaluate(const std::vector<BinaryOutput>& outputs, const ObservationSpec& spec) const {
  struct Visitor {
    const std::vector<BinaryOutput>& outputs;
    const ObservationSpec& spec;
    bool operator()(const True&) const { return true; }
    bool operator()(const Predicate& p) const {
      if (p.step < 0 || static_cast<std::size_t>(p.step) >= outputs.size()) {
        throw DomainError("predicate step beyond trajectory");
      }
      return predicate_value(outputs[static_cast<std::size_t>(p.step)], spec, p.step) >= 0;
    }
    bool operator()(const Not& n) const { return !n.arg->evaluate(outputs, spec); }
    bool operator()(const And& a) const {
      return a.lhs->evaluate(outputs, spec) && a.rhs->evaluate(outputs, spec);
    }
  };
  return std::visit(Visitor{outputs, spec}, node_);
}

Formula consistency_formula(const ObservationSpec& spec) {
  Formula f = Formula::truth();
  for (int t = 0; t <= spec.horizon(); ++t) f = Formula::conjunction(std::move(f), Formula::predicate(t));
  return f;
}

}  // namespace fjv
