#pragma once

// Observation-consistency formulas: per-step predicates
// kappa - Hamming(y, y_obs(t)) >= 0 joined by conjunction over the horizon.
// All comparisons are exact; Hamming distances are multiples of 1/n.

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "fjv/fj.hpp"
#include "fjv/rational.hpp"

namespace fjv {

struct ObservationSpec {
  std::vector<BinaryOutput> observed;  // t = 0..T
  Rational kappa = 0;

  int horizon() const { return static_cast<int>(observed.size()) - 1; }
  Index agents() const { return observed.empty() ? 0 : observed.front().size(); }
  void validate() const;
};

/// Largest mismatch count whose normalized Hamming distance stays within
/// `tolerance`: floor(tolerance * n).
std::int64_t mismatch_budget(const Rational& tolerance, Index n);

/// kappa - Hamming(y, observed[t]).
Rational predicate_value(const BinaryOutput& y, const ObservationSpec& spec, int t);

/// First step t <= T whose predicate is negative.
std::optional<int> first_violation(const std::vector<BinaryOutput>& outputs,
                                   const ObservationSpec& spec);

bool satisfies(const std::vector<BinaryOutput>& outputs, const ObservationSpec& spec);
Rational robustness(const std::vector<BinaryOutput>& outputs, const ObservationSpec& spec);

template <class S>
bool satisfies(const Trajectory<S>& traj, const ObservationSpec& spec) {
  return satisfies(traj.outputs, spec);
}

template <class S>
Rational robustness(const Trajectory<S>& traj, const ObservationSpec& spec) {
  return robustness(traj.outputs, spec);
}

/// Propositional layer over the step predicates.
class Formula {
 public:
  struct True {};
  struct Predicate {
    int step;
  };
  struct Not {
    std::shared_ptr<const Formula> arg;
  };
  struct And {
    std::shared_ptr<const Formula> lhs, rhs;
  };

  static Formula truth() { return Formula(True{}); }
  static Formula predicate(int step) { return Formula(Predicate{step}); }
  static Formula negation(Formula f);
  static Formula conjunction(Formula a, Formula b);
  /// not(not a and not b).
  static Formula disjunction(Formula a, Formula b);

  bool evaluate(const std::vector<BinaryOutput>& outputs, const ObservationSpec& spec) const;

 private:
  using Node = std::variant<True, Predicate, Not, And>;
  explicit Formula(Node node) : node_(std::move(node)) {}
  Node node_;
};

/// Conjunction of the step predicates for t = 0..T.
Formula consistency_formula(const ObservationSpec& spec);

}  // namespace fjv
