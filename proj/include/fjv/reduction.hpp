#pragma once

// Collapsing totally stubborn agents that share a community and an
// initial opinion into one constant representative per group.

#include <string>
#include <vector>

#include "fjv/network.hpp"
#include "fjv/smt.hpp"
#include "fjv/verify.hpp"

namespace fjv {

struct StubbornGroup {
  int community = 0;
  Rational value;  // shared initial opinion
  std::vector<Index> members;
};

struct GroupReduction {
  std::vector<Index> free_agents;  // original indices, ascending
  std::vector<Index> stubborn;     // original indices, ascending
  std::vector<StubbornGroup> groups;
  std::vector<Index> reduced_index;  // original agent -> reduced agent

  Index original_size() const { return static_cast<Index>(reduced_index.size()); }
  /// Free agents first, then one representative per group.
  Index reduced_size() const { return static_cast<Index>(free_agents.size() + groups.size()); }
};

/// Groups the agents flagged in `stubborn` by (community, initial value),
/// ordered by community and then value.
GroupReduction make_groups(const std::vector<bool>& stubborn, const std::vector<Rational>& values,
                           const Communities& communities);

/// Reduced influence matrix: free rows keep their free entries and sum the
/// weights onto each group; representative rows are unit self-loops. Every
/// free row must be constant across each group's columns.
template <class S>
Matrix<S> reduce_weights(const Matrix<S>& w, const GroupReduction& r) {
  const Index m = r.reduced_size();
  const Index nf = static_cast<Index>(r.free_agents.size());
  Matrix<S> out = Matrix<S>::Zero(m, m);
  for (Index a = 0; a < nf; ++a) {
    const Index i = r.free_agents[static_cast<std::size_t>(a)];
    for (Index b = 0; b < nf; ++b) out(a, b) = w(i, r.free_agents[static_cast<std::size_t>(b)]);
    for (std::size_t g = 0; g < r.groups.size(); ++g) {
      const auto& members = r.groups[g].members;
      const S& first = w(i, members.front());
      S sum(0);
      for (Index j : members) {
        if (w(i, j) != first) {
          throw DomainError("weights of agent " + std::to_string(i) +
                            " are not constant over stubborn group " + std::to_string(g));
        }
        sum += w(i, j);
      }
      out(a, nf + static_cast<Index>(g)) = sum;
    }
  }
  for (Index g = nf; g < m; ++g) out(g, g) = S(1);
  return out;
}

template <class S>
struct ReducedModel {
  GroupReduction reduction;
  ModelConfig<S> config;
};

/// Agents with lambda_i = 1 are stubborn; the reduced system keeps the free
/// agents and adds one representative (lambda = 1, unit self-loop) per group.
template <class S>
ReducedModel<S> group_reduce(const ModelConfig<S>& config, const S& gamma,
                             const Communities& communities) {
  check_gamma(gamma);
  const Index n = config.size();
  if (communities.size() != n) throw DimensionError("communities do not match model size");
  std::vector<bool> stubborn(static_cast<std::size_t>(n));
  std::vector<Rational> values(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    stubborn[static_cast<std::size_t>(i)] = config.lambda[i] == S(1);
    if constexpr (std::is_same_v<S, Rational>) values[static_cast<std::size_t>(i)] = config.x_init(i);
    else values[static_cast<std::size_t>(i)] = rational_exact_binary(static_cast<double>(config.x_init(i)));
  }
  ReducedModel<S> out;
  out.reduction = make_groups(stubborn, values, communities);
  const GroupReduction& r = out.reduction;
  const Index m = r.reduced_size();
  const Index nf = static_cast<Index>(r.free_agents.size());
  Vector<S> x(m), lam(m);
  for (Index a = 0; a < nf; ++a) {
    const Index i = r.free_agents[static_cast<std::size_t>(a)];
    x(a) = config.x_init(i);
    lam(a) = config.lambda[i];
  }
  for (std::size_t g = 0; g < r.groups.size(); ++g) {
    const Index a = nf + static_cast<Index>(g);
    x(a) = config.x_init(r.groups[g].members.front());
    lam(a) = S(1);
  }
  out.config = ModelConfig<S>{std::move(x), StubbornnessVector<S>(std::move(lam)),
                              InfluenceMatrix<S>(reduce_weights(config.w.matrix(), r))};
  return out;
}

/// Verification problem whose stubborn agents are known: single init
/// option and the single level d_lambda.
struct ReducedProblem {
  VerificationProblem full;
  ToleranceMode mode = ToleranceMode::Kappa;
  GroupReduction reduction;
  Encoding encoding;
  std::vector<std::int64_t> stubborn_mismatches;  // constant per step
};

/// Agents whose options pin lambda = 1 and the initial opinion.
std::vector<bool> known_stubborn(const VerificationProblem& problem);

ReducedProblem reduce_problem(const VerificationProblem& problem, const Communities& communities,
                              ToleranceMode mode);

/// Script over the reduced dimension; stubborn agents are folded into the
/// per-step budgets and representatives are unobserved.
std::string smt_for_reduced(const ReducedProblem& reduced);

/// Full configuration from reduced selector values; stubborn agents take
/// their pinned options.
AbstractConfig expand_witness(const ReducedProblem& reduced, const AbstractConfig& reduced_config);

/// Solves the reduced script; witnesses are expanded and pass the exact
/// gate on the full problem.
Verdict smt_verify_reduced(const ReducedProblem& reduced, const SolverOptions& options);

}  // namespace fjv
