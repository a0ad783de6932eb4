#include "fjv/reduction.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace fjv {

GroupReduction make_groups(const std::vector<bool>& stubborn, const std::vector<Rational>& values,
                           const Communities& communities) {
  const std::size_t n = stubborn.size();
  if (values.size() != n || static_cast<std::size_t>(communities.size()) != n) {
    throw DimensionError("make_groups: dimension mismatch");
  }
  GroupReduction r;
  r.reduced_index.assign(n, -1);
  std::map<std::pair<int, Rational>, std::size_t> key_to_group;
  for (std::size_t i = 0; i < n; ++i) {
    if (!stubborn[i]) {
      r.reduced_index[i] = static_cast<Index>(r.free_agents.size());
      r.free_agents.push_back(static_cast<Index>(i));
      continue;
    }
    r.stubborn.push_back(static_cast<Index>(i));
    key_to_group.try_emplace({communities.label[i], values[i]}, 0);
  }
  std::size_t g = 0;
  for (auto& [key, index] : key_to_group) {
    index = g++;
    r.groups.push_back({key.first, key.second, {}});
  }
  const Index nf = static_cast<Index>(r.free_agents.size());
  for (Index i : r.stubborn) {
    const auto k = static_cast<std::size_t>(i);
    const std::size_t group = key_to_group.at({communities.label[k], values[k]});
    r.groups[group].members.push_back(i);
    r.reduced_index[k] = nf + static_cast<Index>(group);
  }
  return r;
}

std::vector<bool> known_stubborn(const VerificationProblem& problem) {
  std::vector<bool> out(static_cast<std::size_t>(problem.agents()));
  for (Index i = 0; i < problem.agents(); ++i) {
    const auto& levels = problem.space.lambda_options(i);
    out[static_cast<std::size_t>(i)] = problem.space.init_options(i).size() == 1 &&
                                       levels.size() == 1 && levels[0] == problem.grid.d_lambda;
  }
  return out;
}

ReducedProblem reduce_problem(const VerificationProblem& problem, const Communities& communities,
                              ToleranceMode mode) {
  problem.validate();
  const Index n = problem.agents();
  const std::vector<bool> stubborn = known_stubborn(problem);
  std::vector<Rational> values(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    values[static_cast<std::size_t>(i)] = problem.grid.init_value(problem.space.init_options(i).front());
  }
  ReducedProblem out;
  out.full = problem;
  out.mode = mode;
  out.reduction = make_groups(stubborn, values, communities);
  const GroupReduction& r = out.reduction;
  const Index nf = static_cast<Index>(r.free_agents.size());
  const int horizon = problem.horizon();
  const Rational gamma = exact_gamma(problem.gamma);

  Encoding& enc = out.encoding;
  for (Index a = 0; a < nf; ++a) {
    const Index i = r.free_agents[static_cast<std::size_t>(a)];
    Encoding::Agent agent;
    agent.init_options = problem.space.init_options(i);
    agent.lambda_options = problem.space.lambda_options(i);
    for (int k : agent.init_options) agent.init_values.push_back(problem.grid.init_value(k));
    for (int k : agent.lambda_options) agent.lambda_values.push_back(problem.grid.level_value(k));
    agent.observed = static_cast<int>(a);
    enc.agents.push_back(std::move(agent));
  }
  for (const auto& group : r.groups) {
    Encoding::Agent rep;
    rep.selectable = false;
    rep.init_options = {problem.space.init_options(group.members.front()).front()};
    rep.init_values = {group.value};
    rep.lambda_options = {problem.grid.d_lambda};
    rep.lambda_values = {Rational(1)};
    enc.agents.push_back(std::move(rep));
  }
  enc.w = reduce_weights(problem.grid.w_ab.matrix(), r);
  enc.gamma = gamma;
  enc.horizon = horizon;
  enc.d_lambda = problem.grid.d_lambda;

  const std::int64_t budget = tolerance_budget(problem, mode);
  for (int t = 0; t <= horizon; ++t) {
    const auto& obs = problem.spec.observed[static_cast<std::size_t>(t)];
    BinaryOutput free_obs(nf);
    for (Index a = 0; a < nf; ++a) free_obs(a) = obs(r.free_agents[static_cast<std::size_t>(a)]);
    std::int64_t constant = 0;
    for (Index j : r.stubborn) {
      const int bit = values[static_cast<std::size_t>(j)] >= gamma ? 1 : 0;
      if (bit != obs(j)) ++constant;
    }
    enc.observations.push_back(std::move(free_obs));
    out.stubborn_mismatches.push_back(constant);
    enc.budgets.push_back(budget - constant);
  }
  return out;
}

std::string smt_for_reduced(const ReducedProblem& reduced) { return encode_script(reduced.encoding); }

AbstractConfig expand_witness(const ReducedProblem& reduced, const AbstractConfig& reduced_config) {
  const GroupReduction& r = reduced.reduction;
  const std::size_t nf = r.free_agents.size();
  if (reduced_config.init_indices.size() != nf || reduced_config.lambda_levels.size() != nf) {
    throw DimensionError("reduced witness has the wrong number of free agents");
  }
  const std::size_t n = static_cast<std::size_t>(r.original_size());
  AbstractConfig full;
  full.init_indices.assign(n, 0);
  full.lambda_levels.assign(n, 0);
  for (std::size_t a = 0; a < nf; ++a) {
    const auto i = static_cast<std::size_t>(r.free_agents[a]);
    full.init_indices[i] = reduced_config.init_indices[a];
    full.lambda_levels[i] = reduced_config.lambda_levels[a];
  }
  for (Index j : r.stubborn) {
    const auto k = static_cast<std::size_t>(j);
    full.init_indices[k] = reduced.full.space.init_options(j).front();
    full.lambda_levels[k] = reduced.full.space.lambda_options(j).front();
  }
  return full;
}

Verdict smt_verify_reduced(const ReducedProblem& reduced, const SolverOptions& options) {
  Verdict verdict;
  verdict.engine = Engine::Smt;
  const SolverResult res = run_solver(smt_for_reduced(reduced), options);
  verdict.solve_seconds = res.seconds;
  switch (res.status) {
    case SolverStatus::Sat: {
      const auto values = integer_assignments(res.model);
      const AbstractConfig small =
          read_selectors(values, static_cast<Index>(reduced.reduction.free_agents.size()));
      const AbstractConfig full = expand_witness(reduced, small);
      validate_witness(reduced.full, full, reduced.mode);
      verdict.status = Status::Consistent;
      verdict.witnesses.push_back(full);
      verdict.solution_count = 1;
      break;
    }
    case SolverStatus::Unsat:
      verdict.status = Status::Inconsistent;
      verdict.count_complete = true;
      break;
    case SolverStatus::Unknown:
      verdict.status = Status::Inconclusive;
      verdict.notes.push_back(res.timed_out ? "solver timed out" : "solver returned unknown");
      break;
  }
  return verdict;
}

}  // namespace fjv
