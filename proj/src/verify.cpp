#include "fjv/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fjv {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kSaturated / b) return kSaturated;
  return a * b;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > kSaturated - b ? kSaturated : a + b;
}

// Near this distance from the threshold the double path is not trusted and
// the configuration is re-run exactly.
constexpr double kThresholdGuard = 1e-9;

}  // namespace

void VerificationProblem::validate() const {
  spec.validate();
  grid.validate();
  if (spec.agents() != grid.agents()) throw DimensionError("observations do not match grid size");
  if (space.agents() != grid.agents()) throw DimensionError("search space does not match grid size");
  space.validate(grid);
  if (space.empty()) throw DomainError("search space is empty");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  check_gamma(gamma);
}

Rational tolerance(const VerificationProblem& problem, ToleranceMode mode) {
  const Rational& kappa = problem.spec.kappa;
  const Rational d = rational_from_double(problem.delta);
  switch (mode) {
    case ToleranceMode::Kappa:
      return kappa;
    case ToleranceMode::KappaPlusDelta:
      return kappa + d;
    case ToleranceMode::KappaMinusDelta:
      return kappa > d ? Rational(kappa - d) : Rational(0);
  }
  return kappa;
}

std::int64_t tolerance_budget(const VerificationProblem& problem, ToleranceMode mode) {
  return mismatch_budget(tolerance(problem, mode), problem.agents());
}

Rational exact_gamma(double gamma) { return rational_from_double(gamma); }

std::string to_string(Status status) {
  switch (status) {
    case Status::Consistent:
      return "CONSISTENT";
    case Status::Inconsistent:
      return "INCONSISTENT";
    case Status::Inconclusive:
      return "INCONCLUSIVE";
  }
  return "?";
}

std::string to_string(Engine engine) { return engine == Engine::Enumeration ? "enum" : "smt"; }

std::string to_string(ToleranceMode mode) {
  switch (mode) {
    case ToleranceMode::Kappa:
      return "kappa";
    case ToleranceMode::KappaPlusDelta:
      return "kappa+delta";
    case ToleranceMode::KappaMinusDelta:
      return "kappa-delta";
  }
  return "?";
}

SearchSpaceOverflow::SearchSpaceOverflow(std::uint64_t effective, std::uint64_t cap)
    : std::length_error("search space of " + std::to_string(effective) +
                        " configurations exceeds the enumeration cap " + std::to_string(cap)),
      effective_(effective) {}

namespace {

// Per-agent data shared by the counting pass and the enumeration.
struct AgentTable {
  std::vector<std::vector<int>> init_options;
  std::vector<std::vector<int>> lambda_options;
  std::vector<std::vector<double>> init_values;
  std::vector<std::vector<double>> lambda_values;
  std::vector<std::vector<int>> t0_mismatch;  // per init option
};

AgentTable build_table(const VerificationProblem& problem) {
  const Index n = problem.agents();
  const Rational g = exact_gamma(problem.gamma);
  AgentTable table;
  for (Index i = 0; i < n; ++i) {
    const auto& inits = problem.space.init_options(i);
    const auto& levels = problem.space.lambda_options(i);
    table.init_options.push_back(inits);
    table.lambda_options.push_back(levels);
    std::vector<double> iv, lv;
    std::vector<int> mism;
    for (int k : inits) {
      const Rational v = problem.grid.init_value(k);
      iv.push_back(to_double(v));
      const int bit = v >= g ? 1 : 0;
      mism.push_back(bit != problem.spec.observed[0](i) ? 1 : 0);
    }
    for (int k : levels) lv.push_back(to_double(problem.grid.level_value(k)));
    table.init_values.push_back(std::move(iv));
    table.lambda_values.push_back(std::move(lv));
    table.t0_mismatch.push_back(std::move(mism));
  }
  return table;
}

// Number of init combinations with at most `budget` mismatches at t = 0.
std::uint64_t pruned_init_count(const AgentTable& table, std::int64_t budget) {
  const std::size_t n = table.init_options.size();
  const std::size_t width = static_cast<std::size_t>(std::min<std::int64_t>(budget, static_cast<std::int64_t>(n))) + 1;
  std::vector<std::uint64_t> dp(width, 0), next(width, 0);
  dp[0] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(next.begin(), next.end(), 0);
    for (std::size_t m = 0; m < width; ++m) {
      if (dp[m] == 0) continue;
      for (int mis : table.t0_mismatch[i]) {
        const std::size_t to = m + static_cast<std::size_t>(mis);
        if (to < width) next[to] = saturating_add(next[to], dp[m]);
      }
    }
    dp.swap(next);
  }
  std::uint64_t total = 0;
  for (auto c : dp) total = saturating_add(total, c);
  return total;
}

}  // namespace

std::uint64_t effective_search_size(const VerificationProblem& problem, ToleranceMode mode) {
  const AgentTable table = build_table(problem);
  const std::int64_t budget = tolerance_budget(problem, mode);
  return saturating_mul(pruned_init_count(table, budget), problem.space.lambda_combinations());
}

bool config_satisfies(const VerificationProblem& problem, const AbstractConfig& config,
                      ToleranceMode mode) {
  const ModelConfig<Rational> exact = decode(config, problem.grid);
  const Trajectory<Rational> traj = simulate(exact, problem.horizon(), exact_gamma(problem.gamma));
  ObservationSpec spec = problem.spec;
  spec.kappa = tolerance(problem, mode);
  return satisfies(traj, spec);
}

void validate_witness(const VerificationProblem& problem, const AbstractConfig& config,
                      ToleranceMode mode) {
  if (!problem.space.contains(config)) {
    throw ValidationGateError("witness lies outside the search space");
  }
  if (!config_satisfies(problem, config, mode)) {
    throw ValidationGateError("witness does not satisfy the observations under exact re-simulation");
  }
}

Verdict enumerate_verify(const VerificationProblem& problem, ToleranceMode mode,
                         const EnumerationOptions& options) {
  problem.validate();
  const AgentTable table = build_table(problem);
  const std::int64_t budget = tolerance_budget(problem, mode);
  const std::uint64_t effective =
      saturating_mul(pruned_init_count(table, budget), problem.space.lambda_combinations());
  if (effective > options.cap) throw SearchSpaceOverflow(effective, options.cap);

  const Index n = problem.agents();
  const std::size_t un = static_cast<std::size_t>(n);
  const int horizon = problem.horizon();
  const Matrix<double> w = to_double(problem.grid.w_ab.matrix());
  const double gamma = problem.gamma;
  const auto& observed = problem.spec.observed;

  Verdict verdict;
  verdict.engine = Engine::Enumeration;
  bool stopped = false;

  AbstractConfig config;
  config.init_indices.assign(un, 0);
  config.lambda_levels.assign(un, 0);
  std::vector<std::size_t> init_pick(un, 0), lam_pick(un, 0);
  Vector<double> x0(n), lam(n), x(n), mixed(n);

  auto accept = [&](bool exact_needed) {
    if (exact_needed && !config_satisfies(problem, config, mode)) return;
    if (options.filter && !options.filter(config)) return;
    ++verdict.solution_count;
    if (verdict.witnesses.size() < options.max_witnesses) verdict.witnesses.push_back(config);
    if (options.stop_at_first) stopped = true;
  };

  // Runs every stubbornness combination for the current init combination.
  auto run_lambdas = [&]() {
    std::fill(lam_pick.begin(), lam_pick.end(), 0);
    for (std::size_t i = 0; i < un; ++i) {
      config.lambda_levels[i] = table.lambda_options[i][0];
      lam(static_cast<Index>(i)) = table.lambda_values[i][0];
    }
    while (true) {
      // Bits never feed back into the states, so the double path stays
      // accurate past an ambiguous agent; only steps where the ambiguous
      // agents could decide the budget need the exact run.
      x = x0;
      bool undecided = false;
      bool violated = false;
      for (int t = 1; t <= horizon && !violated; ++t) {
        mixed.noalias() = w * x;
        x = (1.0 - lam.array()).matrix().cwiseProduct(mixed) + lam.cwiseProduct(x0);
        std::int64_t sure = 0, ambiguous = 0;
        const auto& obs = observed[static_cast<std::size_t>(t)];
        for (Index i = 0; i < n; ++i) {
          if (std::abs(x(i) - gamma) <= kThresholdGuard) {
            ++ambiguous;
          } else if ((x(i) >= gamma ? 1 : 0) != obs(i)) {
            ++sure;
          }
        }
        if (sure > budget) violated = true;
        else if (sure + ambiguous > budget) undecided = true;
      }
      if (!violated) accept(undecided);
      if (stopped) return;
      // Advance the mixed-radix counter, last agent fastest.
      std::size_t pos = un;
      while (pos > 0) {
        const std::size_t i = pos - 1;
        if (++lam_pick[i] < table.lambda_options[i].size()) {
          config.lambda_levels[i] = table.lambda_options[i][lam_pick[i]];
          lam(static_cast<Index>(i)) = table.lambda_values[i][lam_pick[i]];
          break;
        }
        lam_pick[i] = 0;
        config.lambda_levels[i] = table.lambda_options[i][0];
        lam(static_cast<Index>(i)) = table.lambda_values[i][0];
        --pos;
      }
      if (pos == 0) return;
    }
  };

  // Depth-first over init options, pruning by the t = 0 mismatch count.
  std::function<void(std::size_t, std::int64_t)> descend = [&](std::size_t i, std::int64_t used) {
    if (stopped) return;
    if (i == un) {
      run_lambdas();
      return;
    }
    for (std::size_t k = 0; k < table.init_options[i].size() && !stopped; ++k) {
      const std::int64_t now = used + table.t0_mismatch[i][k];
      if (now > budget) continue;
      config.init_indices[i] = table.init_options[i][k];
      x0(static_cast<Index>(i)) = table.init_values[i][k];
      descend(i + 1, now);
    }
  };
  descend(0, 0);

  verdict.count_complete = !stopped;
  verdict.status = verdict.solution_count > 0 ? Status::Consistent : Status::Inconsistent;
  return verdict;
}

SearchSpace restrict_lambda(const VerificationProblem& problem, const Vector<Rational>& lambda_hat,
                            const Rational& eps_lambda) {
  if (lambda_hat.size() != problem.agents()) throw DimensionError("lambda_hat has wrong length");
  if (eps_lambda < 0) throw DomainError("eps_lambda must be nonnegative");
  SearchSpace out = problem.space;
  for (Index i = 0; i < problem.agents(); ++i) {
    std::vector<int> kept;
    for (int k : problem.space.lambda_options(i)) {
      const Rational gap = abs(problem.grid.level_value(k) - lambda_hat(i));
      if (gap <= eps_lambda) kept.push_back(k);
    }
    out.set_lambda_options(i, std::move(kept));
  }
  return out;
}

bool abstract_assumption2(const VerificationProblem& problem, const AbstractConfig& config) {
  const ModelConfig<Rational> exact = decode(config, problem.grid);
  const Trajectory<Rational> traj = simulate(exact, problem.horizon(), exact_gamma(problem.gamma));
  return assumption2_check(traj, problem.delta, problem.gamma);
}

Verdict transfer_verdict(const AbstractResults& results, double delta, const Rational& kappa,
                         const std::optional<BoxEvidence>& evidence) {
  Verdict out;
  out.engine = results.at_plus.engine;
  out.evidence = evidence;
  out.status = Status::Inconclusive;
  const bool hypotheses = !evidence || evidence->holds();
  if (!evidence) out.notes.push_back("box hypotheses were not checked");
  else if (!evidence->holds()) out.notes.push_back("box hypotheses fail; violations do not transfer");

  if (results.at_plus.status == Status::Inconsistent) {
    if (hypotheses) {
      out.status = Status::Inconsistent;
      out.notes.push_back("no abstract configuration meets kappa + delta");
      return out;
    }
  } else if (results.at_plus.status == Status::Inconclusive) {
    out.notes.push_back("kappa + delta query inconclusive");
  }

  if (kappa < rational_from_double(delta)) {
    out.notes.push_back("kappa < delta: consistency part skipped");
    return out;
  }
  if (results.at_minus) {
    const Verdict& lower = *results.at_minus;
    if (lower.status == Status::Consistent && !lower.witnesses.empty() && !hypotheses) {
      out.notes.push_back("an abstract witness meets kappa - delta, but the box hypotheses fail");
    } else if (lower.status == Status::Consistent && !lower.witnesses.empty()) {
      out.status = Status::Consistent;
      out.engine = lower.engine;
      out.witnesses = lower.witnesses;
      out.solution_count = lower.solution_count;
      out.count_complete = lower.count_complete;
      out.notes.push_back("abstract witness meets kappa - delta and the threshold margin");
    } else if (lower.status == Status::Inconclusive) {
      out.notes.push_back("kappa - delta query inconclusive");
    } else {
      out.notes.push_back("no abstract witness meets kappa - delta with the threshold margin");
    }
  }
  return out;
}

}  // namespace fjv
