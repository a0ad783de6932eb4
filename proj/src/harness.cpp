#include "fjv/harness.hpp"

#include <algorithm>
#include <cmath>
#include <chrono>
#include <filesystem>
#include <numeric>

namespace fjv {

namespace {

std::vector<std::uint64_t> seed_range(std::uint64_t count) {
  std::vector<std::uint64_t> out(count);
  std::iota(out.begin(), out.end(), 0);
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "approx-error") {
    c.d_x = {2, 4, 6, 8};
    c.d_lambda = {2, 4, 6, 8};
    c.w_ab = {"true", "expected"};
    c.seeds = seed_range(20);
    c.engine = "none";
  } else if (experiment == "interpolation") {
    c.alpha = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    c.seeds = seed_range(10);
    c.engine = "none";
  } else if (experiment == "count-solutions") {
    c.n = 10;
    c.eps_lambda = {Rational(0), Rational(1, 4), Rational(1, 2), Rational(3, 4), Rational(1)};
    c.seeds = seed_range(1);
  } else if (experiment == "structural-runtime") {
    c.n = 200;
    c.horizon = 3;
    c.seeds = seed_range(10);
    c.engine = "smt";
  } else if (experiment == "verify") {
    c.n = 4;
    c.horizon = 5;
    c.d_x = {50};
    c.d_lambda = {50};
    c.kappa = Rational(1, 4);
    c.lambda_min = 0.9;
    c.seeds = seed_range(5);
    c.engine = "enum";
  } else {
    throw DomainError("unknown experiment '" + experiment + "'");
  }
  return c;
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw DomainError("experiment config: " + what);
  };
  require(n >= 1, "n must be positive");
  require(horizon >= 0, "horizon must be nonnegative");
  require(!d_x.empty() && !d_lambda.empty(), "d_x and d_lambda lists must be nonempty");
  for (int d : d_x) require(d >= 1, "d_x entries must be positive");
  for (int d : d_lambda) require(d >= 1, "d_lambda entries must be positive");
  require(p_in >= 0 && p_in <= 1 && p_out >= 0 && p_out <= 1, "SBM probabilities must lie in [0,1]");
  require(gamma > 0 && gamma < 1, "gamma must lie in (0,1)");
  require(kappa >= 0, "kappa must be nonnegative");
  require(delta > 0, "delta must be positive");
  for (const Rational& e : eps_lambda) require(e >= 0, "eps_lambda entries must be nonnegative");
  for (double a : alpha) require(a >= 0 && a <= 1, "alpha entries must lie in [0,1]");
  require(!seeds.empty(), "seed list must be nonempty");
  for (const std::string& m : w_ab) require(m == "true" || m == "expected", "w_ab entries are 'true' or 'expected'");
  require(lambda_min >= 0 && lambda_min < 1, "lambda_min must lie in [0,1)");
  require(stubborn_fraction >= 0 && stubborn_fraction <= 1, "stubborn_fraction must lie in [0,1]");
  require(block_in > 0 && block_out >= 0, "block weights must be positive (block_out may be 0)");
  require(lambda_radius >= 0, "lambda_radius must be nonnegative");
  require(box_radius >= 0, "box_radius must be nonnegative");
  require(evidence_samples >= 1, "evidence_samples must be positive");
  require(timeout_s >= 1, "timeout_s must be positive");
  require(count_limit >= 1, "count_limit must be positive");
  if (engine != "none") parse_engine(engine);
  if (experiment == "approx-error" || experiment == "interpolation") {
    require(engine == "none", experiment + " runs no verification engine; engine must be 'none'");
  } else {
    require(engine != "none", experiment + " needs engine enum, smt or both");
  }
  if (experiment == "interpolation") require(!alpha.empty(), "alpha list must be nonempty");
  if (experiment == "count-solutions") require(!eps_lambda.empty(), "eps_lambda list must be nonempty");
  if (experiment == "structural-runtime") require(engine == "smt", "structural-runtime compares SMT pipelines; engine must be 'smt'");
}

namespace {

template <class T>
std::vector<T> list_of(const Json& value, const std::string& where) {
  if (!value.is_array()) throw ParseError(where + ": expected an array");
  std::vector<T> out;
  for (const Json& v : value) out.push_back(v.get<T>());
  return out;
}

std::vector<Rational> rational_list(const Json& value, const std::string& where) {
  if (!value.is_array()) throw ParseError(where + ": expected an array");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(rational_from_json(value[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const Json& value, const std::string& where) {
  require_keys_subset(value,
                      {"schema_version", "experiment", "n", "horizon", "d_x", "d_lambda", "p_in",
                       "p_out", "gamma", "kappa", "delta", "eps_lambda", "alpha", "seeds",
                       "master_seed", "output_dir", "w_ab", "lambda_min", "stubborn_fraction",
                       "block_in", "block_out", "lambda_radius", "box_radius", "evidence_samples",
                       "engine", "solver", "timeout_s", "count_limit"},
                      where);
  if (!value.contains("schema_version")) throw ParseError(where + ": missing schema_version");
  if (value["schema_version"] != kExperimentSchemaVersion) {
    throw ParseError(where + ": unsupported schema_version " + value["schema_version"].dump() +
                     " (expected " + std::to_string(kExperimentSchemaVersion) + ")");
  }
  if (!value.contains("experiment") || !value["experiment"].is_string()) {
    throw ParseError(where + ": 'experiment' must be a string");
  }
  ExperimentConfig c;
  std::string key;
  try {
    c = ExperimentConfig::defaults(value["experiment"].get<std::string>());
    for (const auto& item : value.items()) {
      key = item.key();
      const Json& v = item.value();
      const std::string at = where + "." + key;
      if (key == "n") c.n = v.get<int>();
      else if (key == "horizon") c.horizon = v.get<int>();
      else if (key == "d_x") c.d_x = list_of<int>(v, at);
      else if (key == "d_lambda") c.d_lambda = list_of<int>(v, at);
      else if (key == "p_in") c.p_in = v.get<double>();
      else if (key == "p_out") c.p_out = v.get<double>();
      else if (key == "gamma") c.gamma = v.get<double>();
      else if (key == "kappa") c.kappa = rational_from_json(v, at);
      else if (key == "delta") c.delta = v.get<double>();
      else if (key == "eps_lambda") c.eps_lambda = rational_list(v, at);
      else if (key == "alpha") c.alpha = list_of<double>(v, at);
      else if (key == "seeds") c.seeds = list_of<std::uint64_t>(v, at);
      else if (key == "master_seed") c.master_seed = v.get<std::uint64_t>();
      else if (key == "output_dir") c.output_dir = v.get<std::string>();
      else if (key == "w_ab") c.w_ab = list_of<std::string>(v, at);
      else if (key == "lambda_min") c.lambda_min = v.get<double>();
      else if (key == "stubborn_fraction") c.stubborn_fraction = v.get<double>();
      else if (key == "block_in") c.block_in = rational_from_json(v, at);
      else if (key == "block_out") c.block_out = rational_from_json(v, at);
      else if (key == "lambda_radius") c.lambda_radius = rational_from_json(v, at);
      else if (key == "box_radius") c.box_radius = v.get<double>();
      else if (key == "evidence_samples") c.evidence_samples = v.get<int>();
      else if (key == "engine") c.engine = v.get<std::string>();
      else if (key == "solver") c.solver = v.get<std::string>();
      else if (key == "timeout_s") c.timeout_s = v.get<int>();
      else if (key == "count_limit") c.count_limit = v.get<std::uint64_t>();
    }
    c.validate();
  } catch (const Json::exception& e) {
    throw ParseError(where + "." + key + ": " + e.what());
  } catch (const DomainError& e) {
    throw ParseError(where + ": " + e.what());
  }
  return c;
}

Json experiment_config_to_json(const ExperimentConfig& c) {
  Json eps = Json::array();
  for (const Rational& e : c.eps_lambda) eps.push_back(rational_to_json(e));
  return {{"schema_version", kExperimentSchemaVersion},
          {"experiment", c.experiment},
          {"n", c.n},
          {"horizon", c.horizon},
          {"d_x", c.d_x},
          {"d_lambda", c.d_lambda},
          {"p_in", c.p_in},
          {"p_out", c.p_out},
          {"gamma", c.gamma},
          {"kappa", rational_to_json(c.kappa)},
          {"delta", c.delta},
          {"eps_lambda", eps},
          {"alpha", c.alpha},
          {"seeds", c.seeds},
          {"master_seed", c.master_seed},
          {"output_dir", c.output_dir},
          {"w_ab", c.w_ab},
          {"lambda_min", c.lambda_min},
          {"stubborn_fraction", c.stubborn_fraction},
          {"block_in", rational_to_json(c.block_in)},
          {"block_out", rational_to_json(c.block_out)},
          {"lambda_radius", rational_to_json(c.lambda_radius)},
          {"box_radius", c.box_radius},
          {"evidence_samples", c.evidence_samples},
          {"engine", c.engine},
          {"solver", c.solver},
          {"timeout_s", c.timeout_s},
          {"count_limit", c.count_limit}};
}

void CsvTable::add(std::vector<double> key, std::vector<std::string> cells) {
  if (cells.size() != header.size()) throw std::logic_error("CsvTable: row width differs from header");
  rows.push_back({std::move(key), std::move(cells)});
}

std::string CsvTable::to_csv() const {
  std::vector<const Row*> order;
  for (const Row& r : rows) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const Row* a, const Row* b) { return a->key < b->key; });
  auto line = [](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    return out + "\n";
  };
  std::string out = line(header);
  for (const Row* r : order) out += line(r->cells);
  return out;
}

ConcreteInstance sample_concrete(int n, double p_in, double p_out, double lambda_min, Rng& rng) {
  ConcreteInstance inst;
  inst.sbm = SbmParams::two_block(n, p_in, p_out, rng.next());
  Adjacency adj = sbm_generate(inst.sbm);
  adj.policy = SelfLoopPolicy::AddUnitSelfLoop;
  inst.w_exact = row_normalize(adj);
  Adjacency expected = expected_adjacency(inst.sbm);
  expected.policy = SelfLoopPolicy::AddUnitSelfLoop;
  inst.w_expected = row_normalize(expected);
  Vector<double> x(n), lam(n);
  for (Index i = 0; i < n; ++i) x(i) = rng.uniform01();
  for (Index i = 0; i < n; ++i) lam(i) = rng.uniform(lambda_min, 1.0);
  inst.config = ModelConfig<double>{x, StubbornnessVector<double>(lam), to_double(inst.w_exact)};
  return inst;
}

AbstractGrid abstraction_grid(const InfluenceMatrix<double>& w, const InfluenceMatrix<Rational>& w_ab,
                              int d_x, int d_lambda) {
  AbstractGrid grid;
  grid.d_x = d_x;
  grid.d_lambda = d_lambda;
  grid.w_ab = w_ab;
  grid.eps_w = weight_error(w.matrix(), to_double(w_ab.matrix()));
  grid.validate();
  return grid;
}

PlantedInstance planted_sbm_problem(int n, int horizon, int d_x, int d_lambda, double p_in,
                                    double p_out, const Rational& kappa, Rng& rng, double gamma) {
  PlantedInstance inst;
  Adjacency adj = sbm_generate(SbmParams::two_block(n, p_in, p_out, rng.next()));
  adj.policy = SelfLoopPolicy::AddUnitSelfLoop;
  inst.grid.d_x = d_x;
  inst.grid.d_lambda = d_lambda;
  inst.grid.w_ab = row_normalize(adj);
  for (int i = 0; i < n; ++i) {
    inst.truth.init_indices.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(d_x))));
    inst.truth.lambda_levels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(d_lambda) + 1)));
  }
  inst.problem.grid = inst.grid;
  inst.problem.space = SearchSpace::full(n, inst.grid);
  inst.problem.spec.kappa = kappa;
  inst.problem.gamma = gamma;
  inst.problem.spec.observed =
      simulate(decode(inst.truth, inst.grid), horizon, exact_gamma(inst.problem.gamma)).outputs;
  return inst;
}

StructuralInstance structural_instance(int n, int horizon, int d_x, int d_lambda, double fraction,
                                       const Rational& block_in, const Rational& block_out,
                                       const Rational& radius, const Rational& kappa, Rng& rng,
                                       double gamma) {
  StructuralInstance inst;
  inst.communities = Communities::two_halves(n);
  inst.grid.d_x = d_x;
  inst.grid.d_lambda = d_lambda;
  inst.grid.w_ab = row_normalize(block_weighted_adjacency(n, block_in, block_out, inst.communities));

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    std::swap(order[static_cast<std::size_t>(i)], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  }
  const auto count = static_cast<std::size_t>(std::lround(fraction * n));
  inst.stubborn.assign(static_cast<std::size_t>(n), false);
  for (std::size_t k = 0; k < count; ++k) inst.stubborn[static_cast<std::size_t>(order[k])] = true;

  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    inst.truth.init_indices.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(d_x))));
    inst.truth.lambda_levels.push_back(
        inst.stubborn[i] ? d_lambda : static_cast<int>(rng.below(static_cast<std::uint64_t>(d_lambda) + 1)));
  }

  VerificationProblem& p = inst.uninformed;
  p.grid = inst.grid;
  p.space = SearchSpace::full(n, inst.grid);
  p.spec.kappa = kappa;
  p.gamma = gamma;
  p.spec.observed = simulate(decode(inst.truth, inst.grid), horizon, exact_gamma(p.gamma)).outputs;
  for (Index i = 0; i < n; ++i) {
    const Rational star = inst.grid.level_value(inst.truth.lambda_levels[static_cast<std::size_t>(i)]);
    std::vector<int> levels;
    for (int k = 0; k <= d_lambda; ++k) {
      if (abs(inst.grid.level_value(k) - star) <= radius) levels.push_back(k);
    }
    p.space.set_lambda_options(i, levels);
  }
  inst.informed = p;
  for (Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!inst.stubborn[k]) continue;
    inst.informed.space.set_init_options(i, {inst.truth.init_indices[k]});
    inst.informed.space.set_lambda_options(i, {d_lambda});
  }
  return inst;
}

namespace {

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(const Rational& q) { return to_string(q); }
std::string fmt(bool b) { return b ? "1" : "0"; }

EngineOptions engine_options(const ExperimentConfig& cfg) {
  EngineOptions o;
  o.engine = parse_engine(cfg.engine);
  o.smt.solver = SolverOptions{cfg.solver, cfg.timeout_s};
  o.smt.count_limit = cfg.count_limit;
  return o;
}

Json base_meta(const ExperimentConfig& cfg) {
  return {{"experiment", cfg.experiment},
          {"schema_version", kExperimentSchemaVersion},
          {"config", experiment_config_to_json(cfg)},
          {"rng", "Rng::derive(master_seed, seed): mt19937_64 seeded through splitmix64"}};
}

}  // namespace

ExperimentReport exp_approx_error(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.table.header = {"seed", "master_seed", "n", "horizon", "d_x", "d_lambda", "w_ab", "p_in",
                         "p_out", "gamma", "engine", "eps_w", "rho", "eps_x", "state_error",
                         "output_error", "one_step_bound"};
  for (std::uint64_t seed : cfg.seeds) {
    Rng rng = Rng::derive(cfg.master_seed, seed);
    const ConcreteInstance inst = sample_concrete(cfg.n, cfg.p_in, cfg.p_out, cfg.lambda_min, rng);
    const InfluenceMatrix<double>& w = inst.config.w;
    const auto traj = simulate(inst.config, cfg.horizon, cfg.gamma);
    const double rho = contraction_factor(inst.config.lambda, w);
    for (std::size_t m = 0; m < cfg.w_ab.size(); ++m) {
      const auto& w_ab = cfg.w_ab[m] == "true" ? inst.w_exact : inst.w_expected;
      for (int dx : cfg.d_x) {
        for (int dl : cfg.d_lambda) {
          const AbstractGrid grid = abstraction_grid(w, w_ab, dx, dl);
          const auto traj_ab = simulate(decode_double(snap(inst.config, grid), grid), cfg.horizon, cfg.gamma);
          const double eps_x = epsilon_x(w, dl, dx, grid.eps_w);
          report.table.add({static_cast<double>(seed), static_cast<double>(dx), static_cast<double>(dl),
                            static_cast<double>(m)},
                           {fmt(seed), fmt(cfg.master_seed), fmt(cfg.n), fmt(cfg.horizon), fmt(dx), fmt(dl),
                            cfg.w_ab[m], fmt(cfg.p_in), fmt(cfg.p_out), fmt(cfg.gamma), "simulation",
                            fmt(grid.eps_w), fmt(rho), fmt(eps_x), fmt(max_state_error(traj, traj_ab, 1)),
                            fmt(max_output_error(traj, traj_ab, 1)),
                            fmt(one_step_bound_check(traj, traj_ab, rho, eps_x))});
        }
      }
    }
  }
  report.meta = base_meta(cfg);
  return report;
}

ExperimentReport exp_interpolation(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.table.header = {"seed", "master_seed", "n", "horizon", "d_x", "d_lambda", "gamma", "engine",
                         "alpha", "t", "mismatches", "distance"};
  for (std::uint64_t seed : cfg.seeds) {
    Rng rng = Rng::derive(cfg.master_seed, seed);
    const ConcreteInstance inst = sample_concrete(cfg.n, cfg.p_in, cfg.p_out, cfg.lambda_min, rng);
    const InfluenceMatrix<double>& w = inst.config.w;
    const auto reference = simulate(inst.config, cfg.horizon, cfg.gamma);
    for (int dx : cfg.d_x) {
      for (int dl : cfg.d_lambda) {
        const AbstractGrid grid = abstraction_grid(w, inst.w_exact, dx, dl);
        const ModelConfig<double> ab = decode_double(snap(inst.config, grid), grid);
        for (double a : cfg.alpha) {
          const Vector<double> x = (1.0 - a) * ab.x_init + a * inst.config.x_init;
          const Vector<double> lam = (1.0 - a) * ab.lambda.values() + a * inst.config.lambda.values();
          const auto traj = simulate(x, StubbornnessVector<double>(lam), w, cfg.horizon, cfg.gamma);
          for (int t = 0; t <= cfg.horizon; ++t) {
            const auto k = static_cast<std::size_t>(t);
            report.table.add({static_cast<double>(seed), static_cast<double>(dx), static_cast<double>(dl), a,
                              static_cast<double>(t)},
                             {fmt(seed), fmt(cfg.master_seed), fmt(cfg.n), fmt(cfg.horizon), fmt(dx), fmt(dl),
                              fmt(cfg.gamma), "simulation", fmt(a), fmt(t),
                              std::to_string(mismatch_count(traj.outputs[k], reference.outputs[k])),
                              fmt(hamming_value(traj.outputs[k], reference.outputs[k]))});
          }
        }
      }
    }
  }
  report.meta = base_meta(cfg);
  return report;
}

ExperimentReport exp_count_solutions(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.table.header = {"seed", "master_seed", "n", "horizon", "d_x", "d_lambda", "p_in", "p_out",
                         "gamma", "kappa", "engine", "eps_lambda", "count_enum", "count_smt",
                         "count_complete", "unconstrained"};
  report.timing = CsvTable{};
  report.timing->header = {"seed", "d_x", "d_lambda", "eps_lambda", "engine", "seconds"};
  const EngineOptions options = engine_options(cfg);
  for (std::uint64_t seed : cfg.seeds) {
    for (int dx : cfg.d_x) {
      for (int dl : cfg.d_lambda) {
        Rng rng = Rng::derive(cfg.master_seed, seed);
        const PlantedInstance inst =
            planted_sbm_problem(cfg.n, cfg.horizon, dx, dl, cfg.p_in, cfg.p_out, cfg.kappa, rng, cfg.gamma);
        const Vector<Rational> hat = decode_lambda(inst.truth, inst.grid).values();

        EngineOptions all = options;
        all.enumeration.max_witnesses = 0;
        const std::uint64_t unconstrained =
            options.engine == EngineChoice::Smt
                ? smt_count(inst.problem, ToleranceMode::Kappa, std::nullopt, options.smt.solver,
                            cfg.count_limit).count
                : enumerate_verify(inst.problem, ToleranceMode::Kappa, all.enumeration).solution_count;
        for (const Rational& eps : cfg.eps_lambda) {
          const auto start = std::chrono::steady_clock::now();
          const SolutionCount c = count_solutions(inst.problem, hat, eps, options);
          const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          const std::vector<double> key{static_cast<double>(seed), static_cast<double>(dx),
                                        static_cast<double>(dl), to_double(eps)};
          report.table.add(key, {fmt(seed), fmt(cfg.master_seed), fmt(cfg.n), fmt(cfg.horizon), fmt(dx),
                                 fmt(dl), fmt(cfg.p_in), fmt(cfg.p_out), fmt(cfg.gamma), fmt(cfg.kappa),
                                 cfg.engine, fmt(eps), c.enumeration ? fmt(*c.enumeration) : "",
                                 c.smt ? fmt(*c.smt) : "", fmt(c.complete), fmt(unconstrained)});
          report.timing->add(key, {fmt(seed), fmt(dx), fmt(dl), fmt(eps), cfg.engine, fmt(seconds)});
        }
      }
    }
  }
  report.meta = base_meta(cfg);
  report.meta["timing"] = "seconds: wall time of count_solutions per row (all engines selected), including solver spawns";
  return report;
}

ExperimentReport exp_structural_runtime(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.table.header = {"seed", "master_seed", "n", "horizon", "d_x", "d_lambda", "stubborn_fraction",
                         "block_in", "block_out", "lambda_radius", "kappa", "engine", "pipeline", "status",
                         "real_variables", "timed_out"};
  report.timing = CsvTable{};
  report.timing->header = {"seed", "d_x", "d_lambda", "pipeline", "solve_seconds", "net_seconds"};
  const SolverOptions solver{cfg.solver, cfg.timeout_s};
  const double overhead = solver_spawn_overhead(solver);
  const std::vector<std::string> pipelines{"uninformed-full", "informed-full", "informed-reduced"};

  for (std::uint64_t seed : cfg.seeds) {
    for (int dx : cfg.d_x) {
      for (int dl : cfg.d_lambda) {
        Rng rng = Rng::derive(cfg.master_seed, seed);
        const StructuralInstance inst = structural_instance(cfg.n, cfg.horizon, dx, dl, cfg.stubborn_fraction,
                                                      cfg.block_in, cfg.block_out, cfg.lambda_radius,
                                                      cfg.kappa, rng, cfg.gamma);
        SmtOptions smt;
        smt.solver = solver;
        const ReducedProblem reduced = reduce_problem(inst.informed, inst.communities, ToleranceMode::Kappa);
        const Verdict verdicts[3] = {smt_verify(inst.uninformed, ToleranceMode::Kappa, smt),
                                     smt_verify(inst.informed, ToleranceMode::Kappa, smt),
                                     smt_verify_reduced(reduced, solver)};
        const std::int64_t vars[3] = {make_encoding(inst.uninformed, ToleranceMode::Kappa).real_variables(),
                                      make_encoding(inst.informed, ToleranceMode::Kappa).real_variables(),
                                      reduced.encoding.real_variables()};
        const Verdict& full = verdicts[1];
        const Verdict& small = verdicts[2];
        if (full.status != Status::Inconclusive && small.status != Status::Inconclusive &&
            full.status != small.status) {
          throw EngineDisagreement("seed " + fmt(seed) + ": full encoding says " + to_string(full.status) +
                                   ", reduced says " + to_string(small.status));
        }
        for (std::size_t p = 0; p < 3; ++p) {
          const std::vector<double> key{static_cast<double>(seed), static_cast<double>(dx),
                                        static_cast<double>(dl), static_cast<double>(p)};
          const bool timed_out = verdicts[p].status == Status::Inconclusive;
          report.table.add(key, {fmt(seed), fmt(cfg.master_seed), fmt(cfg.n), fmt(cfg.horizon), fmt(dx), fmt(dl),
                                 fmt(cfg.stubborn_fraction), fmt(cfg.block_in), fmt(cfg.block_out),
                                 fmt(cfg.lambda_radius), fmt(cfg.kappa), "smt", pipelines[p],
                                 to_string(verdicts[p].status), std::to_string(vars[p]), fmt(timed_out)});
          report.timing->add(key, {fmt(seed), fmt(dx), fmt(dl), pipelines[p], fmt(verdicts[p].solve_seconds),
                                   fmt(std::max(0.0, verdicts[p].solve_seconds - overhead))});
        }
      }
    }
  }
  report.meta = base_meta(cfg);
  report.meta["spawn_overhead_seconds"] = overhead;
  report.meta["timing"] =
      "solve_seconds: wall time from solver spawn to verdict for one query (script write, solve, model read). "
      "net_seconds: solve_seconds minus the median wall time of three trivial '(check-sat)' runs measured "
      "once per experiment (process spawn overhead), floored at 0. Runs are sequential; absolute times are "
      "machine-dependent.";
  return report;
}

ExperimentReport exp_verify(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.table.header = {"seed", "master_seed", "n", "horizon", "d_x", "d_lambda", "kappa", "delta",
                         "box_radius", "lambda_min", "engine", "status", "at_plus", "at_minus",
                         "cover_size", "evidence_holds", "rho_max", "eps_x"};
  const EngineOptions options = engine_options(cfg);
  for (std::uint64_t seed : cfg.seeds) {
    for (int dx : cfg.d_x) {
      for (int dl : cfg.d_lambda) {
        Rng rng = Rng::derive(cfg.master_seed, seed);
        const ConcreteInstance inst = sample_concrete(cfg.n, cfg.p_in, cfg.p_out, cfg.lambda_min, rng);
        const InfluenceMatrix<double>& w = inst.config.w;
        ConfigBox box;
        for (Index i = 0; i < cfg.n; ++i) {
          const double x = inst.config.x_init(i), l = inst.config.lambda[i];
          box.init.push_back({std::max(0.0, x - cfg.box_radius), std::min(1.0, x + cfg.box_radius)});
          box.lambda.push_back({std::max(0.0, l - cfg.box_radius), std::min(1.0, l + cfg.box_radius)});
        }
        ObservationSpec spec;
        spec.kappa = cfg.kappa;
        spec.observed = simulate(inst.config, cfg.horizon, cfg.gamma).outputs;
        const AbstractGrid grid = abstraction_grid(w, inst.w_exact, dx, dl);
        const BoxVerification v =
            verify_box(spec, grid, box, w, cfg.delta, cfg.gamma, options, cfg.evidence_samples, rng.next());
        report.table.add(
            {static_cast<double>(seed), static_cast<double>(dx), static_cast<double>(dl)},
            {fmt(seed), fmt(cfg.master_seed), fmt(cfg.n), fmt(cfg.horizon), fmt(dx), fmt(dl), fmt(cfg.kappa),
             fmt(cfg.delta), fmt(cfg.box_radius), fmt(cfg.lambda_min), cfg.engine, to_string(v.verdict.status),
             to_string(v.abstract.at_plus.status),
             v.abstract.at_minus ? to_string(v.abstract.at_minus->status) : "SKIPPED", fmt(v.cover.size()),
             fmt(v.evidence.holds()), fmt(v.evidence.rho_max), fmt(v.evidence.eps_x)});
      }
    }
  }
  report.meta = base_meta(cfg);
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment == "approx-error") return exp_approx_error(cfg);
  if (cfg.experiment == "interpolation") return exp_interpolation(cfg);
  if (cfg.experiment == "count-solutions") return exp_count_solutions(cfg);
  if (cfg.experiment == "structural-runtime") return exp_structural_runtime(cfg);
  if (cfg.experiment == "verify") return exp_verify(cfg);
  throw DomainError("unknown experiment '" + cfg.experiment + "'");
}

std::vector<std::string> write_report(const ExperimentReport& report, const ExperimentConfig& cfg,
                                      const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string base = (std::filesystem::path(dir) / cfg.experiment).string();
  std::vector<std::string> paths{base + ".csv", base + "_meta.json"};
  write_file(paths[0], report.table.to_csv());
  write_file(paths[1], report.meta.dump(2) + "\n");
  if (report.timing) {
    paths.push_back(base + "_timing.csv");
    write_file(paths.back(), report.timing->to_csv());
  }
  return paths;
}

double solver_spawn_overhead(const SolverOptions& options, int runs) {
  std::vector<double> times;
  for (int r = 0; r < runs; ++r) times.push_back(run_solver("(check-sat)\n", options).seconds);
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

}  // namespace fjv
