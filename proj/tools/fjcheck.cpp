// fjcheck: simulate, abstract, verify, count and run experiments.
//
// Exit codes: 0 CONSISTENT (or success), 1 INCONSISTENT, 2 INCONCLUSIVE,
// 3 invalid input, 4 internal or solver error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fjv/harness.hpp"

using namespace fjv;

namespace {

constexpr int kExitInvalidInput = 3;
constexpr int kExitInternal = 4;

struct Flags {
  std::string config;
  std::string obs;
  std::string solver = kDefaultSolverCommand;
  std::string engine = "enum";
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string emit_smt;
  int timeout_s = kDefaultSolverTimeout;
};

Json load_config(const Flags& f, std::initializer_list<std::string_view> keys) {
  const Json j = parse_json(read_file(f.config), f.config);
  require_keys_subset(j, keys, f.config);
  if (!j.contains("schema_version") || j["schema_version"] != 1) {
    throw ParseError(f.config + ": schema_version must be 1");
  }
  return j;
}

template <class T>
T get(const Json& j, const char* key, const std::string& source) {
  if (!j.contains(key)) throw ParseError(source + ": missing '" + key + "'");
  try {
    return j[key].get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(source + "." + key + ": " + e.what());
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& source) {
  return j.contains(key) ? get<T>(j, key, source) : fallback;
}

/// "w": dense matrix, or "sbm": {"n", "p_in", "p_out", "seed"} row-normalized
/// with unit self-loops on isolated agents.
InfluenceMatrix<Rational> load_w(const Json& j, const std::string& source, std::optional<SbmParams>* sbm) {
  if (j.contains("w") == j.contains("sbm")) throw ParseError(source + ": give exactly one of 'w' and 'sbm'");
  try {
    if (j.contains("w")) return InfluenceMatrix<Rational>(matrix_from_json(j["w"], source + ".w"));
  } catch (const std::invalid_argument& e) {
    throw ParseError(source + ".w: " + e.what());
  }
  const Json& s = j["sbm"];
  const std::string where = source + ".sbm";
  require_keys_subset(s, {"n", "p_in", "p_out", "seed"}, where);
  SbmParams p = SbmParams::two_block(get<int>(s, "n", where), get<double>(s, "p_in", where),
                                     get<double>(s, "p_out", where), get_or<std::uint64_t>(s, "seed", 0, where));
  p.validate();
  Adjacency adj = sbm_generate(p);
  adj.policy = SelfLoopPolicy::AddUnitSelfLoop;
  if (sbm) *sbm = p;
  return row_normalize(adj);
}

ModelConfig<Rational> load_model(const Json& j, const std::string& source, std::optional<SbmParams>* sbm) {
  InfluenceMatrix<Rational> w = load_w(j, source, sbm);
  Vector<Rational> x = vector_from_json(j.at("x_init"), source + ".x_init");
  Vector<Rational> lam = vector_from_json(j.at("lambda"), source + ".lambda");
  if (x.size() != w.size() || lam.size() != w.size()) {
    throw ParseError(source + ": x_init, lambda and the influence matrix differ in size");
  }
  try {
    check_unit_interval(x, "initial opinion");
    return ModelConfig<Rational>{x, StubbornnessVector<Rational>(lam), w};
  } catch (const std::invalid_argument& e) {
    throw ParseError(source + ": " + e.what());
  }
}

std::vector<Interval> intervals(const Json& value, const std::string& where) {
  if (!value.is_array()) throw ParseError(where + ": expected an array of [lo, hi] pairs");
  std::vector<Interval> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const Json& pair = value[i];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw ParseError(where + "[" + std::to_string(i) + "]: expected [lo, hi]");
    }
    out.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  return out;
}

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

void write_out(const Flags& f, const std::string& name, const std::string& content) {
  if (f.out.empty()) return;
  std::filesystem::create_directories(f.out);
  const std::string path = (std::filesystem::path(f.out) / name).string();
  write_file(path, content);
  std::cerr << "wrote " << path << "\n";
}

int cmd_simulate(const Flags& f) {
  const Json j = load_config(f, {"schema_version", "w", "sbm", "x_init", "lambda", "horizon", "gamma", "exact"});
  const ModelConfig<Rational> model = load_model(j, f.config, nullptr);
  const int horizon = get<int>(j, "horizon", f.config);
  const double gamma = get_or<double>(j, "gamma", kDefaultGamma, f.config);
  std::vector<BinaryOutput> outputs;
  Matrix<double> states(horizon + 1, model.size());
  if (get_or<bool>(j, "exact", false, f.config)) {
    const auto traj = simulate(model, horizon, exact_gamma(gamma));
    outputs = traj.outputs;
    for (int t = 0; t <= horizon; ++t) states.row(t) = to_double(traj.states[static_cast<std::size_t>(t)].current).transpose();
  } else {
    const ModelConfig<double> m{to_double(model.x_init), to_double(model.lambda), to_double(model.w)};
    const auto traj = simulate(m, horizon, gamma);
    outputs = traj.outputs;
    for (int t = 0; t <= horizon; ++t) states.row(t) = traj.states[static_cast<std::size_t>(t)].current.transpose();
  }
  std::cout << observations_to_csv(outputs);
  write_out(f, "outputs.csv", observations_to_csv(outputs));
  write_out(f, "states.csv", matrix_to_csv(states));
  return 0;
}

int cmd_abstract(const Flags& f) {
  const Json j = load_config(f, {"schema_version", "w", "sbm", "x_init", "lambda", "horizon", "gamma",
                                 "d_x", "d_lambda", "w_ab", "delta"});
  std::optional<SbmParams> sbm;
  const ModelConfig<Rational> model = load_model(j, f.config, &sbm);
  const ModelConfig<double> m{to_double(model.x_init), to_double(model.lambda), to_double(model.w)};
  const int horizon = get<int>(j, "horizon", f.config);
  const double gamma = get_or<double>(j, "gamma", kDefaultGamma, f.config);
  const double delta = get<double>(j, "delta", f.config);

  InfluenceMatrix<Rational> w_ab = model.w;
  if (j.contains("w_ab")) {
    if (j["w_ab"] == "expected") {
      if (!sbm) throw ParseError(f.config + ".w_ab: 'expected' needs an 'sbm' network");
      Adjacency e = expected_adjacency(*sbm);
      e.policy = SelfLoopPolicy::AddUnitSelfLoop;
      w_ab = row_normalize(e);
    } else if (j["w_ab"] != "true") {
      w_ab = InfluenceMatrix<Rational>(matrix_from_json(j["w_ab"], f.config + ".w_ab"));
    }
  }
  const AbstractGrid grid =
      abstraction_grid(m.w, w_ab, get<int>(j, "d_x", f.config), get<int>(j, "d_lambda", f.config));
  const AbstractConfig snapped = snap(m, grid);
  const auto traj = simulate(m, horizon, gamma);
  const auto traj_ab = simulate(decode_double(snapped, grid), horizon, gamma);
  const SimulationCertificate cert = theorem1_certificate(m, grid, delta, horizon, gamma);

  Json report = {{"grid", grid_to_json(grid)},
                 {"config", config_to_json(snapped, grid)},
                 {"certificate", certificate_to_json(cert)},
                 {"state_error", max_state_error(traj, traj_ab, 1)},
                 {"output_error", max_output_error(traj, traj_ab, 1)}};
  print_json(report);
  write_out(f, "abstraction.json", report.dump(2) + "\n");
  return 0;
}

EngineOptions engine_options(const Flags& f) {
  EngineOptions o;
  o.engine = parse_engine(f.engine);
  o.smt.solver = SolverOptions{f.solver, f.timeout_s};
  return o;
}

void print_diagnostics(const BoxEvidence& e, int d_x) {
  auto yes = [](bool b) { return b ? "yes" : "NO"; };
  std::cout << "delta diagnostics (" << e.samples << " samples from the box):\n"
            << "  grid resolution d_x >= 1/(2 delta): " << yes(e.grid_resolution) << "\n"
            << "  contraction rho < 1 on samples:     " << yes(e.all_contractive) << "  (rho in ["
            << format_double(e.rho_min) << ", " << format_double(e.rho_max) << "])\n"
            << "  budget eps_x <= (1 - rho) delta:    " << yes(e.budget) << "  (eps_x = " << format_double(e.eps_x)
            << ")\n"
            << "  weight budget eps_w < (1 - rho) delta: " << yes(e.weight_budget) << "\n"
            << "  threshold margin on sampled paths:  " << yes(e.all_assumption2) << "  ("
            << e.assumption2_failures << " failures)\n";
  const auto min_delta = minimal_admissible_delta(e.eps_x, e.rho_max, d_x);
  std::cout << "  smallest admissible delta:          "
            << (min_delta ? format_double(*min_delta) : std::string("none (rho >= 1)")) << "\n";
}

int exit_for(Status s) {
  switch (s) {
    case Status::Consistent:
      return 0;
    case Status::Inconsistent:
      return 1;
    case Status::Inconclusive:
      return 2;
  }
  return kExitInternal;
}

int cmd_verify(const Flags& f) {
  const Json j = load_config(f, {"schema_version", "w", "sbm", "w_ab", "d_x", "d_lambda", "eps_w", "box",
                                 "kappa", "delta", "gamma", "evidence_samples"});
  if (f.obs.empty()) throw ParseError("verify needs --obs");
  const InfluenceMatrix<Rational> w_exact = load_w(j, f.config, nullptr);
  const InfluenceMatrix<double> w = to_double(w_exact);
  const InfluenceMatrix<Rational> w_ab =
      j.contains("w_ab") ? InfluenceMatrix<Rational>(matrix_from_json(j["w_ab"], f.config + ".w_ab")) : w_exact;
  AbstractGrid grid = abstraction_grid(w, w_ab, get<int>(j, "d_x", f.config), get<int>(j, "d_lambda", f.config));
  if (j.contains("eps_w")) grid.eps_w = get<double>(j, "eps_w", f.config);

  if (!j.contains("box")) throw ParseError(f.config + ": missing 'box'");
  require_keys_subset(j["box"], {"init", "lambda"}, f.config + ".box");
  ConfigBox box{intervals(j["box"].at("init"), f.config + ".box.init"),
                intervals(j["box"].at("lambda"), f.config + ".box.lambda")};
  try {
    box.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(f.config + ".box: " + e.what());
  }
  const Rational kappa = j.contains("kappa") ? rational_from_json(j["kappa"], f.config + ".kappa") : Rational(0);
  const ObservationSpec spec = load_observations(f.obs, kappa);
  if (spec.agents() != grid.agents()) {
    throw ParseError(f.obs + ": observations have " + std::to_string(spec.agents()) + " agents, the network has " +
                     std::to_string(grid.agents()));
  }
  const double delta = get<double>(j, "delta", f.config);
  const double gamma = get_or<double>(j, "gamma", kDefaultGamma, f.config);
  const int samples = get_or<int>(j, "evidence_samples", 100, f.config);

  const BoxVerification v = verify_box(spec, grid, box, w, delta, gamma, engine_options(f), samples,
                                       f.seed.value_or(0));
  if (!f.emit_smt.empty()) {
    std::filesystem::create_directories(f.emit_smt);
    const VerificationProblem problem{spec, grid, v.cover, delta, gamma};
    write_file((std::filesystem::path(f.emit_smt) / "kappa_plus_delta.smt2").string(),
               encode_smtlib(problem, ToleranceMode::KappaPlusDelta));
    if (v.abstract.at_minus) {
      write_file((std::filesystem::path(f.emit_smt) / "kappa_minus_delta.smt2").string(),
                 encode_smtlib(problem, ToleranceMode::KappaMinusDelta));
    }
  }

  std::cout << "verdict: " << to_string(v.verdict.status) << "\n"
            << "engine: " << f.engine << "\n"
            << "cover set: " << v.cover.size() << " abstract configurations\n"
            << "kappa = " << to_string(kappa) << ", delta = " << format_double(delta) << "\n"
            << "query kappa+delta: " << to_string(v.abstract.at_plus.status) << "\n"
            << "query kappa-delta: "
            << (v.abstract.at_minus ? to_string(v.abstract.at_minus->status) : std::string("skipped")) << "\n";
  print_diagnostics(v.evidence, grid.d_x);
  const std::vector<AbstractConfig>& witnesses =
      v.verdict.witnesses.empty() ? v.abstract.at_plus.witnesses : v.verdict.witnesses;
  if (!witnesses.empty()) {
    std::cout << (v.verdict.witnesses.empty() ? "abstract witness at kappa+delta:\n" : "witness:\n");
    const AbstractConfig& c = witnesses.front();
    std::cout << "  init indices:";
    for (int k : c.init_indices) std::cout << " " << k;
    std::cout << "\n  lambda levels:";
    for (int k : c.lambda_levels) std::cout << " " << k;
    std::cout << "\n";
  }
  for (const std::string& note : v.verdict.notes) std::cout << "note: " << note << "\n";

  Json report = verdict_to_json(v.verdict, grid);
  report["at_plus"] = verdict_to_json(v.abstract.at_plus, grid);
  report["at_minus"] = v.abstract.at_minus ? verdict_to_json(*v.abstract.at_minus, grid) : Json(nullptr);
  report["box_evidence"] = evidence_to_json(v.evidence);
  report["cover_size"] = v.cover.size();
  write_out(f, "verdict.json", report.dump(2) + "\n");
  return exit_for(v.verdict.status);
}

int cmd_count(const Flags& f) {
  const Json j = load_config(f, {"schema_version", "w", "sbm", "d_x", "d_lambda", "kappa", "gamma", "lambda_hat",
                                 "eps_lambda"});
  if (f.obs.empty()) throw ParseError("count needs --obs");
  VerificationProblem p;
  p.grid.w_ab = load_w(j, f.config, nullptr);
  p.grid.d_x = get<int>(j, "d_x", f.config);
  p.grid.d_lambda = get<int>(j, "d_lambda", f.config);
  p.grid.validate();
  p.gamma = get_or<double>(j, "gamma", kDefaultGamma, f.config);
  p.space = SearchSpace::full(p.grid.agents(), p.grid);
  const Rational kappa = j.contains("kappa") ? rational_from_json(j["kappa"], f.config + ".kappa") : Rational(0);
  p.spec = load_observations(f.obs, kappa);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(f.obs + ": " + e.what());
  }
  const Vector<Rational> hat = vector_from_json(j.at("lambda_hat"), f.config + ".lambda_hat");
  if (hat.size() != p.agents()) throw ParseError(f.config + ".lambda_hat: wrong length");
  if (!j.contains("eps_lambda") || !j["eps_lambda"].is_array()) {
    throw ParseError(f.config + ": 'eps_lambda' must be an array");
  }
  const EngineOptions options = engine_options(f);
  std::string csv = "eps_lambda,engine,count_enum,count_smt,count_complete\n";
  for (std::size_t k = 0; k < j["eps_lambda"].size(); ++k) {
    const Rational eps = rational_from_json(j["eps_lambda"][k], f.config + ".eps_lambda[" + std::to_string(k) + "]");
    const SolutionCount c = count_solutions(p, hat, eps, options);
    csv += to_string(eps) + "," + f.engine + "," + (c.enumeration ? std::to_string(*c.enumeration) : "") + "," +
           (c.smt ? std::to_string(*c.smt) : "") + "," + (c.complete ? "1" : "0") + "\n";
  }
  std::cout << csv;
  write_out(f, "counts.csv", csv);
  return 0;
}

int cmd_experiment(const Flags& f, bool engine_given, bool solver_given) {
  ExperimentConfig cfg = experiment_config_from_json(parse_json(read_file(f.config), f.config), f.config);
  if (f.seed) cfg.master_seed = *f.seed;
  if (engine_given) cfg.engine = f.engine;
  if (solver_given) cfg.solver = f.solver;
  cfg.validate();
  const ExperimentReport report = run_experiment(cfg);
  for (const std::string& path : write_report(report, cfg, f.out.empty() ? cfg.output_dir : f.out)) {
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Observation-consistency checking for Friedkin-Johnsen opinion dynamics"};
  app.require_subcommand(1);
  Flags f;
  auto add_common = [&f](CLI::App* sub, bool with_obs, bool with_engine) {
    sub->add_option("--config", f.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--seed", f.seed, "seed (evidence sampling, or the experiment master seed)");
    if (with_obs) sub->add_option("--obs", f.obs, "observations (.csv or .json)")->required()->check(CLI::ExistingFile);
    if (with_engine) {
      sub->add_option("--engine", f.engine, "enum, smt or both")->check(CLI::IsMember({"enum", "smt", "both"}));
      sub->add_option("--solver", f.solver, "SMT solver command reading SMT-LIB on stdin");
      sub->add_option("--timeout", f.timeout_s, "solver timeout per query in seconds")->check(CLI::PositiveNumber);
    }
  };
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "simulate a model and print binary outputs");
  add_common(simulate_cmd, false, false);
  CLI::App* abstract_cmd = app.add_subcommand("abstract", "snap a model onto a grid and certify it");
  add_common(abstract_cmd, false, false);
  CLI::App* verify_cmd = app.add_subcommand("verify", "check observations against a configuration box");
  add_common(verify_cmd, true, true);
  verify_cmd->add_option("--emit-smt", f.emit_smt, "directory for the SMT-LIB scripts of both queries");
  CLI::App* count_cmd = app.add_subcommand("count", "count grid configurations near lambda_hat");
  add_common(count_cmd, true, true);
  CLI::App* experiment_cmd = app.add_subcommand("experiment", "run a seeded experiment and write CSV");
  add_common(experiment_cmd, false, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalidInput;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(f);
    if (*abstract_cmd) return cmd_abstract(f);
    if (*verify_cmd) return cmd_verify(f);
    if (*count_cmd) return cmd_count(f);
    if (*experiment_cmd) {
      return cmd_experiment(f, experiment_cmd->count("--engine") > 0, experiment_cmd->count("--solver") > 0);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
