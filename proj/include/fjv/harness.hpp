#pragma once

// Seeded experiments: configuration, problem generators and CSV reports.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fjv/engines.hpp"
#include "fjv/io.hpp"
#include "fjv/network.hpp"
#include "fjv/reduction.hpp"

namespace fjv {

inline constexpr int kExperimentSchemaVersion = 1;

/// Parameters of one experiment run. Defaults depend on the experiment id;
/// JSON keys override them and unknown keys are rejected.
struct ExperimentConfig {
  std::string experiment;  // approx-error, interpolation, count-solutions, structural-runtime, verify
  int n = 40;
  int horizon = 9;
  std::vector<int> d_x{2};
  std::vector<int> d_lambda{3};
  double p_in = 0.3;
  double p_out = 0.1;
  double gamma = 0.5;
  Rational kappa = 0;
  double delta = 0.1;
  std::vector<Rational> eps_lambda;
  std::vector<double> alpha;
  std::vector<std::uint64_t> seeds;
  std::uint64_t master_seed = 0;
  std::string output_dir = "results";
  std::vector<std::string> w_ab{"true"};  // "true" or "expected"

  double lambda_min = 0.0;  // concrete stubbornness ~ U[lambda_min, 1)
  double stubborn_fraction = 0.2;
  Rational block_in = 5;
  Rational block_out = 3;
  Rational lambda_radius{1, 2};
  double box_radius = 0.02;
  int evidence_samples = 100;

  std::string engine = "both";
  std::string solver = "z3 -in";
  int timeout_s = 300;
  std::uint64_t count_limit = 5000;  // SMT counting stops here

  static ExperimentConfig defaults(const std::string& experiment);
  void validate() const;
};

/// Reads {"schema_version": 1, "experiment": ..., ...}.
ExperimentConfig experiment_config_from_json(const Json& value, const std::string& where);
Json experiment_config_to_json(const ExperimentConfig& cfg);

/// Rows are sorted by their numeric key before writing.
struct CsvTable {
  struct Row {
    std::vector<double> key;
    std::vector<std::string> cells;
  };
  std::vector<std::string> header;
  std::vector<Row> rows;

  void add(std::vector<double> key, std::vector<std::string> cells);
  std::string to_csv() const;
};

struct ExperimentReport {
  CsvTable table;                  // deterministic given (config, master seed)
  std::optional<CsvTable> timing;  // wall-clock, machine-dependent
  Json meta;
};

/// Concrete SBM instance: x(0) ~ U[0,1), lambda ~ U[lambda_min, 1).
struct ConcreteInstance {
  SbmParams sbm;
  InfluenceMatrix<Rational> w_exact;
  InfluenceMatrix<Rational> w_expected;
  ModelConfig<double> config;
};
ConcreteInstance sample_concrete(int n, double p_in, double p_out, double lambda_min, Rng& rng);

/// Snapped abstraction of `config` with the given abstract matrix; eps_w is
/// the measured ||W_ab - W||.
AbstractGrid abstraction_grid(const InfluenceMatrix<double>& w, const InfluenceMatrix<Rational>& w_ab,
                              int d_x, int d_lambda);

/// Grid configuration drawn uniformly; observations from its exact run.
struct PlantedInstance {
  AbstractGrid grid;
  AbstractConfig truth;
  VerificationProblem problem;
};
PlantedInstance planted_sbm_problem(int n, int horizon, int d_x, int d_lambda, double p_in,
                                    double p_out, const Rational& kappa, Rng& rng,
                                    double gamma = kDefaultGamma);

/// Two-community block network, a `fraction` of agents at lambda = 1 and
/// the rest at levels lambda* drawn from the grid. Both problems allow
/// levels within `radius` of lambda*; the informed one also pins the
/// stubborn agents' initial values and lambda = 1.
struct StructuralInstance {
  Communities communities;
  AbstractGrid grid;
  AbstractConfig truth;
  std::vector<bool> stubborn;
  VerificationProblem uninformed;
  VerificationProblem informed;
};
StructuralInstance structural_instance(int n, int horizon, int d_x, int d_lambda, double fraction,
                                       const Rational& block_in, const Rational& block_out,
                                       const Rational& radius, const Rational& kappa, Rng& rng,
                                       double gamma = kDefaultGamma);

ExperimentReport exp_approx_error(const ExperimentConfig& cfg);
ExperimentReport exp_interpolation(const ExperimentConfig& cfg);
ExperimentReport exp_count_solutions(const ExperimentConfig& cfg);
ExperimentReport exp_structural_runtime(const ExperimentConfig& cfg);
ExperimentReport exp_verify(const ExperimentConfig& cfg);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Writes <dir>/<experiment>.csv, <experiment>_meta.json and, when present,
/// <experiment>_timing.csv. Returns the written paths.
std::vector<std::string> write_report(const ExperimentReport& report, const ExperimentConfig& cfg,
                                      const std::string& dir);

/// Median wall time of a trivial solver query, taken as the spawn overhead.
double solver_spawn_overhead(const SolverOptions& options, int runs = 3);

}  // namespace fjv
