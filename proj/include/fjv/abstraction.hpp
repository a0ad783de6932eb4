#pragma once

// Finite abstractions of the FJ model: grids of initial opinions and
// stubbornness levels, snapping of concrete configurations onto them,
// the state-error bounds that relate the two systems, and the checks that
// certify a delta-approximate simulation.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fjv/fj.hpp"
#include "fjv/random.hpp"
#include "fjv/rational.hpp"

namespace fjv {

/// Initial opinions on {(2k+1)/(2 d_x) : k = 0..d_x-1}, stubbornness on
/// {k / d_lambda : k = 0..d_lambda}, a single abstract influence matrix and
/// the budget eps_w >= ||W_ab - W||.
struct AbstractGrid {
  int d_x = 1;
  int d_lambda = 1;
  InfluenceMatrix<Rational> w_ab;
  double eps_w = 0.0;

  Rational init_value(int index) const;
  Rational level_value(int level) const;
  Index agents() const { return w_ab.size(); }
  void validate() const;
};

/// Grid indices for x_init (0-based) and stubbornness levels per agent.
struct AbstractConfig {
  std::vector<int> init_indices;
  std::vector<int> lambda_levels;

  Index size() const { return static_cast<Index>(init_indices.size()); }
  auto operator<=>(const AbstractConfig&) const = default;
};

Vector<Rational> decode_init(const AbstractConfig& config, const AbstractGrid& grid);
StubbornnessVector<Rational> decode_lambda(const AbstractConfig& config, const AbstractGrid& grid);
/// (x_init_ab, lambda_ab, W_ab) in exact arithmetic.
ModelConfig<Rational> decode(const AbstractConfig& config, const AbstractGrid& grid);
ModelConfig<double> decode_double(const AbstractConfig& config, const AbstractGrid& grid);

/// Nearest grid index per entry; exact midpoints go to the lower index.
std::vector<int> snap_initial(const Vector<double>& x_init, int d_x);
/// Nearest level per entry; exact midpoints go to the lower level.
std::vector<int> snap_stubbornness(const Vector<double>& lambda, int d_lambda);
AbstractConfig snap(const ModelConfig<double>& config, const AbstractGrid& grid);

/// One-step perturbation budget (||W|| + 1)/(2 d_lambda) + 1/(2 d_x) + eps_w.
double epsilon_x(double w_norm, int d_lambda, int d_x, double eps_w);
double epsilon_x(const InfluenceMatrix<double>& w, int d_lambda, int d_x, double eps_w);

class NonContractiveError : public std::domain_error {
 public:
  explicit NonContractiveError(double rho);
};

/// eps_x sqrt(n) / (1 - rho); rho >= 1 is an error.
double sup_error_bound(double rho, double eps_x, Index n);

inline constexpr double kBoundSlack = 1e-9;

/// Every step satisfies ||x(t+1) - x_ab(t+1)|| <= rho ||x(t) - x_ab(t)|| + sqrt(n) eps_x
/// up to kBoundSlack.
bool one_step_bound_check(const Trajectory<double>& traj, const Trajectory<double>& traj_ab,
                          double rho, double eps_x);

/// max_t ||x(t) - x_ab(t)||.
double max_state_error(const Trajectory<double>& traj, const Trajectory<double>& traj_ab,
                       int first_step = 0);
/// max_t Hamming(y(t), y_ab(t)).
double max_output_error(const Trajectory<double>& traj, const Trajectory<double>& traj_ab,
                        int first_step = 0);

/// Agents with |x_i - gamma| <= eta.
template <class S>
std::vector<Index> near_threshold_set(const Vector<S>& x, const S& eta, const S& gamma) {
  if (eta < S(0)) throw DomainError("near_threshold_set: eta must be nonnegative");
  std::vector<Index> out;
  for (Index i = 0; i < x.size(); ++i) {
    const S gap = x(i) >= gamma ? S(x(i) - gamma) : S(gamma - x(i));
    if (gap <= eta) out.push_back(i);
  }
  return out;
}

/// Finite-horizon check: at every visited state, at most delta*n/2 agents
/// lie within sqrt(2 delta) of the threshold.
bool assumption2_check(const Trajectory<double>& traj, double delta, double gamma);
bool assumption2_check(const Trajectory<Rational>& traj, double delta, double gamma);

bool condition_grid_resolution(int d_x, double delta);           // d_x >= 1/(2 delta)
bool condition_contractive(double rho);                          // rho < 1
bool condition_budget(double eps_x, double rho, double delta);   // eps_x <= (1 - rho) delta

/// Smallest delta satisfying both the resolution and the budget condition,
/// max(eps_x / (1 - rho), 1/(2 d_x)); every larger delta satisfies both.
/// Empty when rho >= 1.
std::optional<double> minimal_admissible_delta(double eps_x, double rho, int d_x);

struct SimulationCertificate {
  double delta = 0.0;
  double rho = 0.0;
  double eps_x = 0.0;
  double w_norm = 0.0;
  double measured_eps_w = 0.0;
  int horizon = 0;
  bool grid_resolution = false;  // d_x >= 1/(2 delta)
  bool contractive = false;      // rho < 1
  bool budget = false;           // eps_x <= (1 - rho) delta
  bool assumption2 = false;      // finite horizon only
  bool weight_budget = true;     // ||W_ab - W|| <= eps_w
  std::optional<double> min_delta;

  bool valid() const {
    return grid_resolution && contractive && budget && assumption2 && weight_budget;
  }
};

SimulationCertificate theorem1_certificate(const ModelConfig<double>& config,
                                           const AbstractGrid& grid, double delta, int horizon,
                                           double gamma);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Per-agent boxes for initial opinions and stubbornness.
struct ConfigBox {
  std::vector<Interval> init;
  std::vector<Interval> lambda;

  Index size() const { return static_cast<Index>(init.size()); }
  void validate() const;
  bool contains(const ModelConfig<double>& config) const;
};

/// Product search space of per-agent init indices and stubbornness levels.
class SearchSpace {
 public:
  SearchSpace() = default;
  SearchSpace(std::vector<std::vector<int>> init_options,
              std::vector<std::vector<int>> lambda_options);

  static SearchSpace full(Index n, const AbstractGrid& grid);
  static SearchSpace singleton(const AbstractConfig& config);

  Index agents() const { return static_cast<Index>(init_options_.size()); }
  const std::vector<int>& init_options(Index i) const { return init_options_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& lambda_options(Index i) const { return lambda_options_[static_cast<std::size_t>(i)]; }
  void set_init_options(Index i, std::vector<int> options);
  void set_lambda_options(Index i, std::vector<int> options);

  /// Number of configurations; saturates at UINT64_MAX.
  std::uint64_t size() const;
  std::uint64_t init_combinations() const;
  std::uint64_t lambda_combinations() const;
  bool empty() const { return size() == 0; }
  bool contains(const AbstractConfig& config) const;

  /// Visits configurations in mixed-radix order, agent 0 slowest, init
  /// digits before stubbornness digits. Return false from `visit` to stop.
  void for_each(const std::function<bool(const AbstractConfig&)>& visit) const;
  std::vector<AbstractConfig> materialize(std::uint64_t cap) const;

  void validate(const AbstractGrid& grid) const;

 private:
  std::vector<std::vector<int>> init_options_;
  std::vector<std::vector<int>> lambda_options_;
};

/// Abstract configurations whose closed grid cells (half-width 1/(2 d_x),
/// 1/(2 d_lambda)) meet the box; contains the snap image of every point.
SearchSpace cover_set(const ConfigBox& box, const AbstractGrid& grid);

ModelConfig<double> sample_from_box(const ConfigBox& box, const InfluenceMatrix<double>& w, Rng& rng);

/// Sampled evidence for the hypotheses that let abstract verdicts transfer
/// to every concrete configuration of a box. Never a proof: the box is
/// uncountable and the threshold margin is checked on the observation horizon only.
struct BoxEvidence {
  int samples = 0;
  double delta = 0.0;
  double w_norm = 0.0;
  double eps_x = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  bool grid_resolution = false;    // d_x >= 1/(2 delta)
  bool all_contractive = false;    // sampled rho < 1
  bool budget = false;             // eps_x <= (1 - rho_max) delta
  bool weight_budget = false;      // eps_w < (1 - rho_min) delta
  bool all_assumption2 = false;    // sampled concrete paths
  int assumption2_failures = 0;

  bool holds() const {
    return grid_resolution && all_contractive && budget && weight_budget && all_assumption2;
  }
};

BoxEvidence box_evidence(const ConfigBox& box, const AbstractGrid& grid,
                         const InfluenceMatrix<double>& w, double delta, int horizon,
                         double gamma, int samples, std::uint64_t seed);

}  // namespace fjv
