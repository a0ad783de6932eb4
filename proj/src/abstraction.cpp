#include "fjv/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fjv/network.hpp"

namespace fjv {

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::uint64_t>::max() / b) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

int clamp_index(const BigInt& k, int lo, int hi) {
  if (k < lo) return lo;
  if (k > hi) return hi;
  return k.convert_to<int>();
}

}  // namespace

Rational AbstractGrid::init_value(int index) const {
  if (index < 0 || index >= d_x) throw DomainError("initial grid index out of range");
  return Rational(2 * index + 1, 2 * d_x);
}

Rational AbstractGrid::level_value(int level) const {
  if (level < 0 || level > d_lambda) throw DomainError("stubbornness level out of range");
  return Rational(level, d_lambda);
}

void AbstractGrid::validate() const {
  if (d_x < 1 || d_lambda < 1) throw DomainError("grid resolutions must be positive");
  if (!(eps_w >= 0.0)) throw DomainError("eps_w must be nonnegative");
  if (w_ab.size() == 0) throw DomainError("grid has no abstract influence matrix");
}

Vector<Rational> decode_init(const AbstractConfig& config, const AbstractGrid& grid) {
  Vector<Rational> x(config.size());
  for (Index i = 0; i < config.size(); ++i) {
    x(i) = grid.init_value(config.init_indices[static_cast<std::size_t>(i)]);
  }
  return x;
}

StubbornnessVector<Rational> decode_lambda(const AbstractConfig& config, const AbstractGrid& grid) {
  Vector<Rational> lam(config.size());
  for (Index i = 0; i < config.size(); ++i) {
    lam(i) = grid.level_value(config.lambda_levels[static_cast<std::size_t>(i)]);
  }
  return StubbornnessVector<Rational>(std::move(lam));
}

ModelConfig<Rational> decode(const AbstractConfig& config, const AbstractGrid& grid) {
  if (config.size() != grid.agents() ||
      config.lambda_levels.size() != config.init_indices.size()) {
    throw DimensionError("abstract config does not match grid dimension");
  }
  return {decode_init(config, grid), decode_lambda(config, grid), grid.w_ab};
}

ModelConfig<double> decode_double(const AbstractConfig& config, const AbstractGrid& grid) {
  const ModelConfig<Rational> exact = decode(config, grid);
  return {to_double(exact.x_init), to_double(exact.lambda), to_double(exact.w)};
}

std::vector<int> snap_initial(const Vector<double>& x_init, int d_x) {
  if (d_x < 1) throw DomainError("d_x must be positive");
  check_unit_interval(x_init, "initial opinion");
  std::vector<int> out(static_cast<std::size_t>(x_init.size()));
  for (Index i = 0; i < x_init.size(); ++i) {
    // Cell of index k is (k/d_x, (k+1)/d_x]; the shared endpoint goes down.
    const Rational scaled = rational_exact_binary(x_init(i)) * d_x;
    out[static_cast<std::size_t>(i)] = clamp_index(ceil(scaled) - 1, 0, d_x - 1);
  }
  return out;
}

std::vector<int> snap_stubbornness(const Vector<double>& lambda, int d_lambda) {
  if (d_lambda < 1) throw DomainError("d_lambda must be positive");
  check_unit_interval(lambda, "stubbornness");
  std::vector<int> out(static_cast<std::size_t>(lambda.size()));
  for (Index i = 0; i < lambda.size(); ++i) {
    const Rational scaled = rational_exact_binary(lambda(i)) * d_lambda - Rational(1, 2);
    out[static_cast<std::size_t>(i)] = clamp_index(ceil(scaled), 0, d_lambda);
  }
  return out;
}

AbstractConfig snap(const ModelConfig<double>& config, const AbstractGrid& grid) {
  return {snap_initial(config.x_init, grid.d_x),
          snap_stubbornness(config.lambda.values(), grid.d_lambda)};
}

double epsilon_x(double w_norm, int d_lambda, int d_x, double eps_w) {
  if (d_lambda < 1 || d_x < 1) throw DomainError("epsilon_x: resolutions must be positive");
  if (!(eps_w >= 0.0)) throw DomainError("epsilon_x: eps_w must be nonnegative");
  return (w_norm + 1.0) / (2.0 * d_lambda) + 1.0 / (2.0 * d_x) + eps_w;
}

double epsilon_x(const InfluenceMatrix<double>& w, int d_lambda, int d_x, double eps_w) {
  return epsilon_x(spectral_norm(w.matrix()), d_lambda, d_x, eps_w);
}

NonContractiveError::NonContractiveError(double rho)
    : std::domain_error("non-contractive system: ||(I - Lambda) W|| = " + std::to_string(rho) +
                        " >= 1") {}

double sup_error_bound(double rho, double eps_x, Index n) {
  if (!(rho < 1.0)) throw NonContractiveError(rho);
  return eps_x * std::sqrt(static_cast<double>(n)) / (1.0 - rho);
}

bool one_step_bound_check(const Trajectory<double>& traj, const Trajectory<double>& traj_ab,
                          double rho, double eps_x) {
  if (traj.horizon() != traj_ab.horizon()) throw DimensionError("trajectory horizons differ");
  const double root_n = std::sqrt(static_cast<double>(traj.agents()));
  for (int t = 0; t < traj.horizon(); ++t) {
    const auto k = static_cast<std::size_t>(t);
    const double now = (traj.states[k].current - traj_ab.states[k].current).norm();
    const double next = (traj.states[k + 1].current - traj_ab.states[k + 1].current).norm();
    if (next > rho * now + root_n * eps_x + kBoundSlack) return false;
  }
  return true;
}

double max_state_error(const Trajectory<double>& traj, const Trajectory<double>& traj_ab,
                       int first_step) {
  if (traj.horizon() != traj_ab.horizon()) throw DimensionError("trajectory horizons differ");
  double worst = 0.0;
  for (int t = first_step; t <= traj.horizon(); ++t) {
    const auto k = static_cast<std::size_t>(t);
    worst = std::max(worst, (traj.states[k].current - traj_ab.states[k].current).norm());
  }
  return worst;
}

double max_output_error(const Trajectory<double>& traj, const Trajectory<double>& traj_ab,
                        int first_step) {
  if (traj.horizon() != traj_ab.horizon()) throw DimensionError("trajectory horizons differ");
  double worst = 0.0;
  for (int t = first_step; t <= traj.horizon(); ++t) {
    const auto k = static_cast<std::size_t>(t);
    worst = std::max(worst, hamming_value(traj.outputs[k], traj_ab.outputs[k]));
  }
  return worst;
}

bool assumption2_check(const Trajectory<double>& traj, double delta, double gamma) {
  if (!(delta > 0.0)) throw DomainError("assumption2_check: delta must be positive");
  const double eta = std::sqrt(2.0 * delta);
  const double n = static_cast<double>(traj.agents());
  for (const auto& state : traj.states) {
    const auto near = near_threshold_set(state.current, eta, gamma);
    if (static_cast<double>(near.size()) > delta * n / 2.0) return false;
  }
  return true;
}

bool assumption2_check(const Trajectory<Rational>& traj, double delta, double gamma) {
  if (!(delta > 0.0)) throw DomainError("assumption2_check: delta must be positive");
  const Rational d = rational_from_double(delta);
  const Rational g = rational_from_double(gamma);
  const Rational n(static_cast<long long>(traj.agents()));
  for (const auto& state : traj.states) {
    long long near = 0;
    for (Index i = 0; i < state.current.size(); ++i) {
      const Rational gap = state.current(i) - g;
      if (gap * gap <= 2 * d) ++near;  // |x - gamma| <= sqrt(2 delta), squared
    }
    if (Rational(near) > d * n / 2) return false;
  }
  return true;
}

bool condition_grid_resolution(int d_x, double delta) {
  return 2 * rational_from_double(delta) * d_x >= 1;
}

bool condition_contractive(double rho) { return rho < 1.0; }

bool condition_budget(double eps_x, double rho, double delta) {
  return eps_x <= (1.0 - rho) * delta;
}

std::optional<double> minimal_admissible_delta(double eps_x, double rho, int d_x) {
  if (!(rho < 1.0)) return std::nullopt;
  return std::max(eps_x / (1.0 - rho), 1.0 / (2.0 * d_x));
}

SimulationCertificate theorem1_certificate(const ModelConfig<double>& config,
                                           const AbstractGrid& grid, double delta, int horizon,
                                           double gamma) {
  if (!(delta > 0.0)) throw DomainError("theorem1_certificate: delta must be positive");
  grid.validate();
  SimulationCertificate cert;
  cert.delta = delta;
  cert.horizon = horizon;
  cert.rho = contraction_factor(config.lambda, config.w);
  cert.w_norm = spectral_norm(config.w.matrix());
  cert.eps_x = epsilon_x(cert.w_norm, grid.d_lambda, grid.d_x, grid.eps_w);
  cert.measured_eps_w = weight_error(config.w, to_double(grid.w_ab));
  cert.weight_budget = cert.measured_eps_w <= grid.eps_w + kRowSumTolerance;
  cert.grid_resolution = condition_grid_resolution(grid.d_x, delta);
  cert.contractive = condition_contractive(cert.rho);
  cert.budget = condition_budget(cert.eps_x, cert.rho, delta);
  cert.assumption2 = assumption2_check(simulate(config, horizon, gamma), delta, gamma);
  cert.min_delta = minimal_admissible_delta(cert.eps_x, cert.rho, grid.d_x);
  return cert;
}

void ConfigBox::validate() const {
  if (init.size() != lambda.size()) throw DimensionError("box has mismatched agent counts");
  if (init.empty()) throw DomainError("empty box");
  for (std::size_t i = 0; i < init.size(); ++i) {
    for (const Interval* iv : {&init[i], &lambda[i]}) {
      const double lo = std::max(iv->lo, 0.0);
      const double hi = std::min(iv->hi, 1.0);
      if (!(lo <= hi)) throw DomainError("empty box interval for agent " + std::to_string(i));
    }
  }
}

bool ConfigBox::contains(const ModelConfig<double>& config) const {
  if (config.size() != size()) return false;
  for (Index i = 0; i < size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double x = config.x_init(i);
    const double l = config.lambda[i];
    if (x < init[k].lo || x > init[k].hi || l < lambda[k].lo || l > lambda[k].hi) return false;
  }
  return true;
}

SearchSpace::SearchSpace(std::vector<std::vector<int>> init_options,
                         std::vector<std::vector<int>> lambda_options)
    : init_options_(std::move(init_options)), lambda_options_(std::move(lambda_options)) {
  if (init_options_.size() != lambda_options_.size()) {
    throw DimensionError("search space option lists differ in length");
  }
}

SearchSpace SearchSpace::full(Index n, const AbstractGrid& grid) {
  std::vector<int> inits(static_cast<std::size_t>(grid.d_x));
  std::vector<int> levels(static_cast<std::size_t>(grid.d_lambda) + 1);
  for (int k = 0; k < grid.d_x; ++k) inits[static_cast<std::size_t>(k)] = k;
  for (int k = 0; k <= grid.d_lambda; ++k) levels[static_cast<std::size_t>(k)] = k;
  return SearchSpace(std::vector<std::vector<int>>(static_cast<std::size_t>(n), inits),
                     std::vector<std::vector<int>>(static_cast<std::size_t>(n), levels));
}

SearchSpace SearchSpace::singleton(const AbstractConfig& config) {
  std::vector<std::vector<int>> inits, levels;
  for (int k : config.init_indices) inits.push_back({k});
  for (int k : config.lambda_levels) levels.push_back({k});
  return SearchSpace(std::move(inits), std::move(levels));
}

void SearchSpace::set_init_options(Index i, std::vector<int> options) {
  init_options_.at(static_cast<std::size_t>(i)) = std::move(options);
}

void SearchSpace::set_lambda_options(Index i, std::vector<int> options) {
  lambda_options_.at(static_cast<std::size_t>(i)) = std::move(options);
}

std::uint64_t SearchSpace::init_combinations() const {
  std::uint64_t total = 1;
  for (const auto& opts : init_options_) total = saturating_mul(total, opts.size());
  return total;
}

std::uint64_t SearchSpace::lambda_combinations() const {
  std::uint64_t total = 1;
  for (const auto& opts : lambda_options_) total = saturating_mul(total, opts.size());
  return total;
}

std::uint64_t SearchSpace::size() const {
  if (init_options_.empty()) return 0;
  return saturating_mul(init_combinations(), lambda_combinations());
}

bool SearchSpace::contains(const AbstractConfig& config) const {
  if (config.size() != agents()) return false;
  for (std::size_t i = 0; i < init_options_.size(); ++i) {
    const auto& io = init_options_[i];
    const auto& lo = lambda_options_[i];
    if (std::find(io.begin(), io.end(), config.init_indices[i]) == io.end()) return false;
    if (std::find(lo.begin(), lo.end(), config.lambda_levels[i]) == lo.end()) return false;
  }
  return true;
}

void SearchSpace::for_each(const std::function<bool(const AbstractConfig&)>& visit) const {
  if (empty()) return;
  const std::size_t n = init_options_.size();
  std::vector<std::size_t> digit(2 * n, 0);
  AbstractConfig config;
  config.init_indices.resize(n);
  config.lambda_levels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    config.init_indices[i] = init_options_[i][0];
    config.lambda_levels[i] = lambda_options_[i][0];
  }
  while (true) {
    if (!visit(config)) return;
    // Odometer: the last stubbornness digit moves fastest.
    std::size_t pos = 2 * n;
    while (pos > 0) {
      --pos;
      const bool is_init = pos < n;
      const std::size_t agent = is_init ? pos : pos - n;
      const auto& opts = is_init ? init_options_[agent] : lambda_options_[agent];
      if (++digit[pos] < opts.size()) {
        (is_init ? config.init_indices : config.lambda_levels)[agent] = opts[digit[pos]];
        break;
      }
      digit[pos] = 0;
      (is_init ? config.init_indices : config.lambda_levels)[agent] = opts[0];
      if (pos == 0) return;
    }
  }
}

std::vector<AbstractConfig> SearchSpace::materialize(std::uint64_t cap) const {
  if (size() > cap) throw DomainError("search space exceeds materialization cap");
  std::vector<AbstractConfig> out;
  out.reserve(static_cast<std::size_t>(size()));
  for_each([&](const AbstractConfig& c) {
    out.push_back(c);
    return true;
  });
  return out;
}

void SearchSpace::validate(const AbstractGrid& grid) const {
  if (agents() != grid.agents()) throw DimensionError("search space does not match grid size");
  for (std::size_t i = 0; i < init_options_.size(); ++i) {
    if (init_options_[i].empty() || lambda_options_[i].empty()) {
      throw DomainError("agent " + std::to_string(i) + " has no admissible options");
    }
    for (int k : init_options_[i]) {
      if (k < 0 || k >= grid.d_x) throw DomainError("init index out of range for agent " + std::to_string(i));
    }
    for (int k : lambda_options_[i]) {
      if (k < 0 || k > grid.d_lambda) throw DomainError("level out of range for agent " + std::to_string(i));
    }
  }
}

SearchSpace cover_set(const ConfigBox& box, const AbstractGrid& grid) {
  box.validate();
  if (box.size() != grid.agents()) throw DimensionError("box does not match grid size");
  const std::size_t n = static_cast<std::size_t>(box.size());
  std::vector<std::vector<int>> inits(n), levels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Rational xlo = rational_exact_binary(std::max(box.init[i].lo, 0.0));
    const Rational xhi = rational_exact_binary(std::min(box.init[i].hi, 1.0));
    for (int k = 0; k < grid.d_x; ++k) {
      // Cell [k/d_x, (k+1)/d_x] around (2k+1)/(2 d_x).
      if (Rational(k, grid.d_x) <= xhi && Rational(k + 1, grid.d_x) >= xlo) inits[i].push_back(k);
    }
    const Rational llo = rational_exact_binary(std::max(box.lambda[i].lo, 0.0));
    const Rational lhi = rational_exact_binary(std::min(box.lambda[i].hi, 1.0));
    for (int k = 0; k <= grid.d_lambda; ++k) {
      if (Rational(2 * k - 1, 2 * grid.d_lambda) <= lhi &&
          Rational(2 * k + 1, 2 * grid.d_lambda) >= llo) {
        levels[i].push_back(k);
      }
    }
  }
  return SearchSpace(std::move(inits), std::move(levels));
}

ModelConfig<double> sample_from_box(const ConfigBox& box, const InfluenceMatrix<double>& w, Rng& rng) {
  const Index n = box.size();
  Vector<double> x(n), lam(n);
  for (Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double xlo = std::max(box.init[k].lo, 0.0), xhi = std::min(box.init[k].hi, 1.0);
    const double llo = std::max(box.lambda[k].lo, 0.0), lhi = std::min(box.lambda[k].hi, 1.0);
    x(i) = std::min(rng.uniform(xlo, xhi), xhi);
    lam(i) = std::min(rng.uniform(llo, lhi), lhi);
  }
  return {std::move(x), StubbornnessVector<double>(std::move(lam)), w};
}

BoxEvidence box_evidence(const ConfigBox& box, const AbstractGrid& grid,
                         const InfluenceMatrix<double>& w, double delta, int horizon,
                         double gamma, int samples, std::uint64_t seed) {
  box.validate();
  grid.validate();
  if (samples < 1) throw DomainError("box_evidence needs at least one sample");
  BoxEvidence ev;
  ev.samples = samples;
  ev.delta = delta;
  ev.w_norm = spectral_norm(w.matrix());
  ev.eps_x = epsilon_x(ev.w_norm, grid.d_lambda, grid.d_x, grid.eps_w);
  ev.grid_resolution = condition_grid_resolution(grid.d_x, delta);
  ev.rho_min = std::numeric_limits<double>::infinity();
  ev.rho_max = 0.0;
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const ModelConfig<double> config = sample_from_box(box, w, rng);
    const double rho = contraction_factor(config.lambda, config.w);
    ev.rho_min = std::min(ev.rho_min, rho);
    ev.rho_max = std::max(ev.rho_max, rho);
    if (!assumption2_check(simulate(config, horizon, gamma), delta, gamma)) ++ev.assumption2_failures;
  }
  const double measured = weight_error(w, to_double(grid.w_ab));
  ev.all_contractive = ev.rho_max < 1.0;
  ev.budget = condition_budget(ev.eps_x, ev.rho_max, delta);
  ev.weight_budget = measured <= grid.eps_w + kRowSumTolerance && grid.eps_w < (1.0 - ev.rho_min) * delta;
  ev.all_assumption2 = ev.assumption2_failures == 0;
  return ev;
}

}  // namespace fjv
