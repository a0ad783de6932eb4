#pragma once

// Friedkin-Johnsen dynamics in augmented form, threshold quantization and
// output metrics. Everything here is templated on the scalar so the same
// code runs in double (simulation, experiments) and in exact rationals
// (witness validation, SMT cross-checks).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/eigen.hpp>

#include "fjv/rational.hpp"

namespace fjv {

template <class S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

/// Per-agent report, entries exactly 0 or 1.
using BinaryOutput = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

inline constexpr double kDefaultGamma = 0.5;
inline constexpr double kRowSumTolerance = 1e-12;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotConvergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class S>
bool row_sum_is_one(const S& sum) {
  if constexpr (std::is_floating_point_v<S>) {
    using std::abs;
    return abs(sum - S(1)) <= S(kRowSumTolerance);
  } else {
    return sum == S(1);
  }
}

inline std::string index_str(Index i) { return std::to_string(static_cast<long long>(i)); }

}  // namespace detail

/// Stubbornness weights lambda in [0,1]^n; Lambda = diag(lambda).
template <class S>
class StubbornnessVector {
 public:
  StubbornnessVector() = default;
  explicit StubbornnessVector(Vector<S> values) : values_(std::move(values)) {
    for (Index i = 0; i < values_.size(); ++i) {
      if (!(values_(i) >= S(0) && values_(i) <= S(1))) {
        throw DomainError("stubbornness of agent " + detail::index_str(i) + " outside [0,1]");
      }
    }
  }

  const Vector<S>& values() const { return values_; }
  Index size() const { return values_.size(); }
  const S& operator[](Index i) const { return values_(i); }

 private:
  Vector<S> values_;
};

/// Row-stochastic influence matrix W. Rows must sum to one (exactly for
/// rationals, within kRowSumTolerance for floating point).
template <class S>
class InfluenceMatrix {
 public:
  InfluenceMatrix() = default;
  explicit InfluenceMatrix(Matrix<S> w) : w_(std::move(w)) {
    if (w_.rows() != w_.cols()) throw DimensionError("influence matrix must be square");
    for (Index i = 0; i < w_.rows(); ++i) {
      S sum(0);
      for (Index j = 0; j < w_.cols(); ++j) {
        if (!(w_(i, j) >= S(0))) {
          throw DomainError("negative influence weight at (" + detail::index_str(i) + "," +
                            detail::index_str(j) + ")");
        }
        sum += w_(i, j);
      }
      if (!detail::row_sum_is_one(sum)) {
        throw DomainError("row " + detail::index_str(i) + " of influence matrix does not sum to 1");
      }
    }
  }

  const Matrix<S>& matrix() const { return w_; }
  Index size() const { return w_.rows(); }

 private:
  Matrix<S> w_;
};

/// Augmented state [x(t); z(t)] where the anchor z(t) = x(0) never changes.
template <class S>
struct AugmentedState {
  Vector<S> current;
  Vector<S> anchor;

  Index size() const { return current.size(); }

  Vector<S> stacked() const {
    Vector<S> out(2 * current.size());
    out << current, anchor;
    return out;
  }

  bool operator==(const AugmentedState&) const = default;
};

template <class S>
struct Trajectory {
  std::vector<AugmentedState<S>> states;
  std::vector<BinaryOutput> outputs;

  int horizon() const { return static_cast<int>(states.size()) - 1; }
  Index agents() const { return states.empty() ? 0 : states.front().size(); }
};

/// A concrete point (x_init, lambda, W).
template <class S>
struct ModelConfig {
  Vector<S> x_init;
  StubbornnessVector<S> lambda;
  InfluenceMatrix<S> w;

  Index size() const { return x_init.size(); }
};

template <class S>
void check_unit_interval(const Vector<S>& x, const char* what) {
  for (Index i = 0; i < x.size(); ++i) {
    if (!(x(i) >= S(0) && x(i) <= S(1))) {
      throw DomainError(std::string(what) + " entry " + detail::index_str(i) + " outside [0,1]");
    }
  }
}

template <class S>
void check_gamma(const S& gamma) {
  if (!(gamma > S(0) && gamma < S(1))) throw DomainError("threshold gamma must lie in (0,1)");
}

/// y_i = 1 iff x_i >= gamma. The tie x_i == gamma reports 1.
template <class S>
BinaryOutput quantize(const Vector<S>& x, const S& gamma) {
  check_gamma(gamma);
  BinaryOutput y(x.size());
  for (Index i = 0; i < x.size(); ++i) y(i) = x(i) >= gamma ? 1 : 0;
  return y;
}

inline Index mismatch_count(const BinaryOutput& a, const BinaryOutput& b) {
  if (a.size() != b.size()) throw DimensionError("binary outputs have different lengths");
  return (a.array() != b.array()).count();
}

/// Normalized Hamming distance, exact.
inline Rational hamming(const BinaryOutput& a, const BinaryOutput& b) {
  const Index mismatches = mismatch_count(a, b);
  if (a.size() == 0) return Rational(0);
  return Rational(static_cast<long long>(mismatches), static_cast<long long>(a.size()));
}

inline double hamming_value(const BinaryOutput& a, const BinaryOutput& b) {
  if (a.size() == 0) return 0.0;
  return static_cast<double>(mismatch_count(a, b)) / static_cast<double>(a.size());
}

/// One FJ update: x+ = (I - Lambda) W x + Lambda z, z+ = z.
template <class S>
AugmentedState<S> fj_step(const AugmentedState<S>& state, const StubbornnessVector<S>& lambda,
                          const InfluenceMatrix<S>& w) {
  const Index n = state.size();
  if (state.anchor.size() != n || lambda.size() != n || w.size() != n) {
    throw DimensionError("fj_step: dimension mismatch");
  }
  const Vector<S>& lam = lambda.values();
  const Vector<S> mixed = w.matrix() * state.current;
  AugmentedState<S> next;
  next.current = (Vector<S>::Ones(n) - lam).cwiseProduct(mixed) + lam.cwiseProduct(state.anchor);
  next.anchor = state.anchor;
  return next;
}

/// Block matrix [[(I - Lambda) W, Lambda], [0, I]] acting on [x; z].
template <class S>
Matrix<S> augmented_matrix(const StubbornnessVector<S>& lambda, const InfluenceMatrix<S>& w) {
  const Index n = w.size();
  if (lambda.size() != n) throw DimensionError("augmented_matrix: dimension mismatch");
  const Vector<S> free = Vector<S>::Ones(n) - lambda.values();
  Matrix<S> a = Matrix<S>::Zero(2 * n, 2 * n);
  a.topLeftCorner(n, n) = free.asDiagonal() * w.matrix();
  a.topRightCorner(n, n) = lambda.values().asDiagonal();
  a.bottomRightCorner(n, n) = Matrix<S>::Identity(n, n);
  return a;
}

namespace detail {

template <class S>
void assert_confined(const Vector<S>& x, Index step) {
  // Convex combinations of [0,1] values; floating point may overshoot by ulps.
  const S slack = std::is_floating_point_v<S> ? S(1e-9) : S(0);
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) < -slack || x(i) > S(1) + slack) {
      throw std::logic_error("opinion of agent " + index_str(i) + " left [0,1] at step " +
                             index_str(step));
    }
  }
}

}  // namespace detail

/// Unique path from dup(x_init) over t = 0..horizon with outputs attached.
template <class S>
Trajectory<S> simulate(const Vector<S>& x_init, const StubbornnessVector<S>& lambda,
                       const InfluenceMatrix<S>& w, int horizon, const S& gamma) {
  check_gamma(gamma);
  if (horizon < 0) throw DomainError("horizon must be nonnegative");
  if (x_init.size() != lambda.size() || x_init.size() != w.size()) {
    throw DimensionError("simulate: dimension mismatch");
  }
  check_unit_interval(x_init, "initial opinion");
  Trajectory<S> traj;
  traj.states.reserve(static_cast<std::size_t>(horizon) + 1);
  traj.outputs.reserve(static_cast<std::size_t>(horizon) + 1);
  traj.states.push_back({x_init, x_init});
  traj.outputs.push_back(quantize(x_init, gamma));
  for (int t = 0; t < horizon; ++t) {
    traj.states.push_back(fj_step(traj.states.back(), lambda, w));
    detail::assert_confined(traj.states.back().current, t + 1);
    traj.outputs.push_back(quantize(traj.states.back().current, gamma));
  }
  return traj;
}

template <class S>
Trajectory<S> simulate(const ModelConfig<S>& config, int horizon, const S& gamma) {
  return simulate(config.x_init, config.lambda, config.w, horizon, gamma);
}

/// Same path computed by repeated multiplication with augmented_matrix.
template <class S>
Trajectory<S> simulate_block(const Vector<S>& x_init, const StubbornnessVector<S>& lambda,
                             const InfluenceMatrix<S>& w, int horizon, const S& gamma) {
  check_gamma(gamma);
  const Index n = x_init.size();
  const Matrix<S> a = augmented_matrix(lambda, w);
  Vector<S> stacked(2 * n);
  stacked << x_init, x_init;
  Trajectory<S> traj;
  for (int t = 0; t <= horizon; ++t) {
    if (t > 0) stacked = a * stacked;
    traj.states.push_back({stacked.head(n), stacked.tail(n)});
    traj.outputs.push_back(quantize(Vector<S>(stacked.head(n)), gamma));
  }
  return traj;
}

/// Largest singular value by power iteration on M^T M, started from the
/// normalized all-ones vector. Exact max |m_ii| for diagonal input.
double spectral_norm(const Matrix<double>& m);

struct PowerIterationOptions {
  double tolerance = 1e-10;
  int max_iterations = 10000;
};
double spectral_norm(const Matrix<double>& m, const PowerIterationOptions& options);

/// ||(I - Lambda) W||_2.
template <class S>
double contraction_factor(const StubbornnessVector<S>& lambda, const InfluenceMatrix<S>& w) {
  if (lambda.size() != w.size()) throw DimensionError("contraction_factor: dimension mismatch");
  const Vector<S> free = Vector<S>::Ones(lambda.size()) - lambda.values();
  const Matrix<S> m = free.asDiagonal() * w.matrix();
  return spectral_norm(Matrix<double>(m.template cast<double>()));
}

/// Entrywise shortest-decimal conversion into rationals.
Vector<Rational> to_rational(const Vector<double>& v);
Matrix<Rational> to_rational(const Matrix<double>& m);
/// Same, then each row divided by its exact sum so the result is exactly
/// stochastic.
InfluenceMatrix<Rational> to_rational(const InfluenceMatrix<double>& w);

template <class S>
Vector<double> to_double(const Vector<S>& v) {
  return v.template cast<double>();
}
template <class S>
Matrix<double> to_double(const Matrix<S>& m) {
  return m.template cast<double>();
}

template <class S>
InfluenceMatrix<double> to_double(const InfluenceMatrix<S>& w) {
  if constexpr (std::is_same_v<S, double>) {
    return w;
  } else {
    return InfluenceMatrix<double>(w.matrix().template cast<double>());
  }
}

template <class S>
StubbornnessVector<double> to_double(const StubbornnessVector<S>& lambda) {
  if constexpr (std::is_same_v<S, double>) {
    return lambda;
  } else {
    return StubbornnessVector<double>(lambda.values().template cast<double>());
  }
}

}  // namespace fjv
