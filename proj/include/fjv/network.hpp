#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fjv/fj.hpp"
#include "fjv/rational.hpp"

namespace fjv {

/// Community label per agent, labels 0..count-1.
struct Communities {
  std::vector<int> label;
  int count = 0;

  Index size() const { return static_cast<Index>(label.size()); }
  std::vector<std::vector<int>> members() const;

  static Communities from_labels(std::vector<int> labels);
  /// Agents [0, n/2) form community 0, the rest community 1.
  static Communities two_halves(int n);
};

enum class SelfLoopPolicy { Strict, AddUnitSelfLoop };

struct SbmParams {
  int n = 0;
  Communities communities;
  double p_in = 0.0;
  double p_out = 0.0;
  std::uint64_t seed = 0;

  /// n agents split into two halves.
  static SbmParams two_block(int n, double p_in, double p_out, std::uint64_t seed);
  void validate() const;
};

/// Nonnegative (weighted or 0/1) adjacency, stored exactly.
struct Adjacency {
  Matrix<Rational> a;
  SelfLoopPolicy policy = SelfLoopPolicy::Strict;

  Index size() const { return a.rows(); }
};

class ZeroRowError : public std::invalid_argument {
 public:
  explicit ZeroRowError(Index agent);
  Index agent() const { return agent_; }

 private:
  Index agent_;
};

/// Symmetric 0/1 graph with zero diagonal. Pair (i, j), i < j, is an edge
/// with probability p_in inside a community and p_out across; pairs are
/// visited in row-major order, one uniform draw each.
Adjacency sbm_generate(const SbmParams& params);

/// Entry p_in for same-community pairs, p_out otherwise, zero diagonal.
Adjacency expected_adjacency(const SbmParams& params);

/// a_ij = w_in inside a community, w_out across, zero diagonal.
Adjacency block_weighted_adjacency(int n, const Rational& w_in, const Rational& w_out,
                                   const Communities& communities);

/// Exact a_ij / sum_k a_ik. Zero rows raise ZeroRowError under the strict
/// policy and get a unit self-loop under AddUnitSelfLoop.
InfluenceMatrix<Rational> row_normalize(const Adjacency& adj);

/// ||W_ab - W||_2, the measured weight error eps_w.
inline double weight_error(const Matrix<double>& w, const Matrix<double>& w_ab) {
  if (w.rows() != w_ab.rows() || w.cols() != w_ab.cols()) {
    throw DimensionError("weight_error: dimension mismatch");
  }
  return spectral_norm(Matrix<double>(w_ab - w));
}

template <class S>
double weight_error(const InfluenceMatrix<S>& w, const InfluenceMatrix<S>& w_ab) {
  if (w.size() != w_ab.size()) throw DimensionError("weight_error: dimension mismatch");
  const Matrix<S> diff = w_ab.matrix() - w.matrix();
  return spectral_norm(Matrix<double>(diff.template cast<double>()));
}

}  // namespace fjv
