#include "fjv/network.hpp"

#include <algorithm>
#include <string>

#include "fjv/random.hpp"

namespace fjv {

std::vector<std::vector<int>> Communities::members() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < label.size(); ++i) {
    out[static_cast<std::size_t>(label[i])].push_back(static_cast<int>(i));
  }
  return out;
}

Communities Communities::from_labels(std::vector<int> labels) {
  Communities c;
  int max_label = -1;
  for (int l : labels) {
    if (l < 0) throw DomainError("community labels must be nonnegative");
    max_label = std::max(max_label, l);
  }
  c.count = max_label + 1;
  c.label = std::move(labels);
  return c;
}

Communities Communities::two_halves(int n) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i < n / 2 ? 0 : 1;
  Communities c;
  c.label = std::move(labels);
  c.count = n >= 2 ? 2 : n;
  return c;
}

SbmParams SbmParams::two_block(int n, double p_in, double p_out, std::uint64_t seed) {
  SbmParams p;
  p.n = n;
  p.communities = Communities::two_halves(n);
  p.p_in = p_in;
  p.p_out = p_out;
  p.seed = seed;
  return p;
}

void SbmParams::validate() const {
  if (n < 1) throw DomainError("SBM needs at least one agent");
  if (communities.size() != n) throw DimensionError("community labels do not cover all agents");
  if (!(p_in >= 0.0 && p_in <= 1.0) || !(p_out >= 0.0 && p_out <= 1.0)) {
    throw DomainError("SBM probabilities must lie in [0,1]");
  }
}

ZeroRowError::ZeroRowError(Index agent)
    : std::invalid_argument("agent " + std::to_string(static_cast<long long>(agent)) +
                            " has no outgoing influence (zero adjacency row)"),
      agent_(agent) {}

Adjacency sbm_generate(const SbmParams& params) {
  params.validate();
  const Index n = params.n;
  Rng rng(params.seed);
  Adjacency adj;
  adj.a = Matrix<Rational>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const bool same = params.communities.label[static_cast<std::size_t>(i)] ==
                        params.communities.label[static_cast<std::size_t>(j)];
      if (rng.bernoulli(same ? params.p_in : params.p_out)) {
        adj.a(i, j) = 1;
        adj.a(j, i) = 1;
      }
    }
  }
  return adj;
}

Adjacency expected_adjacency(const SbmParams& params) {
  params.validate();
  const Rational in = rational_from_double(params.p_in);
  const Rational out = rational_from_double(params.p_out);
  return block_weighted_adjacency(params.n, in, out, params.communities);
}

Adjacency block_weighted_adjacency(int n, const Rational& w_in, const Rational& w_out,
                                   const Communities& communities) {
  if (communities.size() != n) throw DimensionError("community labels do not cover all agents");
  if (w_in < 0 || w_out < 0) throw DomainError("block weights must be nonnegative");
  Adjacency adj;
  adj.a = Matrix<Rational>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool same = communities.label[static_cast<std::size_t>(i)] ==
                        communities.label[static_cast<std::size_t>(j)];
      adj.a(i, j) = same ? w_in : w_out;
    }
  }
  return adj;
}

InfluenceMatrix<Rational> row_normalize(const Adjacency& adj) {
  const Index n = adj.size();
  if (adj.a.cols() != n) throw DimensionError("adjacency must be square");
  Matrix<Rational> w(n, n);
  for (Index i = 0; i < n; ++i) {
    Rational sum = 0;
    for (Index j = 0; j < n; ++j) {
      if (adj.a(i, j) < 0) throw DomainError("adjacency entries must be nonnegative");
      sum += adj.a(i, j);
    }
    if (sum == 0) {
      if (adj.policy == SelfLoopPolicy::Strict) throw ZeroRowError(i);
      for (Index j = 0; j < n; ++j) w(i, j) = i == j ? 1 : 0;
      continue;
    }
    for (Index j = 0; j < n; ++j) w(i, j) = adj.a(i, j) / sum;
  }
  return InfluenceMatrix<Rational>(std::move(w));
}

}  // namespace fjv
