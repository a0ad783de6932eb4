#include "doctest.h"

#include <cmath>

#include "fjv/network.hpp"

using namespace fjv;

TEST_CASE("sbm_generate extremes") {
  SbmParams p = SbmParams::two_block(6, 0.0, 0.0, 1);
  CHECK(sbm_generate(p).a.isZero());
  p.p_in = p.p_out = 1.0;
  p.n = 3;
  p.communities = Communities::two_halves(3);
  const Adjacency full = sbm_generate(p);
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 3; ++j) CHECK(full.a(i, j) == (i == j ? 0 : 1));
  }
}

TEST_CASE("sbm_generate is symmetric, loop-free and seed-deterministic") {
  const SbmParams p = SbmParams::two_block(30, 0.3, 0.1, 17);
  const Adjacency a = sbm_generate(p);
  const Adjacency b = sbm_generate(p);
  CHECK(a.a == b.a);
  CHECK(a.a == a.a.transpose());
  for (Index i = 0; i < 30; ++i) CHECK(a.a(i, i) == 0);
  SbmParams q = p;
  q.seed = 18;
  CHECK(sbm_generate(q).a != a.a);
}

TEST_CASE("sbm within-block degree matches p_in (n - 1) / 2 communities") {
  // n = 40, halves of 20: expected within-block degree 0.3 * 19 = 5.7.
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SbmParams p = SbmParams::two_block(40, 0.3, 0.1, seed);
    const Adjacency adj = sbm_generate(p);
    double within = 0.0;
    for (Index i = 0; i < 40; ++i) {
      for (Index j = 0; j < 40; ++j) {
        if (p.communities.label[static_cast<std::size_t>(i)] ==
            p.communities.label[static_cast<std::size_t>(j)]) {
          within += to_double(adj.a(i, j));
        }
      }
    }
    total += within / 40.0;
  }
  const double mean = total / 100.0;
  CHECK(mean >= 5.7 * 0.9);
  CHECK(mean <= 5.7 * 1.1);
}

TEST_CASE("expected_adjacency matches the seed average within 3 standard errors") {
  const int n = 20;
  const int seeds = 2000;
  SbmParams p = SbmParams::two_block(n, 0.3, 0.1, 0);
  Matrix<double> sum = Matrix<double>::Zero(n, n);
  for (int s = 0; s < seeds; ++s) {
    p.seed = static_cast<std::uint64_t>(s);
    sum += to_double(sbm_generate(p).a);
  }
  const Matrix<double> expected = to_double(expected_adjacency(p).a);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double prob = expected(i, j);
      const double se = std::sqrt(prob * (1.0 - prob) / seeds);
      CHECK(std::abs(sum(i, j) / seeds - prob) <= 3.0 * se + 1e-15);
    }
  }
}

TEST_CASE("expected_adjacency") {
  SbmParams p = SbmParams::two_block(4, 0.2, 0.2, 0);
  const Adjacency flat = expected_adjacency(p);
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 4; ++j) CHECK(flat.a(i, j) == (i == j ? Rational(0) : Rational(1, 5)));
  }
  p = SbmParams::two_block(2, 0.3, 0.1, 0);
  const Adjacency two = expected_adjacency(p);
  CHECK(two.a(0, 1) == Rational(1, 10));
  CHECK(two.a(1, 0) == Rational(1, 10));
  CHECK(two.a(0, 0) == 0);

  p = SbmParams::two_block(40, 0.3, 0.1, 0);
  const Adjacency big = expected_adjacency(p);
  CHECK(big.a(0, 19) == Rational(3, 10));
  CHECK(big.a(0, 20) == Rational(1, 10));
  CHECK(big.a(39, 20) == Rational(3, 10));
}

TEST_CASE("block_weighted_adjacency") {
  const Adjacency a = block_weighted_adjacency(4, 5, 3, Communities::two_halves(4));
  Matrix<Rational> expected(4, 4);
  expected << 0, 5, 3, 3,
              5, 0, 3, 3,
              3, 3, 0, 5,
              3, 3, 5, 0;
  CHECK(a.a == expected);
  const Adjacency flat = block_weighted_adjacency(3, 2, 2, Communities::two_halves(3));
  CHECK(flat.a(0, 2) == 2);
  CHECK(flat.a(1, 1) == 0);

  const auto w = row_normalize(block_weighted_adjacency(200, 5, 3, Communities::two_halves(200)));
  // Row of agent 0: 99 in-community neighbours at 5, 100 across at 3.
  CHECK(w.matrix()(0, 1) == Rational(5, 99 * 5 + 100 * 3));
  CHECK(w.matrix()(0, 150) == Rational(3, 795));
}

TEST_CASE("row_normalize") {
  Adjacency id;
  id.a = Matrix<Rational>::Identity(3, 3);
  CHECK(row_normalize(id).matrix() == Matrix<Rational>::Identity(3, 3));

  Adjacency pair;
  pair.a.resize(2, 2);
  pair.a << 5, 3, 3, 5;
  const auto w = row_normalize(pair);
  CHECK(w.matrix()(0, 0) == Rational(5, 8));
  CHECK(w.matrix()(0, 1) == Rational(3, 8));

  Adjacency zero_row;
  zero_row.a = Matrix<Rational>::Zero(3, 3);
  zero_row.a(0, 1) = 1;
  zero_row.a(2, 1) = 1;
  try {
    row_normalize(zero_row);
    FAIL("expected ZeroRowError");
  } catch (const ZeroRowError& e) {
    CHECK(e.agent() == 1);
  }
  zero_row.policy = SelfLoopPolicy::AddUnitSelfLoop;
  const auto looped = row_normalize(zero_row);
  CHECK(looped.matrix()(1, 1) == 1);
  CHECK(looped.matrix()(1, 0) == 0);
}

TEST_CASE("row_normalize produces exactly stochastic rows on random graphs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Adjacency adj = sbm_generate(SbmParams::two_block(25, 0.3, 0.1, seed));
    adj.policy = SelfLoopPolicy::AddUnitSelfLoop;
    const auto w = row_normalize(adj);
    for (Index i = 0; i < 25; ++i) {
      Rational sum = 0;
      for (Index j = 0; j < 25; ++j) sum += w.matrix()(i, j);
      CHECK(sum == 1);
    }
  }
}

TEST_CASE("weight_error") {
  Adjacency adj = sbm_generate(SbmParams::two_block(12, 0.5, 0.2, 4));
  adj.policy = SelfLoopPolicy::AddUnitSelfLoop;
  const auto w = to_double(row_normalize(adj));
  CHECK(weight_error(w, w) == 0.0);

  // W + D is not stochastic, so this goes through the raw-matrix overload.
  Matrix<double> d = Matrix<double>::Zero(12, 12);
  d.diagonal() << 0.01, -0.02, 0.03, 0, 0, 0, 0, 0, 0, 0, 0, -0.05;
  CHECK(weight_error(w.matrix(), Matrix<double>(w.matrix() + d)) == doctest::Approx(0.05).epsilon(1e-14));

  const auto expected = to_double(row_normalize(expected_adjacency(SbmParams::two_block(12, 0.5, 0.2, 4))));
  const double forward = weight_error(w, expected);
  const double backward = weight_error(expected, w);
  CHECK(forward > 0.0);
  CHECK(std::abs(forward - backward) <= 1e-12);

  Matrix<double> two = Matrix<double>::Identity(2, 2);
  CHECK_THROWS_AS(weight_error(w, InfluenceMatrix<double>(two)), DimensionError);
}

TEST_CASE("weight_error of sampled vs expected influence shrinks with n") {
  auto mean_error = [](int n) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const SbmParams p = SbmParams::two_block(n, 0.3, 0.1, seed);
      Adjacency adj = sbm_generate(p);
      adj.policy = SelfLoopPolicy::AddUnitSelfLoop;
      total += weight_error(to_double(row_normalize(adj)), to_double(row_normalize(expected_adjacency(p))));
    }
    return total / 10.0;
  };
  const double small = mean_error(40);
  const double large = mean_error(160);
  MESSAGE("mean eps_w n=40: " << small << ", n=160: " << large);
  CHECK(large < small);
}
