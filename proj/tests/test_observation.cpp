#include "doctest.h"

#include <vector>

#include "fjv/observation.hpp"
#include "fjv/random.hpp"

using namespace fjv;

namespace {

BinaryOutput bits(std::initializer_list<int> b) {
  BinaryOutput y(static_cast<Index>(b.size()));
  Index i = 0;
  for (int v : b) y(i++) = static_cast<std::uint8_t>(v);
  return y;
}

BinaryOutput random_bits(Index n, Rng& rng) {
  BinaryOutput y(n);
  for (Index i = 0; i < n; ++i) y(i) = rng.bernoulli(0.5) ? 1 : 0;
  return y;
}

// Flip the first k entries of y.
BinaryOutput flip_first(BinaryOutput y, Index k) {
  for (Index i = 0; i < k; ++i) y(i) = static_cast<std::uint8_t>(1 - y(i));
  return y;
}

// Direct loop over steps and agents, no library helpers.
bool satisfies_oracle(const std::vector<BinaryOutput>& ys, const std::vector<BinaryOutput>& obs,
                      const Rational& kappa) {
  for (std::size_t t = 0; t < obs.size(); ++t) {
    long long diff = 0;
    for (Index i = 0; i < obs[t].size(); ++i) diff += ys[t](i) != obs[t](i);
    if (Rational(diff, obs[t].size()) > kappa) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("ObservationSpec validation") {
  ObservationSpec spec;
  CHECK_THROWS_AS(spec.validate(), DomainError);
  spec.observed = {bits({0, 1}), bits({1, 1})};
  spec.kappa = Rational(1, 2);
  CHECK_NOTHROW(spec.validate());
  CHECK(spec.horizon() == 1);
  CHECK(spec.agents() == 2);
  spec.kappa = Rational(-1, 10);
  CHECK_THROWS_AS(spec.validate(), DomainError);
  spec.kappa = 0;
  spec.observed.push_back(bits({1}));
  CHECK_THROWS_AS(spec.validate(), DimensionError);
  spec.observed.back() = bits({1, 2});
  CHECK_THROWS_AS(spec.validate(), DomainError);
}

TEST_CASE("mismatch_budget") {
  CHECK(mismatch_budget(Rational(1, 4), 4) == 1);
  CHECK(mismatch_budget(Rational(1, 4), 3) == 0);
  CHECK(mismatch_budget(Rational(0), 10) == 0);
  CHECK(mismatch_budget(Rational(1), 7) == 7);
  CHECK(mismatch_budget(Rational(3, 10), 10) == 3);
}

TEST_CASE("predicate_value") {
  const BinaryOutput obs = bits({0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  ObservationSpec spec{{obs}, 0};
  CHECK(predicate_value(obs, spec, 0) == 0);
  spec.kappa = Rational(1, 20);
  CHECK(predicate_value(flip_first(obs, 1), spec, 0) == Rational(-1, 20));
  CHECK_THROWS_AS(predicate_value(obs, spec, 1), DomainError);
  CHECK_THROWS_AS(predicate_value(obs, spec, -1), DomainError);

  // kappa = 1 admits every output.
  spec.kappa = 1;
  for (Index k = 0; k <= 10; ++k) CHECK(predicate_value(flip_first(obs, k), spec, 0) >= 0);
}

TEST_CASE("satisfies and first_violation") {
  const BinaryOutput base = bits({1, 0, 1, 0});
  ObservationSpec spec{{base, base, base, base, base}, Rational(1, 4)};
  std::vector<BinaryOutput> ys(5, base);
  CHECK(satisfies(ys, spec));
  CHECK_FALSE(first_violation(ys, spec).has_value());

  ys[1] = flip_first(base, 1);  // one mismatch, 1/4 <= kappa
  CHECK(satisfies(ys, spec));
  ys[3] = flip_first(base, 2);
  ys[4] = flip_first(base, 3);
  REQUIRE(first_violation(ys, spec).has_value());
  CHECK(*first_violation(ys, spec) == 3);
  CHECK_FALSE(satisfies(ys, spec));

  // Extra trailing outputs are ignored; missing ones are an error.
  std::vector<BinaryOutput> longer(7, base);
  CHECK(satisfies(longer, spec));
  std::vector<BinaryOutput> shorter(3, base);
  CHECK_THROWS_AS(satisfies(shorter, spec), DimensionError);
  CHECK_THROWS_AS(robustness(shorter, spec), DimensionError);
}

TEST_CASE("robustness") {
  const BinaryOutput base = bits({0, 1, 0, 1, 0, 1, 0, 1, 0, 1});
  ObservationSpec spec{{base, base, base}, Rational(3, 10)};
  std::vector<BinaryOutput> ys{base, flip_first(base, 1), base};
  CHECK(robustness(ys, spec) == Rational(1, 5));
  ys[2] = flip_first(base, 4);
  CHECK(robustness(ys, spec) == Rational(-1, 10));

  ObservationSpec single{{base}, Rational(2, 5)};
  CHECK(robustness(std::vector<BinaryOutput>{base}, single) == Rational(2, 5));
}

TEST_CASE("satisfaction is monotone in kappa") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(8));
    const int horizon = static_cast<int>(rng.below(4));
    ObservationSpec spec;
    std::vector<BinaryOutput> ys;
    for (int t = 0; t <= horizon; ++t) {
      spec.observed.push_back(random_bits(n, rng));
      ys.push_back(random_bits(n, rng));
    }
    bool previous = false;
    for (Index k = 0; k <= n; ++k) {
      spec.kappa = Rational(k, n);
      const bool now = satisfies(ys, spec);
      if (previous) CHECK(now);
      previous = now;
    }
    CHECK(previous);  // kappa = 1
  }
}

TEST_CASE("robustness sign agrees with satisfaction on random cases") {
  Rng rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(12));
    const int horizon = static_cast<int>(rng.below(5));
    ObservationSpec spec;
    spec.kappa = Rational(static_cast<long long>(rng.below(n + 1)), n);
    std::vector<BinaryOutput> ys;
    for (int t = 0; t <= horizon; ++t) {
      spec.observed.push_back(random_bits(n, rng));
      // Mostly close to the observation so both outcomes occur.
      BinaryOutput y = spec.observed.back();
      for (Index i = 0; i < n; ++i) {
        if (rng.bernoulli(0.15)) y(i) = static_cast<std::uint8_t>(1 - y(i));
      }
      ys.push_back(y);
    }
    const bool sat = satisfies(ys, spec);
    CHECK(sat == satisfies_oracle(ys, spec.observed, spec.kappa));
    CHECK(sat == (robustness(ys, spec) >= 0));
    CHECK(sat == consistency_formula(spec).evaluate(ys, spec));
  }
}

TEST_CASE("Formula connectives") {
  const BinaryOutput base = bits({0, 0, 1, 1});
  ObservationSpec spec{{base, base}, 0};
  const std::vector<BinaryOutput> ys{base, flip_first(base, 1)};
  const Formula p0 = Formula::predicate(0);
  const Formula p1 = Formula::predicate(1);
  CHECK(p0.evaluate(ys, spec));
  CHECK_FALSE(p1.evaluate(ys, spec));
  CHECK(Formula::truth().evaluate(ys, spec));
  CHECK(Formula::negation(p1).evaluate(ys, spec));
  CHECK_FALSE(Formula::conjunction(p0, p1).evaluate(ys, spec));
  CHECK(Formula::disjunction(p0, p1).evaluate(ys, spec));
  CHECK_FALSE(Formula::disjunction(p1, p1).evaluate(ys, spec));
  CHECK_FALSE(consistency_formula(spec).evaluate(ys, spec));
  CHECK_THROWS_AS(Formula::predicate(2).evaluate(ys, spec), DomainError);

  // Truth tables over both predicate values.
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const std::vector<BinaryOutput> zs{flip_first(base, 1 - a), flip_first(base, 1 - b)};
      CHECK(Formula::conjunction(p0, p1).evaluate(zs, spec) == (a && b));
      CHECK(Formula::disjunction(p0, p1).evaluate(zs, spec) == (a || b));
      CHECK(Formula::negation(Formula::conjunction(p0, p1)).evaluate(zs, spec) == !(a && b));
    }
  }
}
