#include "doctest.h"

#include <cmath>
#include <set>

#include "fjv/abstraction.hpp"
#include "fjv/network.hpp"
#include "test_support.hpp"

using namespace fjv;

namespace {

Vector<double> vec(std::initializer_list<double> xs) {
  Vector<double> v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

AbstractGrid make_grid(const InfluenceMatrix<double>& w, int d_x, int d_lambda, double eps_w = 0.0) {
  AbstractGrid g;
  g.d_x = d_x;
  g.d_lambda = d_lambda;
  g.w_ab = to_rational(w);
  g.eps_w = eps_w;
  return g;
}

// Brute-force nearest grid value with ties to the lower value.
int nearest_lower(double x, const std::vector<Rational>& values) {
  const Rational q = rational_exact_binary(x);
  int best = 0;
  Rational best_gap = abs(q - values[0]);
  for (std::size_t k = 1; k < values.size(); ++k) {
    const Rational gap = abs(q - values[k]);
    if (gap < best_gap) {
      best = static_cast<int>(k);
      best_gap = gap;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("grid values") {
  Rng rng(1);
  const AbstractGrid g = make_grid(test::random_stochastic(2, rng), 2, 3);
  CHECK(g.init_value(0) == Rational(1, 4));
  CHECK(g.init_value(1) == Rational(3, 4));
  CHECK(g.level_value(0) == 0);
  CHECK(g.level_value(3) == 1);
  CHECK_THROWS_AS(g.init_value(2), DomainError);
  CHECK_THROWS_AS(g.level_value(4), DomainError);
}

TEST_CASE("snap_initial") {
  CHECK(snap_initial(vec({0.25, 0.75}), 2) == std::vector<int>{0, 1});
  CHECK(snap_initial(vec({0.0, 1.0}), 2) == std::vector<int>{0, 1});
  CHECK(snap_initial(vec({0.5}), 2) == std::vector<int>{0});
  CHECK(snap_initial(vec({0.5000001}), 2) == std::vector<int>{1});
  CHECK_THROWS_AS(snap_initial(vec({1.5}), 2), DomainError);
}

TEST_CASE("snap_stubbornness") {
  CHECK(snap_stubbornness(vec({1.0 / 3.0}), 3) == std::vector<int>{1});
  CHECK(snap_stubbornness(vec({0.49}), 3) == std::vector<int>{1});
  CHECK(snap_stubbornness(vec({0.25}), 2) == std::vector<int>{0});
  CHECK(snap_stubbornness(vec({0.0, 1.0}), 5) == std::vector<int>{0, 5});
}

TEST_CASE("snapping matches brute force and respects the error bounds") {
  Rng rng(11);
  for (int trial = 0; trial < 10000; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(8));
    const int d_x = 1 + static_cast<int>(rng.below(9));
    const int d_l = 1 + static_cast<int>(rng.below(9));
    Vector<double> x(n), lam(n);
    for (Index i = 0; i < n; ++i) {
      // A third of the entries sit on cell boundaries.
      x(i) = rng.below(3) == 0 ? static_cast<double>(rng.below(static_cast<std::uint64_t>(d_x) + 1)) / d_x
                               : rng.uniform01();
      lam(i) = rng.below(3) == 0
                   ? static_cast<double>(2 * rng.below(static_cast<std::uint64_t>(d_l)) + 1) / (2.0 * d_l)
                   : rng.uniform01();
    }
    const auto xi = snap_initial(x, d_x);
    const auto li = snap_stubbornness(lam, d_l);
    std::vector<Rational> init_values, levels;
    for (int k = 0; k < d_x; ++k) init_values.emplace_back(2 * k + 1, 2 * d_x);
    for (int k = 0; k <= d_l; ++k) levels.emplace_back(k, d_l);
    double sq = 0.0, worst_lambda = 0.0;
    for (Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      CHECK(xi[k] == nearest_lower(x(i), init_values));
      CHECK(li[k] == nearest_lower(lam(i), levels));
      const double ex = x(i) - to_double(init_values[static_cast<std::size_t>(xi[k])]);
      sq += ex * ex;
      CHECK(std::abs(ex) <= 1.0 / (2.0 * d_x) + 1e-15);
      worst_lambda = std::max(worst_lambda, std::abs(lam(i) - to_double(levels[static_cast<std::size_t>(li[k])])));
    }
    CHECK(std::sqrt(sq) <= std::sqrt(static_cast<double>(n)) / (2.0 * d_x) + 1e-12);
    CHECK(worst_lambda <= 1.0 / (2.0 * d_l) + 1e-15);
  }
}

TEST_CASE("epsilon_x") {
  CHECK(epsilon_x(1.0, 3, 2, 0.0) == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
  CHECK(epsilon_x(1.0, 6, 6, 0.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(epsilon_x(1.0, 1000000, 1000000, 0.0) < 1e-5);
  CHECK(epsilon_x(1.0, 3, 2, 0.1) == doctest::Approx(7.0 / 12.0 + 0.1));
  CHECK_THROWS_AS(epsilon_x(1.0, 0, 2, 0.0), DomainError);
  CHECK_THROWS_AS(epsilon_x(1.0, 2, 2, -0.1), DomainError);
}

TEST_CASE("sup_error_bound") {
  CHECK(sup_error_bound(0.3, 0.0, 7) == 0.0);
  CHECK(sup_error_bound(0.5, 0.1, 4) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK_THROWS_AS(sup_error_bound(1.0, 0.1, 4), NonContractiveError);
}

TEST_CASE("one_step_bound_check") {
  Rng rng(21);
  SUBCASE("identical trajectories") {
    const auto w = test::random_stochastic(5, rng);
    const auto traj = simulate(test::random_unit_vector(5, rng),
                               StubbornnessVector<double>(test::random_unit_vector(5, rng)), w, 8, 0.5);
    CHECK(one_step_bound_check(traj, traj, 0.0, 0.0));
  }
  SUBCASE("snapped abstractions with shared W") {
    for (int trial = 0; trial < 100; ++trial) {
      const auto w = test::sbm_influence(40, static_cast<std::uint64_t>(trial));
      const ModelConfig<double> config{test::random_unit_vector(40, rng),
                                       StubbornnessVector<double>(test::random_unit_vector(40, rng)), w};
      const int d_x = 1 + static_cast<int>(rng.below(8));
      const int d_l = 1 + static_cast<int>(rng.below(8));
      const AbstractGrid grid = make_grid(w, d_x, d_l);
      const auto traj = simulate(config, 9, 0.5);
      const auto traj_ab = simulate(decode_double(snap(config, grid), grid), 9, 0.5);
      const double rho = contraction_factor(config.lambda, config.w);
      CHECK(one_step_bound_check(traj, traj_ab, rho, epsilon_x(w, d_l, d_x, 0.0)));
    }
  }
  SUBCASE("detects a constructed violation") {
    Matrix<double> avg(2, 2);
    avg << 0.5, 0.5, 0.5, 0.5;
    const StubbornnessVector<double> free(vec({0.0, 0.0}));
    const auto traj = simulate(vec({0.0, 1.0}), free, InfluenceMatrix<double>(Matrix<double>::Identity(2, 2)), 1, 0.5);
    const auto traj_ab = simulate(vec({0.0, 1.0}), free, InfluenceMatrix<double>(avg), 1, 0.5);
    CHECK_FALSE(one_step_bound_check(traj, traj_ab, 1.0, 0.0));
  }
  SUBCASE("horizon mismatch") {
    const auto w = test::random_stochastic(3, rng);
    const StubbornnessVector<double> lam(test::random_unit_vector(3, rng));
    const Vector<double> x = test::random_unit_vector(3, rng);
    CHECK_THROWS_AS(one_step_bound_check(simulate(x, lam, w, 2, 0.5), simulate(x, lam, w, 3, 0.5), 0.5, 0.1),
                    DimensionError);
  }
}

TEST_CASE("near_threshold_set") {
  CHECK(near_threshold_set(vec({0.1, 0.9}), 0.0, 0.5).empty());
  CHECK(near_threshold_set(vec({0.5, 0.7}), 0.1, 0.5) == std::vector<Index>{0});
  CHECK(near_threshold_set(vec({0.5, 0.5, 0.5}), 0.0, 0.5).size() == 3);
  CHECK_THROWS_AS(near_threshold_set(vec({0.5}), -1.0, 0.5), DomainError);
}

TEST_CASE("assumption2_check") {
  Rng rng(4);
  const auto w = test::random_stochastic(6, rng);
  const StubbornnessVector<double> stubborn(Vector<double>::Ones(6));
  const auto pinned = simulate(vec({0, 1, 0, 1, 1, 0}), stubborn, w, 4, 0.5);
  CHECK(assumption2_check(pinned, 0.1, 0.5));

  const auto middle = simulate(Vector<double>(Vector<double>::Constant(6, 0.5)), stubborn, w, 4, 0.5);
  CHECK_FALSE(assumption2_check(middle, 0.1, 0.5));
  CHECK_FALSE(assumption2_check(middle, 1.9, 0.5));
  CHECK(assumption2_check(middle, 2.0, 0.5));
  CHECK(assumption2_check(middle, 3.0, 0.5));

  Matrix<Rational> id = Matrix<Rational>::Identity(2, 2);
  const StubbornnessVector<Rational> frozen(Vector<Rational>::Ones(2));
  Vector<Rational> at_threshold(2), polarized(2);
  at_threshold << Rational(1, 2), Rational(0);
  polarized << Rational(0), Rational(1);
  const auto near = simulate(at_threshold, frozen, InfluenceMatrix<Rational>(id), 1, Rational(1, 2));
  const auto far = simulate(polarized, frozen, InfluenceMatrix<Rational>(id), 1, Rational(1, 2));
  CHECK_FALSE(assumption2_check(near, 0.1, 0.5));
  CHECK(assumption2_check(far, 0.1, 0.5));
}

TEST_CASE("theorem 1 conditions") {
  CHECK_FALSE(condition_budget(7.0 / 12.0, 0.5, 0.25));
  CHECK(condition_grid_resolution(2, 0.3));
  CHECK(condition_grid_resolution(2, 0.25));
  CHECK_FALSE(condition_grid_resolution(2, 0.2));
  CHECK(condition_contractive(0.999));
  CHECK_FALSE(condition_contractive(1.0));

  Rng rng(8);
  const auto w = test::random_stochastic(4, rng);
  const ModelConfig<double> frozen{vec({0.05, 0.95, 0.02, 0.97}),
                                   StubbornnessVector<double>(Vector<double>::Ones(4)), w};
  const auto coarse = theorem1_certificate(frozen, make_grid(w, 2, 3), 0.25, 5, 0.5);
  CHECK(coarse.rho == 0.0);
  CHECK(coarse.contractive);
  CHECK(coarse.budget == (coarse.eps_x <= 0.25));
  CHECK_FALSE(coarse.budget);
  CHECK_FALSE(coarse.valid());

  const auto fine = theorem1_certificate(frozen, make_grid(w, 200, 200), 0.1, 5, 0.5);
  CHECK(fine.budget);
  CHECK(fine.grid_resolution);
  CHECK(fine.assumption2);
  CHECK(fine.valid());
  REQUIRE(fine.min_delta.has_value());
  CHECK(*fine.min_delta <= 0.1);

  // Weight budget violated when W_ab differs from W and eps_w = 0.
  const auto other = test::random_stochastic(4, rng);
  const auto wrong_w = theorem1_certificate(frozen, make_grid(other, 200, 200), 0.1, 5, 0.5);
  CHECK_FALSE(wrong_w.weight_budget);
  CHECK_FALSE(wrong_w.valid());
}

TEST_CASE("admissible delta bound is tight and sufficient") {
  Rng rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    const double eps = rng.uniform(0.0, 0.3);
    const double rho = rng.uniform(0.0, 0.99);
    const int d_x = 1 + static_cast<int>(rng.below(50));
    const auto lo = minimal_admissible_delta(eps, rho, d_x);
    REQUIRE(lo.has_value());
    // Tight: one of the two conditions is an equality at the endpoint.
    const double slack10 = *lo - 1.0 / (2.0 * d_x);
    const double slack12 = (1.0 - rho) * *lo - eps;
    CHECK(std::min(std::abs(slack10), std::abs(slack12)) <= 1e-12);
    CHECK(slack10 >= -1e-12);
    CHECK(slack12 >= -1e-12);
    for (double factor : {1.0 + 1e-9, 1.5, 4.0}) {
      const double delta = *lo * factor;
      CHECK(condition_grid_resolution(d_x, delta));
      CHECK(condition_budget(eps, rho, delta));
    }
  }
  CHECK_FALSE(minimal_admissible_delta(0.1, 1.0, 3).has_value());
}

TEST_CASE("certified instances keep states and outputs within delta") {
  Rng rng(31);
  int valid = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 20 + static_cast<int>(rng.below(30));
    const auto w = test::sbm_influence(n, static_cast<std::uint64_t>(trial) + 100);
    Vector<double> x(n), lam(n);
    for (Index i = 0; i < n; ++i) {
      x(i) = rng.below(2) == 0 ? rng.uniform(0.0, 0.06) : rng.uniform(0.94, 1.0);
      lam(i) = rng.uniform(0.9, 1.0);
    }
    const ModelConfig<double> config{x, StubbornnessVector<double>(lam), w};
    const AbstractGrid grid = make_grid(w, 20 + static_cast<int>(rng.below(200)), 20 + static_cast<int>(rng.below(200)));
    const double delta = rng.uniform(0.05, 0.1);
    const auto cert = theorem1_certificate(config, grid, delta, 9, 0.5);
    if (!cert.valid()) continue;
    ++valid;
    const auto traj = simulate(config, 9, 0.5);
    const auto traj_ab = simulate(decode_double(snap(config, grid), grid), 9, 0.5);
    CHECK(max_state_error(traj, traj_ab) <= delta * std::sqrt(static_cast<double>(n)));
    CHECK(max_output_error(traj, traj_ab) <= delta);
  }
  CHECK(valid >= 50);
}

TEST_CASE("SearchSpace enumeration") {
  const SearchSpace space({{0, 1}, {1}}, {{0, 2}, {1, 2, 3}});
  CHECK(space.size() == 12);
  CHECK(space.init_combinations() == 2);
  CHECK(space.lambda_combinations() == 6);
  const auto all = space.materialize(100);
  CHECK(all.size() == 12);
  CHECK(std::set<AbstractConfig>(all.begin(), all.end()).size() == 12);
  CHECK(all.front() == AbstractConfig{{0, 1}, {0, 1}});
  CHECK(all[1] == AbstractConfig{{0, 1}, {0, 2}});
  CHECK(all.back() == AbstractConfig{{1, 1}, {2, 3}});
  for (const auto& c : all) CHECK(space.contains(c));
  CHECK_FALSE(space.contains(AbstractConfig{{0, 0}, {0, 1}}));
  CHECK_THROWS_AS(space.materialize(5), DomainError);

  int visited = 0;
  space.for_each([&](const AbstractConfig&) { return ++visited < 3; });
  CHECK(visited == 3);
}

TEST_CASE("cover_set") {
  Rng rng(2);
  const auto w = test::random_stochastic(3, rng);

  SUBCASE("single grid point") {
    const AbstractGrid g = make_grid(w, 2, 3);
    ConfigBox box{{{0.25, 0.25}, {0.75, 0.75}, {0.25, 0.25}}, {{1.0 / 3, 1.0 / 3}, {0, 0}, {1, 1}}};
    // Exact grid points sit inside one cell only (cells are closed, so
    // 1/3 touches no neighbouring cell boundary).
    const SearchSpace cover = cover_set(box, g);
    CHECK(cover.size() == 1);
    CHECK(cover.contains(AbstractConfig{{0, 1, 0}, {1, 0, 3}}));
  }
  SUBCASE("full opinion range") {
    const AbstractGrid g = make_grid(w, 2, 3);
    ConfigBox box{{{0, 1}, {0, 1}, {0, 1}}, {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}};
    const SearchSpace cover = cover_set(box, g);
    CHECK(cover.init_combinations() == 8);
    // 0.5 is the shared boundary of the cells of 1/3 and 2/3.
    CHECK(cover.lambda_options(0) == std::vector<int>{1, 2});
  }
  SUBCASE("stubbornness radius 0.5 around a level") {
    const AbstractGrid g = make_grid(w, 2, 3);
    for (int star = 0; star <= 3; ++star) {
      const double center = star / 3.0;
      ConfigBox box{{{0, 1}, {0, 1}, {0, 1}},
                    {{center - 0.5, center + 0.5}, {center - 0.5, center + 0.5}, {center - 0.5, center + 0.5}}};
      const SearchSpace cover = cover_set(box, g);
      for (int k = 0; k <= 3; ++k) {
        // Interval-intersection oracle on the exact values of the double bounds.
        const Rational lo = rational_exact_binary(std::max(center - 0.5, 0.0));
        const Rational hi = rational_exact_binary(std::min(center + 0.5, 1.0));
        const Rational cell_lo(2 * k - 1, 6), cell_hi(2 * k + 1, 6);
        const bool expected = cell_lo <= hi && cell_hi >= lo;
        const auto& opts = cover.lambda_options(0);
        CHECK((std::find(opts.begin(), opts.end(), k) != opts.end()) == expected);
        if (expected) CHECK(std::abs(k / 3.0 - center) <= 0.5 + 1.0 / 6.0 + 1e-12);
      }
    }
  }
  SUBCASE("empty box") {
    const AbstractGrid g = make_grid(w, 2, 3);
    ConfigBox box{{{0.6, 0.4}, {0, 1}, {0, 1}}, {{0, 1}, {0, 1}, {0, 1}}};
    CHECK_THROWS_AS(cover_set(box, g), DomainError);
  }
}

TEST_CASE("cover_set contains the snap image of every sampled point") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(6));
    const auto w = test::random_stochastic(n, rng);
    const AbstractGrid g = make_grid(w, 1 + static_cast<int>(rng.below(7)), 1 + static_cast<int>(rng.below(7)));
    ConfigBox box;
    for (Index i = 0; i < n; ++i) {
      const double a = rng.uniform01(), b = rng.uniform01();
      const double c = rng.uniform01(), d = rng.uniform01();
      box.init.push_back({std::min(a, b), std::max(a, b)});
      box.lambda.push_back({std::min(c, d), std::max(c, d)});
    }
    const SearchSpace cover = cover_set(box, g);
    for (int s = 0; s < 50; ++s) {
      const auto config = sample_from_box(box, w, rng);
      CHECK(box.contains(config));
      CHECK(cover.contains(snap(config, g)));
    }
  }
}

TEST_CASE("box_evidence on a stubborn, polarized box") {
  Rng rng(6);
  const auto w = test::sbm_influence(10, 3);
  const AbstractGrid g = make_grid(w, 50, 50);
  ConfigBox box;
  for (int i = 0; i < 10; ++i) {
    // Opinions move at most 0.02 per step, so nobody enters the band
    // |x - 1/2| <= sqrt(0.2) around the threshold.
    box.init.push_back(i % 2 == 0 ? Interval{0.0, 0.02} : Interval{0.98, 1.0});
    box.lambda.push_back({0.98, 1.0});
  }
  const BoxEvidence ev = box_evidence(box, g, w, 0.1, 9, 0.5, 100, 1);
  CHECK(ev.samples == 100);
  CHECK(ev.rho_max <= 0.02 * ev.w_norm + 1e-12);
  CHECK(ev.all_assumption2);
  CHECK(ev.holds());
}
