#include "doctest.h"

#include <array>

#include "fjv/fj.hpp"
#include "test_support.hpp"

using namespace fjv;

namespace {

Matrix<double> mat2(double a, double b, double c, double d) {
  Matrix<double> m(2, 2);
  m << a, b, c, d;
  return m;
}

Vector<double> vec(std::initializer_list<double> xs) {
  Vector<double> v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

BinaryOutput bits(std::initializer_list<int> xs) {
  BinaryOutput y(static_cast<Index>(xs.size()));
  Index i = 0;
  for (int x : xs) y(i++) = static_cast<std::uint8_t>(x);
  return y;
}

// Independent route: explicit loops for x+ = (1-l) sum_j w_ij x_j + l z.
Vector<double> loop_step(const Vector<double>& x, const Vector<double>& z, const Vector<double>& lam,
                         const Matrix<double>& w) {
  Vector<double> out(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    double mix = 0.0;
    for (Index j = 0; j < x.size(); ++j) mix += w(i, j) * x(j);
    out(i) = (1.0 - lam(i)) * mix + lam(i) * z(i);
  }
  return out;
}

double svd_norm(const Matrix<double>& m) {
  Eigen::JacobiSVD<Matrix<double>> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

TEST_CASE("types reject out-of-domain input") {
  CHECK_THROWS_AS(StubbornnessVector<double>(vec({0.5, 1.2})), DomainError);
  CHECK_THROWS_AS(InfluenceMatrix<double>(mat2(0.5, 0.4, 0.5, 0.5)), DomainError);
  CHECK_THROWS_AS(InfluenceMatrix<double>(mat2(1.5, -0.5, 0.5, 0.5)), DomainError);
  CHECK_NOTHROW(InfluenceMatrix<double>(mat2(0.5, 0.5 + 5e-13, 0.5, 0.5)));
  Matrix<Rational> exact(1, 1);
  exact(0, 0) = Rational(1);
  CHECK_NOTHROW(InfluenceMatrix<Rational>(exact));
}

TEST_CASE("fj_step") {
  const InfluenceMatrix<double> half(mat2(0.5, 0.5, 0.5, 0.5));
  const AugmentedState<double> s{vec({0.0, 1.0}), vec({0.0, 1.0})};

  SUBCASE("full stubbornness freezes the state") {
    const auto next = fj_step(s, StubbornnessVector<double>(vec({1.0, 1.0})), half);
    CHECK(next == s);
  }
  SUBCASE("identity weights with zero stubbornness") {
    const InfluenceMatrix<double> id(Matrix<double>::Identity(2, 2));
    const auto next = fj_step(s, StubbornnessVector<double>(vec({0.0, 0.0})), id);
    CHECK(next == s);
  }
  SUBCASE("averaging pair") {
    const Vector<double> lam = vec({0.0, 0.0});
    const auto next = fj_step(s, StubbornnessVector<double>(lam), half);
    const Vector<double> oracle = loop_step(s.current, s.anchor, lam, half.matrix());
    CHECK(next.current(0) == doctest::Approx(0.5));
    CHECK(next.current(1) == doctest::Approx(0.5));
    CHECK((next.current - oracle).cwiseAbs().maxCoeff() == 0.0);
    CHECK(next.anchor == s.anchor);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(fj_step(s, StubbornnessVector<double>(vec({0.0})), half), DimensionError);
  }
}

TEST_CASE("quantize") {
  CHECK(quantize(vec({0.5, 0.49999}), 0.5) == bits({1, 0}));
  CHECK(quantize(vec({0.0, 0.0, 0.0}), 0.5) == bits({0, 0, 0}));
  CHECK(quantize(vec({0.25, 0.75}), 0.5) == bits({0, 1}));
  Vector<Rational> exact(1);
  exact(0) = Rational(1, 2);
  CHECK(quantize(exact, Rational(1, 2))(0) == 1);
  CHECK_THROWS_AS(quantize(vec({0.1}), 1.0), DomainError);
  CHECK_THROWS_AS(quantize(vec({0.1}), 0.0), DomainError);
}

TEST_CASE("hamming") {
  CHECK(hamming(bits({1, 0, 1}), bits({1, 0, 1})) == 0);
  CHECK(hamming(bits({0, 0, 0, 0}), bits({1, 1, 1, 1})) == 1);
  CHECK(hamming(bits({1, 0, 1, 0}), bits({1, 1, 1, 1})) == Rational(1, 2));
  CHECK_THROWS_AS(hamming(bits({1}), bits({1, 0})), DimensionError);
}

TEST_CASE("hamming is a metric on {0,1}^n for n <= 4 (exhaustive)") {
  for (int n = 1; n <= 4; ++n) {
    const int count = 1 << n;
    auto make = [n](int code) {
      BinaryOutput y(n);
      for (int i = 0; i < n; ++i) y(i) = static_cast<std::uint8_t>((code >> i) & 1);
      return y;
    };
    for (int a = 0; a < count; ++a) {
      for (int b = 0; b < count; ++b) {
        const Rational ab = hamming(make(a), make(b));
        CHECK(ab == hamming(make(b), make(a)));
        CHECK((ab == 0) == (a == b));
        for (int c = 0; c < count; ++c) {
          CHECK(ab <= hamming(make(a), make(c)) + hamming(make(c), make(b)));
        }
      }
    }
  }
}

TEST_CASE("simulate") {
  const InfluenceMatrix<double> half(mat2(0.5, 0.5, 0.5, 0.5));

  SUBCASE("full stubbornness gives a constant path") {
    Rng rng(7);
    const auto w = test::random_stochastic(5, rng);
    const Vector<double> x0 = test::random_unit_vector(5, rng);
    const auto traj = simulate(x0, StubbornnessVector<double>(Vector<double>::Ones(5)), w, 5, 0.5);
    REQUIRE(traj.states.size() == 6);
    for (const auto& s : traj.states) CHECK(s.current == x0);
  }
  SUBCASE("averaging pair, one step") {
    const auto traj = simulate(vec({0.0, 1.0}), StubbornnessVector<double>(vec({0.0, 0.0})), half, 1, 0.5);
    CHECK(traj.horizon() == 1);
    CHECK(traj.states[1].current(0) == doctest::Approx(0.5));
    CHECK(traj.outputs[1] == bits({1, 1}));
    CHECK(traj.outputs[0] == bits({0, 1}));
  }
  SUBCASE("errors") {
    const StubbornnessVector<double> lam(vec({0.0, 0.0}));
    CHECK_THROWS_AS(simulate(vec({0.0, 1.0}), lam, half, 1, 1.5), DomainError);
    CHECK_THROWS_AS(simulate(vec({0.0}), lam, half, 1, 0.5), DimensionError);
    CHECK_THROWS_AS(simulate(vec({0.0, 1.0}), lam, half, -1, 0.5), DomainError);
  }
}

TEST_CASE("trajectory properties on random instances") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(12));
    const auto w = test::random_stochastic(n, rng);
    const StubbornnessVector<double> lam(test::random_unit_vector(n, rng));
    const Vector<double> x0 = test::random_unit_vector(n, rng);
    const int horizon = static_cast<int>(rng.below(20));
    const auto traj = simulate(x0, lam, w, horizon, 0.5);
    const auto block = simulate_block(x0, lam, w, horizon, 0.5);
    REQUIRE(traj.states.size() == traj.outputs.size());
    REQUIRE(traj.horizon() == horizon);
    Vector<double> x = x0;
    for (int t = 0; t <= horizon; ++t) {
      const auto& s = traj.states[static_cast<std::size_t>(t)];
      CHECK(s.anchor == x0);
      CHECK(s.current.minCoeff() >= -1e-12);
      CHECK(s.current.maxCoeff() <= 1.0 + 1e-12);
      CHECK(traj.outputs[static_cast<std::size_t>(t)] == quantize(s.current, 0.5));
      CHECK((block.states[static_cast<std::size_t>(t)].current - s.current).cwiseAbs().maxCoeff() <= 1e-14);
      CHECK((s.current - x).cwiseAbs().maxCoeff() <= 1e-14);
      x = loop_step(x, x0, lam.values(), w.matrix());
    }
    const auto again = simulate(x0, lam, w, horizon, 0.5);
    CHECK(again.outputs == traj.outputs);
  }
}

TEST_CASE("exact and floating simulation agree away from the threshold") {
  Matrix<Rational> w(2, 2);
  w << Rational(5, 8), Rational(3, 8), Rational(1, 2), Rational(1, 2);
  Vector<Rational> lam(2), x0(2);
  lam << Rational(1, 3), Rational(0);
  x0 << Rational(1, 4), Rational(3, 4);
  const auto exact = simulate(x0, StubbornnessVector<Rational>(lam), InfluenceMatrix<Rational>(w), 6,
                              Rational(1, 2));
  const auto approx = simulate(to_double(x0), to_double(StubbornnessVector<Rational>(lam)),
                               to_double(InfluenceMatrix<Rational>(w)), 6, 0.5);
  for (std::size_t t = 0; t < exact.states.size(); ++t) {
    CHECK((to_double(exact.states[t].current) - approx.states[t].current).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("spectral_norm") {
  CHECK(spectral_norm(Matrix<double>::Identity(3, 3)) == 1.0);
  CHECK(spectral_norm(Matrix<double>::Zero(3, 3)) == 0.0);
  CHECK(spectral_norm(mat2(0.1, 0.0, 0.0, -0.4)) == 0.4);
  CHECK_THROWS_AS(spectral_norm(mat2(std::nan(""), 0, 0, 1)), DomainError);

  SUBCASE("start vector in the kernel") {
    // All-ones lies in the kernel of this matrix.
    const Matrix<double> m = mat2(1.0, -1.0, 2.0, -2.0);
    CHECK(spectral_norm(m) == doctest::Approx(svd_norm(m)).epsilon(1e-12));
  }
  SUBCASE("agrees with SVD on random matrices") {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
      const Index rows = 1 + static_cast<Index>(rng.below(30));
      const Index cols = 1 + static_cast<Index>(rng.below(30));
      Matrix<double> m(rows, cols);
      for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
      CHECK(std::abs(spectral_norm(m) - svd_norm(m)) <= 1e-10);
    }
  }
  SUBCASE("iteration cap") {
    PowerIterationOptions tight;
    tight.max_iterations = 1;
    Rng rng(5);
    Matrix<double> m(6, 6);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
    CHECK_THROWS_AS(spectral_norm(m, tight), NotConvergedError);
  }
}

TEST_CASE("contraction_factor") {
  const InfluenceMatrix<double> half(mat2(0.5, 0.5, 0.5, 0.5));
  CHECK(contraction_factor(StubbornnessVector<double>(vec({1.0, 1.0})), half) == 0.0);
  CHECK(contraction_factor(StubbornnessVector<double>(vec({0.0, 0.0})), half) ==
        doctest::Approx(1.0).epsilon(1e-10));
  // (I - Lambda) W = 0.25 * ones(2,2) has singular values {0.5, 0}.
  const double rho = contraction_factor(StubbornnessVector<double>(vec({0.5, 0.5})), half);
  CHECK(std::abs(rho - 0.5) <= 1e-10);
  CHECK(std::abs(rho - svd_norm(0.5 * half.matrix())) <= 1e-10);

  // Symmetric stochastic circulant.
  Matrix<double> circ = Matrix<double>::Zero(6, 6);
  for (Index i = 0; i < 6; ++i) {
    circ(i, (i + 1) % 6) = 0.3;
    circ(i, (i + 5) % 6) = 0.3;
    circ(i, i) = 0.4;
  }
  CHECK(contraction_factor(StubbornnessVector<double>(Vector<double>::Zero(6)),
                           InfluenceMatrix<double>(circ)) == doctest::Approx(1.0).epsilon(1e-10));
}
