#include "doctest.h"

#include "fjv/random.hpp"
#include "fjv/rational.hpp"

using namespace fjv;

TEST_CASE("rational_from_double uses the shortest decimal") {
  CHECK(rational_from_double(0.3) == Rational(3, 10));
  CHECK(rational_from_double(0.05) == Rational(1, 20));
  CHECK(rational_from_double(-0.125) == Rational(-1, 8));
  CHECK(rational_from_double(0.0) == 0);
  CHECK(rational_from_double(1e-3) == Rational(1, 1000));
  CHECK(rational_from_double(2.5e10) == Rational(25000000000LL));
  // Leading zeros in the digit string must not be read as octal.
  CHECK(rational_from_double(0.09) == Rational(9, 100));
  CHECK(rational_from_double(0.007) == Rational(7, 1000));
  CHECK(parse_rational("0.0010638297882978725") ==
        Rational(BigInt("10638297882978725"), BigInt("10000000000000000000")));
  CHECK_THROWS_AS(rational_from_double(std::numeric_limits<double>::infinity()), ParseError);
}

TEST_CASE("rational_from_double round-trips through double") {
  Rng rng(3);
  for (int i = 0; i < 5000; ++i) {
    const double x = rng.uniform(-2.0, 2.0) * (rng.bernoulli(0.3) ? 1e-6 : 1.0);
    CHECK(to_double(rational_from_double(x)) == x);
    CHECK(to_double(rational_exact_binary(x)) == x);
  }
}

TEST_CASE("rational_exact_binary") {
  CHECK(rational_exact_binary(0.5) == Rational(1, 2));
  CHECK(rational_exact_binary(0.1) ==
        Rational(BigInt("3602879701896397"), BigInt("36028797018963968")));
  CHECK(rational_exact_binary(0.1) != Rational(1, 10));
}

TEST_CASE("parse_rational and to_string") {
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational(" -6/8 ") == Rational(-3, 4));
  CHECK(parse_rational("7") == 7);
  CHECK(parse_rational("0.25") == Rational(1, 4));
  CHECK(parse_rational("1e-3") == Rational(1, 1000));
  CHECK(parse_rational("1.5/3") == Rational(1, 2));
  CHECK(parse_rational("007") == 7);
  CHECK(parse_rational("2.5e+10") == Rational(25000000000LL));
  CHECK_THROWS_AS(parse_rational(""), ParseError);
  CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
  CHECK_THROWS_AS(parse_rational("abc"), ParseError);
  CHECK_THROWS_AS(parse_rational("1.2.3"), ParseError);
  CHECK(to_string(Rational(3, 4)) == "3/4");
  CHECK(to_string(Rational(-6, 3)) == "-2");
  for (long long p = -20; p <= 20; ++p) {
    for (long long q = 1; q <= 9; ++q) {
      const Rational r(p, q);
      CHECK(parse_rational(to_string(r)) == r);
    }
  }
}

TEST_CASE("floor and ceil") {
  CHECK(floor(Rational(7, 2)) == 3);
  CHECK(ceil(Rational(7, 2)) == 4);
  CHECK(floor(Rational(-7, 2)) == -4);
  CHECK(ceil(Rational(-7, 2)) == -3);
  CHECK(floor(Rational(4)) == 4);
  CHECK(ceil(Rational(-4)) == -4);
  CHECK(floor_to_int64(Rational(BigInt("100000000000000000000000"))) ==
        std::numeric_limits<std::int64_t>::max());
}
