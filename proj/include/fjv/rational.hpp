#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

namespace fjv {

/// Exact rational scalar. Expression templates are disabled so the type
/// behaves like a plain value inside Eigen expressions.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rational with the same value as the shortest decimal string that
/// round-trips `value` ("0.3" -> 3/10). Used wherever a user-facing double
/// (probabilities, tolerances, bounds) has to enter exact arithmetic.
Rational rational_from_double(double value);

/// Exact binary value of `value` (0.1 -> 3602879701896397/36028797018963968).
Rational rational_exact_binary(double value);

/// Accepts "p", "p/q", and decimal forms such as "-0.125" or "1e-3".
Rational parse_rational(std::string_view text);

/// "p/q", or "p" when the denominator is one.
std::string to_string(const Rational& q);

double to_double(const Rational& q);

BigInt floor(const Rational& q);
BigInt ceil(const Rational& q);

/// floor(q) clamped into the int64 range.
std::int64_t floor_to_int64(const Rational& q);

}  // namespace fjv
