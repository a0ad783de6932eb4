#include "fjv/rational.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <system_error>

namespace fjv {

namespace {

BigInt pow10(int exponent) {
  BigInt result = 1;
  for (int i = 0; i < exponent; ++i) result *= 10;
  return result;
}

// Decimal literal with optional sign, fraction and exponent.
Rational parse_decimal(std::string_view text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
    negative = text[pos] == '-';
    ++pos;
  }
  std::string digits;
  int fraction_digits = 0;
  bool seen_point = false;
  bool any_digit = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      any_digit = true;
      if (seen_point) ++fraction_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw ParseError("not a number: '" + std::string(text) + "'");
  int exponent = 0;
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    if (pos < text.size() && text[pos] == '+') ++pos;  // from_chars rejects '+'
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), exponent);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ParseError("bad exponent in '" + std::string(text) + "'");
    }
    pos = text.size();
  }
  if (pos != text.size()) throw ParseError("trailing characters in '" + std::string(text) + "'");

  // A leading 0 would make GMP read the digits as octal.
  const auto first = digits.find_first_not_of('0');
  digits = first == std::string::npos ? "0" : digits.substr(first);
  BigInt numerator(digits);
  int scale = exponent - fraction_digits;
  Rational q = scale >= 0 ? Rational(numerator * pow10(scale))
                          : Rational(numerator, pow10(-scale));
  return negative ? Rational(-q) : q;
}

}  // namespace

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw ParseError("non-finite value cannot be made rational");
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) throw ParseError("to_chars failed");
  return parse_decimal(std::string_view(buffer, static_cast<std::size_t>(ptr - buffer)));
}

Rational rational_exact_binary(double value) {
  if (!std::isfinite(value)) throw ParseError("non-finite value cannot be made rational");
  return Rational(value);
}

Rational parse_rational(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (text.empty()) throw ParseError("empty rational");
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  const Rational num = parse_decimal(text.substr(0, slash));
  const Rational den = parse_decimal(text.substr(slash + 1));
  if (den == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
  return num / den;
}

std::string to_string(const Rational& q) {
  const BigInt num = numerator(q);
  const BigInt den = denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

BigInt floor(const Rational& q) {
  const BigInt num = numerator(q);
  const BigInt den = denominator(q);
  BigInt quotient = num / den;  // truncates toward zero
  if (num < 0 && quotient * den != num) quotient -= 1;
  return quotient;
}

BigInt ceil(const Rational& q) {
  const BigInt f = floor(q);
  return Rational(f) == q ? f : BigInt(f + 1);
}

std::int64_t floor_to_int64(const Rational& q) {
  const BigInt f = floor(q);
  if (f > std::numeric_limits<std::int64_t>::max()) return std::numeric_limits<std::int64_t>::max();
  if (f < std::numeric_limits<std::int64_t>::min()) return std::numeric_limits<std::int64_t>::min();
  return f.convert_to<std::int64_t>();
}

}  // namespace fjv
