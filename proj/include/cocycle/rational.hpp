#pragma once

// Exact rational arithmetic for measures and interval endpoints.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cocycle {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  return Rational(num, den);
}

/// Exact value of a finite double (every finite double is a dyadic rational).
inline Rational exact(double x) {
  if (!std::isfinite(x)) throw std::domain_error("exact(): non-finite value");
  if (x == 0.0) return Rational(0);
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);
  // mantissa * 2^53 is an integer for IEEE doubles.
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  exponent -= 53;
  BigInt num = scaled;
  BigInt den = 1;
  if (exponent >= 0) {
    num <<= exponent;
  } else {
    den <<= -exponent;
  }
  return Rational(num, den);
}

inline std::string to_fraction_string(const Rational& r) {
  std::ostringstream os;
  os << boost::multiprecision::numerator(r) << '/' << boost::multiprecision::denominator(r);
  return os.str();
}

/// Parses "p/q", an integer, or a decimal literal (decimals are read exactly as written).
inline Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      BigInt num(text.substr(0, slash));
      BigInt den(text.substr(slash + 1));
      return make_rational(num, den);
    }
    const auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(BigInt(text));
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    const auto frac_len = text.size() - dot - 1;
    BigInt den = 1;
    for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
    if (digits.empty() || digits == "-") digits += "0";
    return Rational(BigInt(digits), den);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("cannot parse rational '" + text + "'");
  }
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Measure of a set of `count` points in a uniform space of `size` points.
inline Rational count_measure(std::uint64_t count, std::uint64_t size) {
  return make_rational(BigInt(count), BigInt(size));
}

inline std::uint64_t to_u64(const BigInt& v, const char* what) {
  if (v < 0 || v > std::numeric_limits<std::uint64_t>::max()) {
    throw std::overflow_error(std::string(what) + " does not fit in 64 bits");
  }
  return v.convert_to<std::uint64_t>();
}

}  // namespace cocycle
