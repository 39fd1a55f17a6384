#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

#include "conbi/error.hpp"

namespace conbi {

/// Exact rational number (GMP backed).
using Rational = boost::multiprecision::mpq_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Exact conversion: every finite double is a dyadic rational.
inline Rational exact_rational(double v) { return Rational(v); }

inline std::string to_string(const Rational& r) { return r.str(); }

namespace detail {

inline boost::multiprecision::mpz_int parse_integer(std::string_view digits, std::string_view whole) {
  if (digits.empty()) throw InputError("malformed number: '" + std::string(whole) + "'");
  for (char ch : digits) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) {
      throw InputError("malformed number: '" + std::string(whole) + "'");
    }
  }
  // A leading zero would select octal parsing.
  while (digits.size() > 1 && digits.front() == '0') digits.remove_prefix(1);
  return boost::multiprecision::mpz_int(std::string(digits));
}

inline Rational parse_decimal(std::string_view text, std::string_view whole) {
  using boost::multiprecision::mpz_int;
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = text.substr(e + 1);
    bool exp_negative = false;
    if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
      exp_negative = exp_text.front() == '-';
      exp_text.remove_prefix(1);
    }
    exponent = parse_integer(exp_text, whole).convert_to<long>();
    if (exp_negative) exponent = -exponent;
    text = text.substr(0, e);
  }
  std::string digits;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = text.substr(dot + 1);
    if (int_part.empty() && frac_part.empty()) throw InputError("malformed number: '" + std::string(whole) + "'");
    digits = std::string(int_part) + std::string(frac_part);
    exponent -= static_cast<long>(frac_part.size());
  } else {
    digits = std::string(text);
  }
  mpz_int mantissa = parse_integer(digits, whole);
  if (negative) mantissa = -mantissa;
  if (exponent > 4000 || exponent < -4000) throw InputError("exponent out of range in '" + std::string(whole) + "'");
  mpz_int scale = 1;
  for (long i = 0; i < (exponent < 0 ? -exponent : exponent); ++i) scale *= 10;
  return exponent < 0 ? Rational(mantissa, scale) : Rational(mantissa * scale);
}

}  // namespace detail

/// Parses "p/q", an integer, or a decimal string ("0.125", "-2.5e-3") exactly.
inline Rational parse_rational(std::string_view text) {
  const std::string_view whole = text;
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw InputError("empty number");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = detail::parse_decimal(text.substr(0, slash), whole);
    Rational den = detail::parse_decimal(text.substr(slash + 1), whole);
    if (den == 0) throw InputError("zero denominator in '" + std::string(whole) + "'");
    return num / den;
  }
  return detail::parse_decimal(text, whole);
}

}  // namespace conbi
