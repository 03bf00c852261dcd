#pragma once

/// Exact rational arithmetic used on every solver path.
///
/// Values are GMP rationals (always canonical: lowest terms, positive
/// denominator). Parsing accepts integers, "p/q" fractions and plain
/// decimals ("0.25", "-1.5"), all converted exactly.

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>

#include "pandora/error.hpp"

namespace pandora {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

inline Rational make_rational(const Integer& num, const Integer& den) { return Rational(num) / Rational(den); }

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

/// Base-10 digits to Integer; leading zeros would otherwise select octal.
inline Integer decimal_integer(std::string_view digits) {
  auto first = digits.find_first_not_of('0');
  return first == std::string_view::npos ? Integer(0) : Integer{std::string(digits.substr(first))};
}

}  // namespace detail

inline Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  auto fail = [&]() -> Rational {
    throw ParseError("malformed rational '" + std::string(text) + "'");
  };
  if (s.empty()) return fail();

  bool negative = false;
  if (s.front() == '-' || s.front() == '+') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }

  Rational result;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = s.substr(0, slash);
    auto den = s.substr(slash + 1);
    if (!detail::all_digits(num) || !detail::all_digits(den)) return fail();
    Integer d = detail::decimal_integer(den);
    if (d == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
    result = make_rational(detail::decimal_integer(num), d);
  } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
    auto whole = s.substr(0, dot);
    auto frac = s.substr(dot + 1);
    if (whole.empty() && frac.empty()) return fail();
    if ((!whole.empty() && !detail::all_digits(whole)) || (!frac.empty() && !detail::all_digits(frac)))
      return fail();
    Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(frac.size()));
    Integer digits = detail::decimal_integer(std::string(whole) + std::string(frac));
    result = make_rational(digits, scale);
  } else {
    if (!detail::all_digits(s)) return fail();
    result = Rational(detail::decimal_integer(s));
  }
  return negative ? Rational(-result) : result;
}

/// Canonical "p/q" form, or "p" when the denominator is 1.
inline std::string to_string(const Rational& r) {
  auto num = boost::multiprecision::numerator(r);
  auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Rational floor_to_multiple(const Rational& value, const Rational& step) {
  Rational q = value / step;
  Integer fl = boost::multiprecision::numerator(q) / boost::multiprecision::denominator(q);
  if (q < 0 && Rational(fl) != q) fl -= 1;
  return Rational(fl) * step;
}

}  // namespace pandora
