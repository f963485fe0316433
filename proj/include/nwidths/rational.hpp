#pragma once

// Exact rational arithmetic and the extended exponent type [1, inf].

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cctype>
#include <compare>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "nwidths/error.hpp"

namespace nwidths {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline std::string to_string(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

inline BigInt pow10(long e) {
  BigInt r = 1;
  for (long k = 0; k < e; ++k) r *= 10;
  return r;
}

// [sign] digits [. digits] [e [sign] digits], converted without rounding.
inline std::optional<Rational> parse_decimal(std::string_view s) {
  bool neg = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view es = s.substr(e + 1);
    s = s.substr(0, e);
    bool eneg = false;
    if (!es.empty() && (es.front() == '+' || es.front() == '-')) {
      eneg = es.front() == '-';
      es.remove_prefix(1);
    }
    if (!all_digits(es) || es.size() > 6) return std::nullopt;
    exponent = std::stol(std::string(es));
    if (eneg) exponent = -exponent;
  }
  std::string_view ip = s, fp;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    ip = s.substr(0, dot);
    fp = s.substr(dot + 1);
  }
  if (ip.empty() && fp.empty()) return std::nullopt;
  if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp))) return std::nullopt;
  // Leading zeros would make the BigInt constructor read octal.
  std::string digits = std::string(ip) + std::string(fp);
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
  BigInt mant(digits);
  exponent -= static_cast<long>(fp.size());
  Rational r = exponent >= 0 ? Rational(mant * pow10(exponent)) : Rational(mant, pow10(-exponent));
  return neg ? Rational(-r) : r;
}

}  // namespace detail

/// Parses "a/b", integers and decimal strings ("0.3", "-1.25e2") exactly.
inline Rational parse_rational(std::string_view text) {
  const std::string_view s = detail::trim(text);
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = detail::parse_decimal(detail::trim(s.substr(0, slash)));
    auto den = detail::parse_decimal(detail::trim(s.substr(slash + 1)));
    if (!num || !den) throw Error(ErrorCode::ParseError, "malformed rational '" + std::string(text) + "'");
    if (*den == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + std::string(text) + "'");
    return *num / *den;
  }
  auto v = detail::parse_decimal(s);
  if (!v) throw Error(ErrorCode::ParseError, "malformed rational '" + std::string(text) + "'");
  return *v;
}

/// A rational number or +infinity. Used for the Lebesgue exponents p, q.
class ExtReal {
 public:
  ExtReal() = default;
  ExtReal(Rational v) : value_(std::move(v)) {}  // NOLINT(google-explicit-constructor)
  ExtReal(long v) : value_(Rational(v)) {}       // NOLINT(google-explicit-constructor)

  static ExtReal infinity() {
    ExtReal r;
    r.value_.reset();
    return r;
  }

  bool is_inf() const { return !value_.has_value(); }

  const Rational& value() const {
    if (!value_) throw Error(ErrorCode::InvalidParams, "value() called on infinity");
    return *value_;
  }

  /// 1/p with 1/inf = 0.
  Rational reciprocal() const { return value_ ? Rational(1 / *value_) : Rational(0); }

  /// Hoelder conjugate p' on [1, inf]: p/(p-1), with 1' = inf and inf' = 1.
  ExtReal conjugate() const {
    if (!value_) return ExtReal(1);
    if (*value_ == 1) return infinity();
    return ExtReal(*value_ / (*value_ - 1));
  }

  double to_double() const {
    return value_ ? nwidths::to_double(*value_) : std::numeric_limits<double>::infinity();
  }

  friend bool operator==(const ExtReal& a, const ExtReal& b) {
    if (a.is_inf() || b.is_inf()) return a.is_inf() == b.is_inf();
    return *a.value_ == *b.value_;
  }

  friend std::strong_ordering operator<=>(const ExtReal& a, const ExtReal& b) {
    if (a.is_inf() && b.is_inf()) return std::strong_ordering::equal;
    if (a.is_inf()) return std::strong_ordering::greater;
    if (b.is_inf()) return std::strong_ordering::less;
    if (*a.value_ < *b.value_) return std::strong_ordering::less;
    if (*b.value_ < *a.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  std::optional<Rational> value_ = Rational(0);
};

inline std::string to_string(const ExtReal& x) { return x.is_inf() ? "inf" : to_string(x.value()); }

inline std::ostream& operator<<(std::ostream& os, const ExtReal& x) { return os << to_string(x); }

/// Accepts everything parse_rational does plus "inf" / "infinity".
inline ExtReal parse_ext_real(std::string_view text) {
  std::string s(detail::trim(text));
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "inf" || s == "+inf" || s == "infinity" || s == "\xe2\x88\x9e") return ExtReal::infinity();
  return ExtReal(parse_rational(s));
}

inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace nwidths
