#pragma once
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "defectscope/errors.hpp"

namespace defectscope {

// Exact rational arithmetic for the predictor's tie detection.  Values stay
// tiny (defect strengths, angle fractions, sums of squares of those), so a
// normalized int64 pair with __int128 intermediates is plenty.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n) : num(n), den(1) {}
  Rational(long long n, long long d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) fail(errc::validation, "rational with zero denominator");
    if (den < 0) { num = -num; den = -den; }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }

  static Rational from_i128(__int128 n, __int128 d) {
    if (d == 0) fail(errc::validation, "rational with zero denominator");
    if (d < 0) { n = -n; d = -d; }
    __int128 a = n < 0 ? -n : n;
    __int128 b = d;
    while (b) { __int128 t = a % b; a = b; b = t; }
    if (a > 1) { n /= a; d /= a; }
    constexpr __int128 lim = 0x7fffffffffffffffLL;
    if (n > lim || n < -lim || d > lim)
      fail(errc::validation, "rational overflow");
    Rational r;
    r.num = static_cast<long long>(n);
    r.den = static_cast<long long>(d);
    return r;
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  bool is_integer() const { return den == 1; }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_i128((__int128)a.num * b.den + (__int128)b.num * a.den, (__int128)a.den * b.den);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return from_i128((__int128)a.num * b.den - (__int128)b.num * a.den, (__int128)a.den * b.den);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_i128((__int128)a.num * b.num, (__int128)a.den * b.den);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num == 0) fail(errc::validation, "rational division by zero");
    return from_i128((__int128)a.num * b.den, (__int128)a.den * b.num);
  }
  Rational operator-() const { Rational r; r.num = -num; r.den = den; return r; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return (__int128)a.num * b.den < (__int128)b.num * a.den;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }
};

inline Rational abs(const Rational& a) { return a.num < 0 ? -a : a; }

inline Rational sqr(const Rational& a) { return a * a; }

// Exact conversion: every finite double is p * 2^e.  Rejects values whose
// exact form does not fit in int64 (huge exponents), which never happens for
// the sane inputs this is used on (quarters, thirds entered as fractions...).
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) fail(errc::validation, "non-finite number where a rational is required");
  if (x == 0.0) return Rational(0);
  int e = 0;
  double m = std::frexp(x, &e);  // x = m * 2^e, |m| in [0.5, 1)
  long long mi = static_cast<long long>(std::ldexp(m, 53));
  e -= 53;
  __int128 n = mi, d = 1;
  while (e > 0) { n <<= 1; --e; if (n > (__int128)1 << 100) fail(errc::validation, "double too large for exact rational"); }
  while (e < 0) { d <<= 1; ++e; if (d > (__int128)1 << 100) { // reduce early: strip common factors of 2
      while ((n & 1) == 0 && d > 1) { n >>= 1; d >>= 1; }
      if (d > (__int128)1 << 100) fail(errc::validation, "double too fine for exact rational");
    } }
  return Rational::from_i128(n, d);
}

// Accepts "p/q", plain integers, and decimal literals.
inline Rational rational_from_string(const std::string& s) {
  size_t slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      long long p = std::stoll(s.substr(0, slash));
      long long q = std::stoll(s.substr(slash + 1));
      return Rational(p, q);
    }
    size_t dot = s.find('.');
    if (dot == std::string::npos) return Rational(std::stoll(s));
    std::string frac = s.substr(dot + 1);
    if (frac.size() > 12) fail(errc::validation, "decimal too fine for exact rational: " + s);
    long long den = 1;
    for (size_t i = 0; i < frac.size(); ++i) den *= 10;
    long long whole = dot == 0 ? 0 : std::stoll(s.substr(0, dot));
    bool neg = !s.empty() && s[0] == '-';
    long long fr = frac.empty() ? 0 : std::stoll(frac);
    __int128 n = (__int128)(whole < 0 ? -whole : whole) * den + fr;
    if (neg) n = -n;
    return Rational::from_i128(n, den);
  } catch (const std::invalid_argument&) {
    fail(errc::validation, "cannot parse rational: " + s);
  } catch (const std::out_of_range&) {
    fail(errc::validation, "rational out of range: " + s);
  }
}

}  // namespace defectscope
