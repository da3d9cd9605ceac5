#pragma once

#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>

#include "mixlab/errors.hpp"

namespace mixlab {

/// Exact rational number with 64-bit numerator and denominator.
///
/// Intermediate products are formed in 128 bits and reduced; a result that
/// does not fit back into 64 bits throws ExactOverflow instead of wrapping.
/// The denominator is always positive and gcd(num, den) == 1.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(implicit)
  Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

  /// Parses "p", "p/q", or a finite decimal such as "-0.25".
  static Rational parse(std::string_view text);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }

  explicit operator double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  double to_double() const noexcept { return static_cast<double>(*this); }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

  Rational operator-() const { return from_wide(-static_cast<__int128>(num_), den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    const std::int64_t g = std::gcd(a.den_, b.den_);
    const __int128 n = static_cast<__int128>(a.num_) * (b.den_ / g) +
                       static_cast<__int128>(b.num_) * (a.den_ / g);
    const __int128 d = static_cast<__int128>(a.den_ / g) * b.den_;
    return from_wide(n, d);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    const std::int64_t g1 = std::gcd(std::abs(a.num_), b.den_);
    const std::int64_t g2 = std::gcd(std::abs(b.num_), a.den_);
    const __int128 n = static_cast<__int128>(a.num_ / (g1 ? g1 : 1)) * (b.num_ / (g2 ? g2 : 1));
    const __int128 d = static_cast<__int128>(a.den_ / (g2 ? g2 : 1)) * (b.den_ / (g1 ? g1 : 1));
    return from_wide(n, d);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
    Rational inv;
    inv.num_ = b.num_ < 0 ? -b.den_ : b.den_;
    inv.den_ = b.num_ < 0 ? -b.num_ : b.num_;
    return a * inv;
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend auto operator<=>(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num_) * b.den_ <=> static_cast<__int128>(b.num_) * a.den_;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  void assign(__int128 n, __int128 d) {
    if (d == 0) throw std::domain_error("Rational: zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const __int128 g = gcd128(n < 0 ? -n : n, d);
    n /= g;
    d /= g;
    constexpr __int128 lim = INT64_MAX;
    if (n > lim || n < -lim || d > lim) throw ExactOverflow("Rational: 64-bit overflow");
    num_ = static_cast<std::int64_t>(n);
    den_ = static_cast<std::int64_t>(d);
  }

  static Rational from_wide(__int128 n, __int128 d) {
    Rational r;
    r.assign(n, d);
    return r;
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline Rational abs(const Rational& r) { return r < Rational(0) ? -r : r; }

inline Rational Rational::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  };
  auto parse_int = [](std::string_view s) -> std::int64_t {
    if (s.empty()) throw std::invalid_argument("Rational::parse: empty integer");
    std::size_t pos = 0;
    const std::string tmp(s);
    const long long v = std::stoll(tmp, &pos);
    if (pos != tmp.size()) throw std::invalid_argument("Rational::parse: bad integer '" + tmp + "'");
    return v;
  };

  text = trim(text);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    return {parse_int(trim(text.substr(0, slash))), parse_int(trim(text.substr(slash + 1)))};
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const bool neg = !text.empty() && text.front() == '-';
    std::string_view whole = text.substr(0, dot);
    const std::string_view frac = text.substr(dot + 1);
    if (frac.size() > 17) throw std::invalid_argument("Rational::parse: too many decimals");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    if (whole == "-" || whole == "+" || whole.empty()) whole = "0";
    const Rational w(parse_int(whole));
    const Rational f(frac.empty() ? 0 : parse_int(frac), scale);
    return neg ? w - f : w + f;
  }
  return Rational(parse_int(text));
}

}  // namespace mixlab
