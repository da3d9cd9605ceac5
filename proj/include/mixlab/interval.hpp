#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mixlab {

/// Closed interval [lo, hi] with outward rounding on every operation.
/// Only what the domination check needs: +, *, square, sin/cos of 2*pi*x.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval point(double v) { return {v, v}; }

  double width() const { return hi - lo; }
  double mag() const { return std::max(std::abs(lo), std::abs(hi)); }

  friend Interval operator+(Interval a, Interval b) {
    return widen({a.lo + b.lo, a.hi + b.hi});
  }
  friend Interval operator*(Interval a, Interval b) {
    const double p[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return widen({*std::min_element(p, p + 4), *std::max_element(p, p + 4)});
  }

  static Interval widen(Interval v) {
    return {std::nextafter(v.lo, -std::numeric_limits<double>::infinity()),
            std::nextafter(v.hi, std::numeric_limits<double>::infinity())};
  }
};

inline Interval square(Interval a) {
  if (a.lo >= 0.0) return Interval::widen({a.lo * a.lo, a.hi * a.hi});
  if (a.hi <= 0.0) return Interval::widen({a.hi * a.hi, a.lo * a.lo});
  return Interval::widen({0.0, std::max(a.lo * a.lo, a.hi * a.hi)});
}

/// Enclosure of sin(2*pi*t) for t in [x.lo, x.hi].
inline Interval sin_turns(Interval x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double lo = std::min(std::sin(two_pi * x.lo), std::sin(two_pi * x.hi));
  double hi = std::max(std::sin(two_pi * x.lo), std::sin(two_pi * x.hi));
  // Maxima at t = 1/4 + k, minima at t = 3/4 + k.
  auto contains_shift = [&](double phase) { return std::ceil(x.lo - phase) <= x.hi - phase; };
  if (contains_shift(0.25)) hi = 1.0;
  if (contains_shift(0.75)) lo = -1.0;
  // Library sin is faithful to ~1 ulp; pad generously (the shift in cos_turns also rounds).
  constexpr double pad = 16.0 * std::numeric_limits<double>::epsilon();
  return {std::max(-1.0, lo - pad), std::min(1.0, hi + pad)};
}

inline Interval cos_turns(Interval x) { return sin_turns({x.lo + 0.25, x.hi + 0.25}); }

}  // namespace mixlab
