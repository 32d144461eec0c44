#ifndef PAVOID_INTERVAL_HPP
#define PAVOID_INTERVAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>

namespace pavoid {

// Closed interval with outward rounding by one ulp on every operation.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  constexpr Interval(double l, double h) : lo(l), hi(h) {}
  static constexpr Interval point(double v) { return Interval(v, v); }

  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool contains_zero() const { return lo <= 0.0 && 0.0 <= hi; }

  Interval inflate(double r) const { return widen(lo - r, hi + r); }

  static Interval widen(double l, double h) {
    return Interval(std::nextafter(l, -std::numeric_limits<double>::infinity()),
                    std::nextafter(h, std::numeric_limits<double>::infinity()));
  }
};

inline Interval operator+(Interval a, Interval b) { return Interval::widen(a.lo + b.lo, a.hi + b.hi); }
inline Interval operator-(Interval a, Interval b) { return Interval::widen(a.lo - b.hi, a.hi - b.lo); }

inline Interval operator*(Interval a, Interval b) {
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return Interval::widen(std::min(std::min(p1, p2), std::min(p3, p4)), std::max(std::max(p1, p2), std::max(p3, p4)));
}

inline Interval operator*(double s, Interval a) { return Interval::point(s) * a; }

}  // namespace pavoid

#endif
