#pragma once
// Closed intervals with outward rounding. Every result is widened by one ulp
// on each side plus a relative slack, which dominates round-to-nearest error of
// the elementary operation that produced it.

#include <algorithm>
#include <cmath>
#include <limits>

namespace stairlam {

struct Interval {
  double lo = 0, hi = 0;

  static constexpr double kSlack = 1e-13;

  Interval() = default;
  Interval(double v) : lo(v), hi(v) {}
  Interval(double l, double h) : lo(l), hi(h) {}

  static double down(double v) {
    const double w = v - kSlack * std::fabs(v);
    return std::nextafter(w, -std::numeric_limits<double>::infinity());
  }
  static double up(double v) {
    const double w = v + kSlack * std::fabs(v);
    return std::nextafter(w, std::numeric_limits<double>::infinity());
  }
  //! Outward-widened enclosure of [l, h].
  static Interval out(double l, double h) { return {down(l), up(h)}; }

  double width() const { return hi - lo; }
  double mid() const { return lo + (hi - lo) / 2; }
  bool contains_zero() const { return lo <= 0 && hi >= 0; }
};

inline Interval operator+(Interval a, Interval b) { return Interval::out(a.lo + b.lo, a.hi + b.hi); }
inline Interval operator-(Interval a, Interval b) { return Interval::out(a.lo - b.hi, a.hi - b.lo); }
inline Interval operator-(Interval a) { return {-a.hi, -a.lo}; }
inline Interval operator*(Interval a, Interval b) {
  const double p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return Interval::out(*std::min_element(p, p + 4), *std::max_element(p, p + 4));
}
//! Division; the caller guarantees 0 is not in b.
inline Interval operator/(Interval a, Interval b) {
  const double p[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  return Interval::out(*std::min_element(p, p + 4), *std::max_element(p, p + 4));
}
inline Interval hull(Interval a, Interval b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

//! Image of a nondecreasing function.
template <class F>
Interval monotone_up(F&& f, Interval x) {
  return Interval::out(f(x.lo), f(x.hi));
}

}  // namespace stairlam
