#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nlcert {

/// Raised when an operation leaves its domain (log of non-positive,
/// even root of a negative, division by an interval containing zero, ...).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline double step_down(double x) {
  if (!std::isfinite(x)) return x;
  return std::nextafter(x, -std::numeric_limits<double>::infinity());
}
inline double step_up(double x) {
  if (!std::isfinite(x)) return x;
  return std::nextafter(x, std::numeric_limits<double>::infinity());
}
// n successive representable steps; used for transcendental endpoints where
// libm only promises faithful rounding.
inline double step_down(double x, int n) {
  for (int i = 0; i < n; ++i) x = step_down(x);
  return x;
}
inline double step_up(double x, int n) {
  for (int i = 0; i < n; ++i) x = step_up(x);
  return x;
}
}  // namespace detail

/// Closed interval [lo, hi] with outward rounding after every elementary
/// operation. Invariant lo <= hi.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double point) : lo(point), hi(point) {}
  Interval(double l, double h) : lo(l), hi(h) {
    if (!(lo <= hi)) throw std::invalid_argument("Interval: lo > hi");
  }

  static Interval hull(double a, double b) {
    return a <= b ? Interval(a, b) : Interval(b, a);
  }

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  double rad() const { return 0.5 * (hi - lo); }
  double mag() const { return std::max(std::abs(lo), std::abs(hi)); }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool is_point() const { return lo == hi; }
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);
Interval operator*(double s, const Interval& a);
Interval operator+(const Interval& a, double s);

Interval join(const Interval& a, const Interval& b);  // convex hull
Interval intersect(const Interval& a, const Interval& b);

Interval sqr(const Interval& a);
Interval sqrt(const Interval& a);
Interval abs(const Interval& a);
Interval min(const Interval& a, const Interval& b);
Interval max(const Interval& a, const Interval& b);
Interval pow_int(const Interval& a, long e);
/// x^(1/p) for positive integer p (even p requires a.lo >= 0).
Interval root(const Interval& a, long p);

Interval exp(const Interval& a);
Interval log(const Interval& a);
Interval sin(const Interval& a);
Interval cos(const Interval& a);
Interval atan(const Interval& a);

/// Symmetric matrix of intervals; entry (i,j) == entry (j,i).
struct IntervalMatrix {
  Eigen::MatrixXd lo;
  Eigen::MatrixXd hi;

  IntervalMatrix() = default;
  explicit IntervalMatrix(int n)
      : lo(Eigen::MatrixXd::Zero(n, n)), hi(Eigen::MatrixXd::Zero(n, n)) {}

  int size() const { return static_cast<int>(lo.rows()); }
  Interval operator()(int i, int j) const { return Interval(lo(i, j), hi(i, j)); }
  void set(int i, int j, const Interval& v) {
    lo(i, j) = lo(j, i) = v.lo;
    hi(i, j) = hi(j, i) = v.hi;
  }
  Eigen::MatrixXd midpoint() const { return 0.5 * (lo + hi); }
  Eigen::MatrixXd radius() const { return 0.5 * (hi - lo); }
  bool contains(const IntervalMatrix& m) const {
    return (lo.array() <= m.lo.array()).all() && (m.hi.array() <= hi.array()).all();
  }
};

/// Decompose M into a degenerate midpoint part X and a symmetric radius
/// part Y with X + Y containing M entrywise.
struct MidRadSplit {
  IntervalMatrix mid;      // degenerate: lo == hi == midpoint
  IntervalMatrix centered; // [-rad, +rad]
};
MidRadSplit split_mid_rad(const IntervalMatrix& m);

}  // namespace nlcert
