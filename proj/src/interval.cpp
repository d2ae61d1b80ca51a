#include "nlcert/interval.hpp"

#include <algorithm>

namespace nlcert {

using detail::step_down;
using detail::step_up;

namespace {
// Number of representable-value steps used to enclose libm results.
// Basic arithmetic and sqrt are correctly rounded: one step suffices.
constexpr int kArith = 1;
// glibc transcendentals are faithful to ~1 ulp; widen further for margin.
constexpr int kLibm = 4;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

Interval operator+(const Interval& a, const Interval& b) {
  return Interval(step_down(a.lo + b.lo), step_up(a.hi + b.hi));
}

Interval operator-(const Interval& a, const Interval& b) {
  return Interval(step_down(a.lo - b.hi), step_up(a.hi - b.lo));
}

Interval operator-(const Interval& a) { return Interval(-a.hi, -a.lo); }

Interval operator*(const Interval& a, const Interval& b) {
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  const double lo = std::min(std::min(p1, p2), std::min(p3, p4));
  const double hi = std::max(std::max(p1, p2), std::max(p3, p4));
  return Interval(step_down(lo), step_up(hi));
}

Interval operator/(const Interval& a, const Interval& b) {
  if (b.lo <= 0.0 && b.hi >= 0.0)
    throw DomainError("interval division: denominator contains 0");
  const double p1 = a.lo / b.lo, p2 = a.lo / b.hi, p3 = a.hi / b.lo, p4 = a.hi / b.hi;
  const double lo = std::min(std::min(p1, p2), std::min(p3, p4));
  const double hi = std::max(std::max(p1, p2), std::max(p3, p4));
  return Interval(step_down(lo), step_up(hi));
}

Interval operator*(double s, const Interval& a) { return Interval(s) * a; }
Interval operator+(const Interval& a, double s) { return a + Interval(s); }

Interval join(const Interval& a, const Interval& b) {
  return Interval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}

Interval intersect(const Interval& a, const Interval& b) {
  const double lo = std::max(a.lo, b.lo), hi = std::min(a.hi, b.hi);
  if (lo > hi) throw DomainError("interval intersection is empty");
  return Interval(lo, hi);
}

Interval sqr(const Interval& a) {
  const double m = a.mag();
  const double lo = a.contains(0.0) ? 0.0 : std::min(a.lo * a.lo, a.hi * a.hi);
  return Interval(step_down(lo), step_up(m * m));
}

Interval sqrt(const Interval& a) {
  if (a.lo < 0.0) throw DomainError("interval sqrt of a possibly negative value");
  return Interval(step_down(std::sqrt(a.lo)), step_up(std::sqrt(a.hi)));
}

Interval abs(const Interval& a) {
  if (a.lo >= 0.0) return a;
  if (a.hi <= 0.0) return -a;
  return Interval(0.0, a.mag());
}

Interval min(const Interval& a, const Interval& b) {
  return Interval(std::min(a.lo, b.lo), std::min(a.hi, b.hi));
}

Interval max(const Interval& a, const Interval& b) {
  return Interval(std::max(a.lo, b.lo), std::max(a.hi, b.hi));
}

Interval pow_int(const Interval& a, long e) {
  if (e == 0) return Interval(1.0);
  if (e < 0) return Interval(1.0) / pow_int(a, -e);
  Interval r(1.0);
  Interval base = a;
  long n = e;
  // even powers of sign-crossing intervals handled via sqr
  while (n > 0) {
    if (n % 2 == 1) r = r * base;
    base = sqr(base);
    n /= 2;
  }
  // tighten even totals crossing zero: x^e >= 0 for even e
  if (e % 2 == 0 && r.lo < 0.0) r.lo = 0.0;
  return r;
}

Interval root(const Interval& a, long p) {
  if (p <= 0) throw std::invalid_argument("root: p must be positive");
  if (p == 1) return a;
  if (p == 2) return sqrt(a);
  if (p % 2 == 0 && a.lo < 0.0)
    throw DomainError("interval even root of a possibly negative value");
  auto rt = [p](double x) {
    return x >= 0.0 ? std::pow(x, 1.0 / double(p)) : -std::pow(-x, 1.0 / double(p));
  };
  return Interval(step_down(rt(a.lo), kLibm), step_up(rt(a.hi), kLibm));
}

Interval exp(const Interval& a) {
  double lo = step_down(std::exp(a.lo), kLibm);
  if (lo < 0.0) lo = 0.0;
  return Interval(lo, step_up(std::exp(a.hi), kLibm));
}

Interval log(const Interval& a) {
  if (a.lo <= 0.0) throw DomainError("interval log of a possibly non-positive value");
  return Interval(step_down(std::log(a.lo), kLibm), step_up(std::log(a.hi), kLibm));
}

Interval atan(const Interval& a) {
  return Interval(step_down(std::atan(a.lo), kLibm), step_up(std::atan(a.hi), kLibm));
}

namespace {
// Does [a - tau, b + tau] contain a point of the lattice c + period*Z?
// Over-inclusive near the boundary, which only widens the image.
bool hits_lattice(double a, double b, double c, double period) {
  const double tau = 1e-9 * (1.0 + std::abs(a) + std::abs(b));
  const double k = std::ceil((a - tau - c) / period);
  return c + k * period <= b + tau;
}
}  // namespace

Interval sin(const Interval& a) {
  if (a.width() >= kTwoPi) return Interval(-1.0, 1.0);
  const double slo = std::sin(a.lo), shi = std::sin(a.hi);
  double lo = std::min(slo, shi), hi = std::max(slo, shi);
  lo = std::max(-1.0, step_down(lo, kLibm));
  hi = std::min(1.0, step_up(hi, kLibm));
  if (hits_lattice(a.lo, a.hi, kPi / 2.0, kTwoPi)) hi = 1.0;
  if (hits_lattice(a.lo, a.hi, -kPi / 2.0, kTwoPi)) lo = -1.0;
  return Interval(lo, hi);
}

Interval cos(const Interval& a) {
  if (a.width() >= kTwoPi) return Interval(-1.0, 1.0);
  const double clo = std::cos(a.lo), chi = std::cos(a.hi);
  double lo = std::min(clo, chi), hi = std::max(clo, chi);
  lo = std::max(-1.0, step_down(lo, kLibm));
  hi = std::min(1.0, step_up(hi, kLibm));
  if (hits_lattice(a.lo, a.hi, 0.0, kTwoPi)) hi = 1.0;
  if (hits_lattice(a.lo, a.hi, kPi, kTwoPi)) lo = -1.0;
  return Interval(lo, hi);
}

MidRadSplit split_mid_rad(const IntervalMatrix& m) {
  const int n = m.size();
  MidRadSplit out{IntervalMatrix(n), IntervalMatrix(n)};
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Interval e = m(i, j);
      const double c = e.mid();
      // radius rounded up so that mid + centered contains the entry
      double r = step_up(std::max(e.hi - c, c - e.lo));
      out.mid.set(i, j, Interval(c, c));
      out.centered.set(i, j, Interval(-r, r));
    }
  return out;
}

}  // namespace nlcert
