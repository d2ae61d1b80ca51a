#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "nlcert/interval.hpp"

namespace nlcert {

/// Exponent vector in the ambient dimension.
using Monomial = std::vector<int>;

inline int degree(const Monomial& m) {
  return std::accumulate(m.begin(), m.end(), 0);
}

/// Graded lexicographic order: first by total degree, then lex.
struct GradedLex {
  bool operator()(const Monomial& a, const Monomial& b) const {
    const int da = degree(a), db = degree(b);
    if (da != db) return da < db;
    return a > b;  // x1 before x2 within a degree
  }
};

/// All monomials in n variables of total degree <= d, graded-lex ordered.
/// Count is C(n+d, d).
std::vector<Monomial> mons(int n, int d);

std::int64_t binomial(int n, int k);

/// Exact rational, just enough for decimal constants and unit-box moments.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);
  double to_double() const { return double(num) / double(den); }
  /// Tightest double enclosure of the exact value.
  Interval to_interval() const;
  Rational operator*(const Rational& o) const;
};

/// gamma_alpha = integral of x^alpha over [0,1]^n = prod 1/(alpha_i+1).
Rational unit_box_moment(const Monomial& alpha);

/// Sparse multivariate polynomial: dimension n plus a map from exponent
/// vectors to nonzero coefficients. Zero coefficients are never stored.
class Poly {
 public:
  using Terms = std::map<Monomial, double, GradedLex>;

  Poly() = default;
  explicit Poly(int n) : n_(n) {}
  static Poly constant(int n, double c);
  static Poly variable(int n, int i);  // 0-based index

  int dim() const { return n_; }
  int deg() const;
  bool is_zero() const { return terms_.empty(); }
  const Terms& terms() const { return terms_; }
  double coeff(const Monomial& m) const;
  void add_term(const Monomial& m, double c);

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator-() const;
  Poly operator*(const Poly& o) const;
  Poly operator*(double s) const;

  double eval(const std::vector<double>& x) const;
  Interval interval_eval(const std::vector<Interval>& box) const;

  /// x_i <- shift_i + scale_i * x_i, exact sparse expansion.
  Poly substitute_affine(const std::vector<double>& shift,
                         const std::vector<double>& scale) const;

  /// Embed into a larger dimension (new trailing variables unused).
  Poly embedded(int new_dim) const;

  std::string to_string() const;

 private:
  int n_ = 0;
  Terms terms_;
};

/// Polynomial with interval coefficients; the certificate-checking path.
class IPoly {
 public:
  using Terms = std::map<Monomial, Interval, GradedLex>;

  IPoly() = default;
  explicit IPoly(int n) : n_(n) {}
  static IPoly from(const Poly& p);

  int dim() const { return n_; }
  const Terms& terms() const { return terms_; }
  void add_term(const Monomial& m, const Interval& c);

  IPoly operator+(const IPoly& o) const;
  IPoly operator-(const IPoly& o) const;
  IPoly operator*(const IPoly& o) const;
  IPoly scaled(const Interval& s) const;

  /// Sum over terms of |coeff| * sup_box |x^alpha|, rounded up.
  double weighted_l1(const std::vector<Interval>& box) const;

 private:
  int n_ = 0;
  Terms terms_;
};

}  // namespace nlcert
