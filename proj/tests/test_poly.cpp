#include <doctest.h>

#include <cmath>
#include <random>

#include "nlcert/poly.hpp"

using namespace nlcert;

namespace {

std::mt19937_64 rng(777);

std::vector<double> random_point(int n, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

Poly random_poly(int n, int d, int terms) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_int_distribution<int> e(0, d);
  Poly p(n);
  for (int t = 0; t < terms; ++t) {
    Monomial m(n, 0);
    int budget = d;
    for (int i = 0; i < n; ++i) {
      m[i] = std::min(e(rng), budget);
      budget -= m[i];
    }
    p.add_term(m, u(rng));
  }
  return p;
}

}  // namespace

TEST_CASE("mons enumerates C(n+d,d) monomials in graded-lex order") {
  auto ms = mons(3, 2);
  CHECK(ms.size() == 10);  // C(5,2)
  CHECK(degree(ms.front()) == 0);
  GradedLex less;
  for (size_t i = 1; i < ms.size(); ++i) {
    CHECK(less(ms[i - 1], ms[i]));
    CHECK(degree(ms[i]) <= 2);
  }
  CHECK(mons(1, 5).size() == 6);
  CHECK(mons(6, 4).size() == binomial(10, 4));
}

TEST_CASE("binomial") {
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(10, 0) == 1);
  CHECK(binomial(10, 10) == 1);
  CHECK(binomial(20, 10) == 184756);
}

TEST_CASE("rational enclosure and arithmetic") {
  Rational r(1, 3);
  CHECK(r.to_double() == doctest::Approx(1.0 / 3.0));
  Interval e = r.to_interval();
  CHECK(e.lo <= 1.0 / 3.0);
  CHECK(e.hi >= 1.0 / 3.0);
  CHECK(e.hi - e.lo < 1e-15);
  Rational p = Rational(2, 3) * Rational(3, 4);
  CHECK(p.to_double() == doctest::Approx(0.5));
}

TEST_CASE("unit box moments") {
  // integral of x^2 y over [0,1]^2 = 1/3 * 1/2.
  Rational m = unit_box_moment({2, 1});
  CHECK(m.to_double() == doctest::Approx(1.0 / 6.0));
  CHECK(unit_box_moment({0, 0, 0}).to_double() == 1.0);
}

TEST_CASE("poly construction and zero handling") {
  Poly p(2);
  CHECK(p.is_zero());
  p.add_term({1, 0}, 2.0);
  p.add_term({1, 0}, -2.0);
  CHECK(p.is_zero());  // cancelled coefficients are not stored
  Poly c = Poly::constant(2, 3.5);
  CHECK(c.deg() == 0);
  CHECK(c.eval({1.0, 2.0}) == 3.5);
  Poly x1 = Poly::variable(3, 1);
  CHECK(x1.eval({5.0, 7.0, 9.0}) == 7.0);
}

TEST_CASE("poly arithmetic agrees with pointwise evaluation") {
  for (int trial = 0; trial < 30; ++trial) {
    Poly p = random_poly(3, 3, 6);
    Poly q = random_poly(3, 2, 4);
    auto x = random_point(3);
    const double pe = p.eval(x), qe = q.eval(x);
    CHECK((p + q).eval(x) == doctest::Approx(pe + qe));
    CHECK((p - q).eval(x) == doctest::Approx(pe - qe));
    CHECK((-p).eval(x) == doctest::Approx(-pe));
    CHECK((p * q).eval(x) == doctest::Approx(pe * qe).epsilon(1e-9));
    CHECK((p * 2.5).eval(x) == doctest::Approx(2.5 * pe));
    CHECK((p * q).deg() <= p.deg() + q.deg());
  }
}

TEST_CASE("substitute_affine matches composed evaluation") {
  for (int trial = 0; trial < 20; ++trial) {
    Poly p = random_poly(2, 4, 6);
    std::vector<double> shift = random_point(2), scale = random_point(2);
    Poly q = p.substitute_affine(shift, scale);
    auto u = random_point(2, 0.0, 1.0);
    std::vector<double> x = {shift[0] + scale[0] * u[0],
                             shift[1] + scale[1] * u[1]};
    CHECK(q.eval(u) == doctest::Approx(p.eval(x)).epsilon(1e-9));
  }
}

TEST_CASE("embedded keeps values") {
  Poly p = random_poly(2, 3, 5);
  Poly q = p.embedded(4);
  CHECK(q.dim() == 4);
  auto x = random_point(2);
  CHECK(q.eval({x[0], x[1], 9.0, -3.0}) == doctest::Approx(p.eval(x)));
}

TEST_CASE("poly interval_eval encloses sampled values") {
  Poly p = random_poly(3, 3, 8);
  std::vector<Interval> box = {Interval(-1.0, 2.0), Interval(0.0, 1.0),
                               Interval(-0.5, 0.5)};
  Interval range = p.interval_eval(box);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int s = 0; s < 500; ++s) {
    std::vector<double> x(3);
    for (int i = 0; i < 3; ++i)
      x[i] = box[i].lo + box[i].width() * u01(rng);
    CHECK(range.contains(p.eval(x)));
  }
}

TEST_CASE("ipoly encloses coefficient arithmetic") {
  Poly p = random_poly(2, 2, 4);
  Poly q = random_poly(2, 2, 4);
  IPoly ip = IPoly::from(p), iq = IPoly::from(q);
  IPoly prod = ip * iq;
  Poly dprod = p * q;
  for (const auto& [mon, c] : dprod.terms()) {
    auto it = prod.terms().find(mon);
    REQUIRE(it != prod.terms().end());
    CHECK(it->second.lo <= c + 1e-12);
    CHECK(it->second.hi >= c - 1e-12);
  }
  IPoly sum = ip + iq;
  IPoly diff = ip - iq;
  CHECK(sum.dim() == 2);
  CHECK(diff.dim() == 2);
}

TEST_CASE("ipoly weighted_l1 dominates absolute values on the box") {
  Poly p = random_poly(2, 3, 6);
  IPoly ip = IPoly::from(p);
  std::vector<Interval> box = {Interval(-1.5, 1.0), Interval(0.5, 2.0)};
  double w = ip.weighted_l1(box);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int s = 0; s < 500; ++s) {
    std::vector<double> x(2);
    for (int i = 0; i < 2; ++i) x[i] = box[i].lo + box[i].width() * u01(rng);
    CHECK(w >= std::abs(p.eval(x)) - 1e-9);
  }
}
