#include "nlcert/poly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nlcert {

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

namespace {
void compositions(int pos, int remaining, Monomial& cur, std::vector<Monomial>& out) {
  const int n = static_cast<int>(cur.size());
  if (pos == n - 1) {
    cur[pos] = remaining;
    out.push_back(cur);
    cur[pos] = 0;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[pos] = e;
    compositions(pos + 1, remaining - e, cur, out);
  }
  cur[pos] = 0;
}
}  // namespace

std::vector<Monomial> mons(int n, int d) {
  if (n < 1 || d < 0) throw std::invalid_argument("mons: need n >= 1, d >= 0");
  std::vector<Monomial> out;
  out.reserve(static_cast<size_t>(binomial(n + d, d)));
  Monomial cur(n, 0);
  for (int total = 0; total <= d; ++total) compositions(0, total, cur, out);
  return out;
}

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
  if (den == 0) throw std::invalid_argument("Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(std::abs(num), den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Interval Rational::to_interval() const {
  const Interval n{double(num)}, d{double(den)};
  // int64 -> double is exact for |v| < 2^53, which holds for parsed decimals
  return n / d;
}

Rational Rational::operator*(const Rational& o) const {
  const std::int64_t g1 = std::gcd(std::abs(num), o.den);
  const std::int64_t g2 = std::gcd(std::abs(o.num), den);
  return Rational((num / g1) * (o.num / g2), (den / g2) * (o.den / g1));
}

Rational unit_box_moment(const Monomial& alpha) {
  Rational r(1, 1);
  for (int a : alpha) r = r * Rational(1, a + 1);
  return r;
}

Poly Poly::constant(int n, double c) {
  Poly p(n);
  if (c != 0.0) p.terms_[Monomial(n, 0)] = c;
  return p;
}

Poly Poly::variable(int n, int i) {
  Poly p(n);
  Monomial m(n, 0);
  m.at(i) = 1;
  p.terms_[m] = 1.0;
  return p;
}

int Poly::deg() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, degree(m));
  return d;
}

double Poly::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Poly::add_term(const Monomial& m, double c) {
  if (static_cast<int>(m.size()) != n_) throw std::invalid_argument("Poly: dimension mismatch");
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) it->second += c;
  if (it->second == 0.0) terms_.erase(it);
}

Poly Poly::operator+(const Poly& o) const {
  if (n_ != o.n_) throw std::invalid_argument("Poly+: dimension mismatch");
  Poly r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m, c);
  return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator-() const {
  Poly r(n_);
  for (const auto& [m, c] : terms_) r.terms_[m] = -c;
  return r;
}

Poly Poly::operator*(const Poly& o) const {
  if (n_ != o.n_) throw std::invalid_argument("Poly*: dimension mismatch");
  Poly r(n_);
  Monomial m(n_);
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : o.terms_) {
      for (int i = 0; i < n_; ++i) m[i] = ma[i] + mb[i];
      r.add_term(m, ca * cb);
    }
  return r;
}

Poly Poly::operator*(double s) const {
  Poly r(n_);
  if (s == 0.0) return r;
  for (const auto& [m, c] : terms_) r.terms_[m] = c * s;
  return r;
}

double Poly::eval(const std::vector<double>& x) const {
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (int i = 0; i < n_; ++i)
      for (int e = 0; e < m[i]; ++e) t *= x[i];
    sum += t;
  }
  return sum;
}

Interval Poly::interval_eval(const std::vector<Interval>& box) const {
  Interval sum(0.0);
  for (const auto& [m, c] : terms_) {
    Interval t(c);
    for (int i = 0; i < n_; ++i)
      if (m[i] > 0) t = t * pow_int(box[i], m[i]);
    sum = sum + t;
  }
  return sum;
}

Poly Poly::substitute_affine(const std::vector<double>& shift,
                             const std::vector<double>& scale) const {
  Poly r(n_);
  for (const auto& [m, c] : terms_) {
    Poly term = Poly::constant(n_, c);
    for (int i = 0; i < n_; ++i) {
      if (m[i] == 0) continue;
      Poly lin = Poly::constant(n_, shift[i]) + Poly::variable(n_, i) * scale[i];
      for (int e = 0; e < m[i]; ++e) term = term * lin;
    }
    r = r + term;
  }
  return r;
}

Poly Poly::embedded(int new_dim) const {
  if (new_dim < n_) throw std::invalid_argument("Poly::embedded: shrinking");
  Poly r(new_dim);
  for (const auto& [m, c] : terms_) {
    Monomial mm = m;
    mm.resize(new_dim, 0);
    r.add_term(mm, c);
  }
  return r;
}

std::string Poly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c;
    for (int i = 0; i < n_; ++i)
      if (m[i] > 0) {
        os << "*x" << (i + 1);
        if (m[i] > 1) os << "^" << m[i];
      }
  }
  return os.str();
}

IPoly IPoly::from(const Poly& p) {
  IPoly r(p.dim());
  for (const auto& [m, c] : p.terms()) r.terms_[m] = Interval(c);
  return r;
}

void IPoly::add_term(const Monomial& m, const Interval& c) {
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) it->second = it->second + c;
}

IPoly IPoly::operator+(const IPoly& o) const {
  IPoly r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m, c);
  return r;
}

IPoly IPoly::operator-(const IPoly& o) const {
  IPoly r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m, -c);
  return r;
}

IPoly IPoly::operator*(const IPoly& o) const {
  IPoly r(n_);
  Monomial m(n_);
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : o.terms_) {
      for (int i = 0; i < n_; ++i) m[i] = ma[i] + mb[i];
      r.add_term(m, ca * cb);
    }
  return r;
}

IPoly IPoly::scaled(const Interval& s) const {
  IPoly r(n_);
  for (const auto& [m, c] : terms_) r.terms_[m] = c * s;
  return r;
}

double IPoly::weighted_l1(const std::vector<Interval>& box) const {
  Interval sum(0.0);
  for (const auto& [m, c] : terms_) {
    Interval t = abs(c);
    for (int i = 0; i < n_; ++i)
      if (m[i] > 0) t = t * abs(pow_int(box[i], m[i]));
    sum = sum + Interval(0.0, t.hi);
  }
  return sum.hi;
}

}  // namespace nlcert
