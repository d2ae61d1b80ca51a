#include "nlcert/expr.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nlcert {

namespace {

constexpr double kPi = 3.14159265358979323846;

double atan_v(double x) { return std::atan(x); }
double atan_d1(double x) { return 1.0 / (1.0 + x * x); }
double atan_d2(double x) {
  const double s = 1.0 + x * x;
  return -2.0 * x / (s * s);
}
Interval atan_id1(const Interval& I) { return Interval(1.0) / (Interval(1.0) + sqr(I)); }
Interval atan_id2(const Interval& I) {
  return (Interval(-2.0) * I) / sqr(Interval(1.0) + sqr(I));
}
Monotonicity atan_mono(const Interval&) { return Monotonicity::Increasing; }
std::vector<double> no_crit(const Interval&) { return {}; }

double sin_v(double x) { return std::sin(x); }
double sin_d1(double x) { return std::cos(x); }
double sin_d2(double x) { return -std::sin(x); }
Interval sin_id1(const Interval& I) { return cos(I); }
Interval sin_id2(const Interval& I) { return -sin(I); }
Monotonicity sin_mono(const Interval& I) {
  const Interval c = cos(I);
  if (c.lo >= 0.0) return Monotonicity::Increasing;
  if (c.hi <= 0.0) return Monotonicity::Decreasing;
  return Monotonicity::Unknown;
}
std::vector<double> sin_crit(const Interval& I) {
  std::vector<double> pts;
  // cos = 0 at pi/2 + k*pi
  const double k0 = std::ceil((I.lo - kPi / 2.0) / kPi);
  for (double k = k0;; k += 1.0) {
    const double p = kPi / 2.0 + k * kPi;
    if (p >= I.hi) break;
    if (p > I.lo) pts.push_back(p);
  }
  return pts;
}

double cos_v(double x) { return std::cos(x); }
double cos_d1(double x) { return -std::sin(x); }
double cos_d2(double x) { return -std::cos(x); }
Interval cos_id1(const Interval& I) { return -sin(I); }
Interval cos_id2(const Interval& I) { return -cos(I); }
Monotonicity cos_mono(const Interval& I) {
  const Interval s = sin(I);
  if (s.hi <= 0.0) return Monotonicity::Increasing;
  if (s.lo >= 0.0) return Monotonicity::Decreasing;
  return Monotonicity::Unknown;
}
std::vector<double> cos_crit(const Interval& I) {
  std::vector<double> pts;
  const double k0 = std::ceil(I.lo / kPi);
  for (double k = k0;; k += 1.0) {
    const double p = k * kPi;
    if (p >= I.hi) break;
    if (p > I.lo) pts.push_back(p);
  }
  return pts;
}

double exp_v(double x) { return std::exp(x); }
Interval exp_i2(const Interval& I) { return exp(I); }
Monotonicity exp_mono(const Interval&) { return Monotonicity::Increasing; }

double log_v(double x) {
  if (x <= 0.0) throw DomainError("log of non-positive value");
  return std::log(x);
}
double log_d1(double x) { return 1.0 / x; }
double log_d2(double x) { return -1.0 / (x * x); }
Interval log_id1(const Interval& I) { return Interval(1.0) / I; }
Interval log_id2(const Interval& I) { return -(Interval(1.0) / sqr(I)); }
Monotonicity log_mono(const Interval&) { return Monotonicity::Increasing; }

const DictionaryEntry kDict[] = {
    {DictFn::Arctan, "arctan", atan_v, atan_d1, atan_d2, atan, atan_id1, atan_id2,
     atan_mono, no_crit},
    {DictFn::Sin, "sin", sin_v, sin_d1, sin_d2, sin, sin_id1, sin_id2, sin_mono,
     sin_crit},
    {DictFn::Cos, "cos", cos_v, cos_d1, cos_d2, cos, cos_id1, cos_id2, cos_mono,
     cos_crit},
    {DictFn::Exp, "exp", exp_v, exp_v, exp_v, exp, exp_i2, exp_i2, exp_mono, no_crit},
    {DictFn::Log, "log", log_v, log_d1, log_d2, log, log_id1, log_id2, log_mono,
     no_crit},
};

}  // namespace

const DictionaryEntry& dictionary(DictFn id) { return kDict[static_cast<int>(id)]; }

std::optional<DictFn> dictionary_lookup(const std::string& name) {
  for (const auto& e : kDict)
    if (name == e.name) return e.id;
  if (name == "atan") return DictFn::Arctan;
  return std::nullopt;
}

Expr ExprNode::make_constant(const Rational& c) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Constant;
  n->constant = c;
  return n;
}

Expr ExprNode::make_constant(double c) {
  // exact for integers and dyadics small enough; otherwise nearest rational
  // with denominator 2^k via the double's own representation
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Constant;
  if (c == std::floor(c) && std::abs(c) < 1e15) {
    n->constant = Rational(static_cast<std::int64_t>(c), 1);
  } else {
    // fall back: denominator 10^9 snapping would lose exactness; keep the
    // double bit pattern as num/2^k when feasible
    int expn = 0;
    double m = std::frexp(c, &expn);
    std::int64_t num = static_cast<std::int64_t>(m * 9007199254740992.0);  // 2^53
    int shift = 53 - expn;
    std::int64_t den = 1;
    while (shift > 0 && num % 2 == 0) { num /= 2; --shift; }
    while (shift > 0 && den < (std::int64_t(1) << 60)) { den *= 2; --shift; }
    if (shift != 0) {
      // Dyadic does not fit in int64; snap to the num/2^62 grid, which is
      // within 2^-63 absolutely (callers needing rigor track this slack).
      const double scaled = c * 0x1p62;
      std::int64_t snum = std::abs(scaled) < 9.2e18
                              ? static_cast<std::int64_t>(std::llround(scaled))
                              : 0;
      n->constant = Rational(snum, std::int64_t(1) << 62);
    } else {
      n->constant = Rational(num, den);
    }
  }
  return n;
}

Expr ExprNode::make_var(int index) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Var;
  n->var = index;
  return n;
}

Expr ExprNode::make_binary(ExprKind op, Expr a, Expr b) {
  if (a->kind == ExprKind::Constant && b->kind == ExprKind::Constant) {
    const double x = a->constant.to_double(), y = b->constant.to_double();
    switch (op) {
      case ExprKind::Add: return make_constant(x + y);
      case ExprKind::Sub: return make_constant(x - y);
      case ExprKind::Mul: return make_constant(x * y);
      default: break;  // constant division kept symbolic, it may be exact
    }
  }
  auto n = std::make_shared<ExprNode>();
  n->kind = op;
  n->children = {std::move(a), std::move(b)};
  n->semialgebraic = n->children[0]->semialgebraic && n->children[1]->semialgebraic;
  return n;
}

Expr ExprNode::make_pow(Expr base, const Rational& r) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Pow;
  n->exponent = r;
  n->children = {std::move(base)};
  n->semialgebraic = n->children[0]->semialgebraic;
  return n;
}

Expr ExprNode::make_sqrt(Expr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Sqrt;
  n->children = {std::move(a)};
  n->semialgebraic = n->children[0]->semialgebraic;
  return n;
}

Expr ExprNode::make_abs(Expr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Abs;
  n->children = {std::move(a)};
  n->semialgebraic = n->children[0]->semialgebraic;
  return n;
}

Expr ExprNode::make_minmax(ExprKind op, Expr a, Expr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = op;
  n->children = {std::move(a), std::move(b)};
  n->semialgebraic = n->children[0]->semialgebraic && n->children[1]->semialgebraic;
  return n;
}

Expr ExprNode::make_dict(DictFn fn, Expr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Dict;
  n->fn = fn;
  n->children = {std::move(a)};
  n->semialgebraic = false;
  return n;
}

Expr operator+(Expr a, Expr b) { return ExprNode::make_binary(ExprKind::Add, std::move(a), std::move(b)); }
Expr operator-(Expr a, Expr b) { return ExprNode::make_binary(ExprKind::Sub, std::move(a), std::move(b)); }
Expr operator*(Expr a, Expr b) { return ExprNode::make_binary(ExprKind::Mul, std::move(a), std::move(b)); }
Expr operator/(Expr a, Expr b) { return ExprNode::make_binary(ExprKind::Div, std::move(a), std::move(b)); }
Expr operator-(Expr a) { return ExprNode::make_constant(Rational(-1)) * std::move(a); }
Expr operator*(double s, Expr a) { return ExprNode::make_constant(s) * std::move(a); }
Expr operator+(Expr a, double c) { return std::move(a) + ExprNode::make_constant(c); }
Expr operator-(Expr a, double c) { return std::move(a) - ExprNode::make_constant(c); }

std::string ExprNode::key() const {
  std::ostringstream os;
  switch (kind) {
    case ExprKind::Constant: os << "c" << constant.num << "/" << constant.den; break;
    case ExprKind::Var: os << "x" << var; break;
    case ExprKind::Add: os << "(+"; break;
    case ExprKind::Sub: os << "(-"; break;
    case ExprKind::Mul: os << "(*"; break;
    case ExprKind::Div: os << "(/"; break;
    case ExprKind::Pow: os << "(pow" << exponent.num << "/" << exponent.den; break;
    case ExprKind::Sqrt: os << "(sqrt"; break;
    case ExprKind::Abs: os << "(abs"; break;
    case ExprKind::Min: os << "(min"; break;
    case ExprKind::Max: os << "(max"; break;
    case ExprKind::Dict: os << "(" << dictionary(fn).name; break;
  }
  for (const auto& c : children) os << " " << c->key();
  if (!children.empty()) os << ")";
  return os.str();
}

std::string ExprNode::to_string() const { return key(); }

double eval(const Expr& e, const std::vector<double>& x) {
  switch (e->kind) {
    case ExprKind::Constant: return e->constant.to_double();
    case ExprKind::Var: return x.at(e->var);
    case ExprKind::Add: return eval(e->children[0], x) + eval(e->children[1], x);
    case ExprKind::Sub: return eval(e->children[0], x) - eval(e->children[1], x);
    case ExprKind::Mul: return eval(e->children[0], x) * eval(e->children[1], x);
    case ExprKind::Div: {
      const double d = eval(e->children[1], x);
      if (d == 0.0) throw DomainError("division by zero");
      return eval(e->children[0], x) / d;
    }
    case ExprKind::Pow: {
      const double b = eval(e->children[0], x);
      const Rational& r = e->exponent;
      if (r.den == 1) return std::pow(b, double(r.num));
      if (b < 0.0 && r.den % 2 == 0) throw DomainError("even root of negative value");
      return b >= 0.0 ? std::pow(b, r.to_double())
                      : -std::pow(-b, r.to_double());
    }
    case ExprKind::Sqrt: {
      const double v = eval(e->children[0], x);
      if (v < 0.0) throw DomainError("sqrt of negative value");
      return std::sqrt(v);
    }
    case ExprKind::Abs: return std::abs(eval(e->children[0], x));
    case ExprKind::Min: return std::min(eval(e->children[0], x), eval(e->children[1], x));
    case ExprKind::Max: return std::max(eval(e->children[0], x), eval(e->children[1], x));
    case ExprKind::Dict: return dictionary(e->fn).value(eval(e->children[0], x));
  }
  throw std::logic_error("eval: unreachable");
}

Interval interval_eval(const Expr& e, const Box& box) {
  switch (e->kind) {
    case ExprKind::Constant: return e->constant.to_interval();
    case ExprKind::Var: return box.at(e->var);
    case ExprKind::Add: return interval_eval(e->children[0], box) + interval_eval(e->children[1], box);
    case ExprKind::Sub: return interval_eval(e->children[0], box) - interval_eval(e->children[1], box);
    case ExprKind::Mul: return interval_eval(e->children[0], box) * interval_eval(e->children[1], box);
    case ExprKind::Div: return interval_eval(e->children[0], box) / interval_eval(e->children[1], box);
    case ExprKind::Pow: {
      const Interval b = interval_eval(e->children[0], box);
      const Rational& r = e->exponent;
      if (r.den == 1) return pow_int(b, r.num);
      return pow_int(root(b, r.den), r.num);
    }
    case ExprKind::Sqrt: return sqrt(interval_eval(e->children[0], box));
    case ExprKind::Abs: return abs(interval_eval(e->children[0], box));
    case ExprKind::Min: return min(interval_eval(e->children[0], box), interval_eval(e->children[1], box));
    case ExprKind::Max: return max(interval_eval(e->children[0], box), interval_eval(e->children[1], box));
    case ExprKind::Dict: return dictionary(e->fn).ivalue(interval_eval(e->children[0], box));
  }
  throw std::logic_error("interval_eval: unreachable");
}

Interval interval_eval_clipped(const Expr& e, const Box& box) {
  const auto nonneg = [](const Interval& v, const char* what) {
    if (v.hi < 0.0) throw DomainError(std::string(what) + ": argument enclosure entirely negative");
    return intersect(v, Interval(0.0, std::numeric_limits<double>::infinity()));
  };
  switch (e->kind) {
    case ExprKind::Constant: return e->constant.to_interval();
    case ExprKind::Var: return box.at(e->var);
    case ExprKind::Add: return interval_eval_clipped(e->children[0], box) + interval_eval_clipped(e->children[1], box);
    case ExprKind::Sub: return interval_eval_clipped(e->children[0], box) - interval_eval_clipped(e->children[1], box);
    case ExprKind::Mul: return interval_eval_clipped(e->children[0], box) * interval_eval_clipped(e->children[1], box);
    case ExprKind::Div: return interval_eval_clipped(e->children[0], box) / interval_eval_clipped(e->children[1], box);
    case ExprKind::Pow: {
      Interval b = interval_eval_clipped(e->children[0], box);
      const Rational& r = e->exponent;
      if (r.den == 1) return pow_int(b, r.num);
      if (r.den % 2 == 0) b = nonneg(b, "root");
      return pow_int(root(b, r.den), r.num);
    }
    case ExprKind::Sqrt:
      return sqrt(nonneg(interval_eval_clipped(e->children[0], box), "sqrt"));
    case ExprKind::Abs: return abs(interval_eval_clipped(e->children[0], box));
    case ExprKind::Min: return min(interval_eval_clipped(e->children[0], box), interval_eval_clipped(e->children[1], box));
    case ExprKind::Max: return max(interval_eval_clipped(e->children[0], box), interval_eval_clipped(e->children[1], box));
    case ExprKind::Dict: {
      Interval c = interval_eval_clipped(e->children[0], box);
      if (e->fn == DictFn::Log) {
        if (c.hi <= 0.0) throw DomainError("log: argument enclosure entirely non-positive");
        c = intersect(c, Interval(std::numeric_limits<double>::min(),
                                  std::numeric_limits<double>::infinity()));
      }
      return dictionary(e->fn).ivalue(c);
    }
  }
  throw std::logic_error("interval_eval_clipped: unreachable");
}

Expr differentiate(const Expr& e, int i) {
  using EK = ExprKind;
  const auto C = [](double v) { return ExprNode::make_constant(v); };
  switch (e->kind) {
    case EK::Constant: return C(0.0);
    case EK::Var: return C(e->var == i ? 1.0 : 0.0);
    case EK::Add: return differentiate(e->children[0], i) + differentiate(e->children[1], i);
    case EK::Sub: return differentiate(e->children[0], i) - differentiate(e->children[1], i);
    case EK::Mul:
      return differentiate(e->children[0], i) * e->children[1] +
             e->children[0] * differentiate(e->children[1], i);
    case EK::Div: {
      const Expr& u = e->children[0];
      const Expr& v = e->children[1];
      return (differentiate(u, i) * v - u * differentiate(v, i)) / (v * v);
    }
    case EK::Pow: {
      const Expr& u = e->children[0];
      const Rational& r = e->exponent;
      Rational rm1(r.num - r.den, r.den);
      return C(r.to_double()) * ExprNode::make_pow(u, rm1) * differentiate(u, i);
    }
    case EK::Sqrt: {
      const Expr& u = e->children[0];
      return differentiate(u, i) / (C(2.0) * ExprNode::make_sqrt(u));
    }
    case EK::Abs:
    case EK::Min:
    case EK::Max:
      throw DomainError("differentiate: non-differentiable node (abs/min/max)");
    case EK::Dict: {
      const Expr& u = e->children[0];
      Expr du = differentiate(u, i);
      switch (e->fn) {
        case DictFn::Arctan:
          // Use an even-power node so interval evaluation of u^2 stays
          // nonnegative; u * u would widen to a sign-indefinite product and
          // make the denominator straddle zero on wide boxes.
          return du / (C(1.0) + ExprNode::make_pow(u, Rational(2, 1)));
        case DictFn::Sin:
          return ExprNode::make_dict(DictFn::Cos, u) * du;
        case DictFn::Cos:
          return C(-1.0) * ExprNode::make_dict(DictFn::Sin, u) * du;
        case DictFn::Exp:
          return ExprNode::make_dict(DictFn::Exp, u) * du;
        case DictFn::Log:
          return du / u;
      }
    }
  }
  throw std::logic_error("differentiate: unreachable");
}

int max_var(const Expr& e) {
  int m = 0;
  if (e->kind == ExprKind::Var) m = e->var + 1;
  for (const auto& c : e->children) m = std::max(m, max_var(c));
  return m;
}

std::optional<Poly> to_poly(const Expr& e, int n) {
  switch (e->kind) {
    case ExprKind::Constant: return Poly::constant(n, e->constant.to_double());
    case ExprKind::Var:
      if (e->var >= n) return std::nullopt;
      return Poly::variable(n, e->var);
    case ExprKind::Add: {
      auto a = to_poly(e->children[0], n), b = to_poly(e->children[1], n);
      if (!a || !b) return std::nullopt;
      return *a + *b;
    }
    case ExprKind::Sub: {
      auto a = to_poly(e->children[0], n), b = to_poly(e->children[1], n);
      if (!a || !b) return std::nullopt;
      return *a - *b;
    }
    case ExprKind::Mul: {
      auto a = to_poly(e->children[0], n), b = to_poly(e->children[1], n);
      if (!a || !b) return std::nullopt;
      return *a * *b;
    }
    case ExprKind::Pow: {
      const Rational& r = e->exponent;
      if (r.den != 1 || r.num < 0) return std::nullopt;
      auto a = to_poly(e->children[0], n);
      if (!a) return std::nullopt;
      Poly p = Poly::constant(n, 1.0);
      for (std::int64_t k = 0; k < r.num; ++k) p = p * *a;
      return p;
    }
    case ExprKind::Div: {
      // division by a constant is polynomial
      auto b = to_poly(e->children[1], n);
      if (!b || b->deg() != 0 || b->is_zero()) return std::nullopt;
      auto a = to_poly(e->children[0], n);
      if (!a) return std::nullopt;
      return *a * (1.0 / b->coeff(Monomial(n, 0)));
    }
    default:
      return std::nullopt;
  }
}

}  // namespace nlcert
