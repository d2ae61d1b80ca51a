#include <doctest.h>

#include <cmath>
#include <random>

#include "nlcert/approx.hpp"
#include "nlcert/parser.hpp"

using namespace nlcert;

namespace {

std::mt19937_64 rng(5150);

std::vector<double> sample_box(const Box& box) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(box.size());
  for (size_t i = 0; i < box.size(); ++i)
    x[i] = box[i].lo + box[i].width() * u(rng);
  return x;
}

double fn_value(DictFn fn, double t) { return dictionary(fn).value(t); }

double sup_error_under(DictFn fn, const Interval& I, const Expr& under,
                       int grid = 2000) {
  double worst = 0.0;
  for (int i = 0; i <= grid; ++i) {
    double t = I.lo + I.width() * i / grid;
    worst = std::max(worst, fn_value(fn, t) - eval(under, {t}));
  }
  return worst;
}

}  // namespace

TEST_CASE("one-sided parabolas stay one-sided") {
  struct Case {
    DictFn fn;
    Interval I;
  };
  std::vector<Case> cases = {
      {DictFn::Arctan, Interval(-2.0, 2.0)}, {DictFn::Sin, Interval(0.0, 3.0)},
      {DictFn::Cos, Interval(-1.0, 2.0)},    {DictFn::Exp, Interval(-1.0, 1.0)},
      {DictFn::Log, Interval(0.5, 3.0)},
  };
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (const auto& c : cases) {
    for (int rep = 0; rep < 5; ++rep) {
      double a = c.I.lo + c.I.width() * u01(rng);
      Parabola lo = lower_parabola(c.fn, c.I, a);
      Parabola hi = upper_parabola(c.fn, c.I, a);
      // anchored: touches the function at a (to first order)
      CHECK(lo.eval(a) <= fn_value(c.fn, a) + 1e-12);
      CHECK(hi.eval(a) >= fn_value(c.fn, a) - 1e-12);
      CHECK(lo.eval(a) == doctest::Approx(fn_value(c.fn, a)).epsilon(1e-6));
      for (int i = 0; i <= 500; ++i) {
        double t = c.I.lo + c.I.width() * i / 500;
        CHECK(lo.eval(t) <= fn_value(c.fn, t) + 1e-10);
        CHECK(hi.eval(t) >= fn_value(c.fn, t) - 1e-10);
      }
      // the expression form matches the numeric form soundly
      Expr x = ExprNode::make_var(0);
      Expr le = lo.to_expr(x, c.I, true);
      Expr he = hi.to_expr(x, c.I, false);
      for (int i = 0; i <= 100; ++i) {
        double t = c.I.lo + c.I.width() * i / 100;
        CHECK(eval(le, {t}) <= fn_value(c.fn, t) + 1e-9);
        CHECK(eval(he, {t}) >= fn_value(c.fn, t) - 1e-9);
      }
    }
  }
}

TEST_CASE("maxplus sandwich and refinement monotonicity") {
  const Interval I(-1.0, 1.0);
  Expr x = ExprNode::make_var(0);
  std::vector<double> pts = {-0.5, 0.5};
  UnaryApprox two = maxplus_unary(DictFn::Arctan, I, pts, x);
  std::vector<double> pts3 = {-0.5, 0.1, 0.5};
  UnaryApprox three = maxplus_unary(DictFn::Arctan, I, pts3, x);
  for (int i = 0; i <= 1000; ++i) {
    double t = I.lo + I.width() * i / 1000;
    double f = std::atan(t);
    double u2 = eval(two.under, {t}), o2 = eval(two.over, {t});
    double u3 = eval(three.under, {t}), o3 = eval(three.over, {t});
    CHECK(u2 <= f + 1e-10);
    CHECK(o2 >= f - 1e-10);
    // adding a point never loosens either side
    CHECK(u3 >= u2 - 1e-10);
    CHECK(o3 <= o2 + 1e-10);
  }
}

TEST_CASE("maxplus error decays at the quadratic rate") {
  // sup-norm error of the N-point lower approximation of arctan on [-1,1]
  // must at least halve (factor 0.6) when N doubles.
  const Interval I(-1.0, 1.0);
  Expr x = ExprNode::make_var(0);
  auto uniform_points = [&](int n) {
    std::vector<double> pts;
    for (int i = 0; i < n; ++i)
      pts.push_back(I.lo + I.width() * (i + 0.5) / n);
    return pts;
  };
  double prev = -1.0;
  for (int n : {4, 8, 16, 32}) {
    UnaryApprox ua = maxplus_unary(DictFn::Arctan, I, uniform_points(n), x);
    double err = sup_error_under(DictFn::Arctan, I, ua.under);
    if (prev > 0.0) CHECK(err <= 0.6 * prev);
    prev = err;
  }
}

TEST_CASE("remez equioscillates and encloses") {
  for (int d : {3, 4, 5}) {
    MinimaxApprox ap = remez(DictFn::Exp, Interval(0.0, 1.0), d);
    CHECK(ap.equioscillated);
    CHECK(ap.eps_low >= 0.0);
    CHECK(ap.eps_high >= 0.0);
    // enclosure p - eps_low <= f <= p + eps_high on a fine grid
    const int grid = 4000;
    double emax = 0.0;
    std::vector<double> ts, errs;
    for (int i = 0; i <= grid; ++i) {
      double t = double(i) / grid;
      double err = std::exp(t) - ap.eval(t);
      CHECK(err <= ap.eps_high + 1e-12);
      CHECK(err >= -ap.eps_low - 1e-12);
      ts.push_back(t);
      errs.push_back(err);
      emax = std::max(emax, std::abs(err));
    }
    // equioscillation: at least d+2 alternating near-extremal touches
    int alternations = 0;
    int last_sign = 0;
    for (size_t i = 0; i < errs.size(); ++i) {
      if (std::abs(errs[i]) >= (1.0 - 1e-3) * emax) {
        int sign = errs[i] > 0.0 ? 1 : -1;
        if (sign != last_sign) {
          ++alternations;
          last_sign = sign;
        }
      }
    }
    CHECK(alternations >= d + 2);
  }
}

TEST_CASE("minimax unary sandwich") {
  Expr x = ExprNode::make_var(0);
  UnaryApprox ua = minimax_unary(DictFn::Sin, Interval(0.0, 2.0), 5, x);
  for (int i = 0; i <= 1000; ++i) {
    double t = 2.0 * i / 1000;
    CHECK(eval(ua.under, {t}) <= std::sin(t) + 1e-9);
    CHECK(eval(ua.over, {t}) >= std::sin(t) - 1e-9);
  }
}

TEST_CASE("interval unary is the constant sandwich") {
  Expr x = ExprNode::make_var(0);
  UnaryApprox ua = interval_unary(DictFn::Cos, Interval(0.0, 3.0));
  for (int i = 0; i <= 100; ++i) {
    double t = 3.0 * i / 100;
    CHECK(eval(ua.under, {t}) <= std::cos(t) + 1e-12);
    CHECK(eval(ua.over, {t}) >= std::cos(t) - 1e-12);
  }
}

TEST_CASE("hessian enclosure contains pointwise hessians") {
  Expr e = parse_expression("x^2*y + sin(x) - exp(y)/3", {"x", "y"});
  Box box = {Interval(-1.0, 1.0), Interval(0.0, 1.0)};
  IntervalMatrix h = hessian_enclosure(e, box);
  REQUIRE(h.size() == 2);
  for (int s = 0; s < 300; ++s) {
    auto x = sample_box(box);
    double h00 = 2.0 * x[1] - std::sin(x[0]);
    double h01 = 2.0 * x[0];
    double h11 = -std::exp(x[1]) / 3.0;
    CHECK(h(0, 0).contains(h00));
    CHECK(h(0, 1).contains(h01));
    CHECK(h(1, 1).contains(h11));
  }
}

TEST_CASE("eigenvalue chain on random smooth instances") {
  // lambda_coarse <= lambda_tight <= sampled min lambda_min(H(x) - H(xc)).
  std::vector<std::string> pool = {
      "x^3 + x*y^2 - 2*y",
      "sin(x)*y + x^2",
      "exp(x/2) + cos(y)*x",
      "x^2*y^2 - x + y",
      "arctan(x) + y^3/3",
      "x^4/4 + sin(x+y)",
  };
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto& text = pool[trial % pool.size()];
    CAPTURE(text);
    Expr e = parse_expression(text, {"x", "y"});
    Box box = {Interval(-1.0 + 0.05 * trial, 1.0), Interval(-1.0, 1.0)};
    std::vector<double> xc = sample_box(box);
    // enclosure of D(x) = H(x) - H(xc)
    IntervalMatrix hbox = hessian_enclosure(e, box);
    Box point_box = {Interval(xc[0]), Interval(xc[1])};
    IntervalMatrix hc = hessian_enclosure(e, point_box);
    IntervalMatrix d(2);
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) d.set(i, j, hbox(i, j) - hc(i, j));
    // Both are sound lower bounds on lambda_min over the enclosure; neither
    // dominates the other (sign-matrix vs. midpoint + Gershgorin radius).
    const double l_tight = lambda_tight(d);
    const double l_coarse = lambda_coarse(d);
    double sampled = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 1000; ++s) {
      auto x = sample_box(box);
      IntervalMatrix hx =
          hessian_enclosure(e, {Interval(x[0]), Interval(x[1])});
      Eigen::Matrix2d m;
      m << hx(0, 0).mid() - hc(0, 0).mid(), hx(0, 1).mid() - hc(0, 1).mid(),
          hx(0, 1).mid() - hc(0, 1).mid(), hx(1, 1).mid() - hc(1, 1).mid();
      sampled = std::min(
          sampled,
          Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m).eigenvalues()(0));
    }
    CHECK(l_tight <= sampled + 1e-9);
    CHECK(l_coarse <= sampled + 1e-9);
  }
}

TEST_CASE("quadratic templates stay below the function") {
  std::vector<std::string> pool = {
      "sin(x) + y^2",
      "exp(x) - x*y",
      // Note: arctan(x*y) is avoided here; its second derivative has a
      // 1/(1 + x^2 y^2)^2 factor whose naive interval evaluation straddles 0.
      "arctan(x + y)",
  };
  for (const auto& text : pool) {
    CAPTURE(text);
    Expr e = parse_expression(text, {"x", "y"});
    Box box = {Interval(-1.0, 1.0), Interval(-1.0, 1.0)};
    std::vector<double> xc = {0.2, -0.3};
    Poly q = quadratic_template(e, box, xc);
    for (int s = 0; s < 3000; ++s) {
      auto x = sample_box(box);
      CHECK(q.eval(x) <= eval(e, x) + 1e-9);
    }
    auto [under, over] = quadratic_template_pair(e, box, {xc, {0.0, 0.0}});
    for (int s = 0; s < 3000; ++s) {
      auto x = sample_box(box);
      double v = eval(e, x);
      CHECK(eval(under, x) <= v + 1e-9);
      CHECK(eval(over, x) >= v - 1e-9);
    }
  }
}

TEST_CASE("l1 underapproximation of a polynomial recovers it") {
  // f already of degree d: the best degree-d underapproximation is f itself.
  Expr e = parse_expression("x^2 - x*y + y/2", {"x", "y"});
  Box box = {Interval(0.0, 1.0), Interval(0.0, 1.0)};
  L1Underapprox lu = l1_underapprox(e, box, 2, 2);
  REQUIRE(lu.status == SdpStatus::Optimal);
  // int over [0,1]^2 of x^2 - xy + y/2 = 1/3 - 1/4 + 1/4 = 1/3.
  CHECK(lu.integral == doctest::Approx(1.0 / 3.0).epsilon(1e-5));
  for (int s = 0; s < 2000; ++s) {
    auto u = sample_box({Interval(0.0, 1.0), Interval(0.0, 1.0)});
    double fv = u[0] * u[0] - u[0] * u[1] + u[1] / 2.0;
    double hv = lu.h.eval(u) + lu.rigor_shift;
    CHECK(hv <= fv + 1e-5);
    CHECK(hv >= fv - 1e-3);  // tight: recovers f up to solver accuracy
  }
}

TEST_CASE("l1 underapproximation of a semialgebraic function is sound") {
  Expr e = parse_expression("sqrt(x + y)", {"x", "y"});
  Box box = {Interval(0.5, 2.0), Interval(0.5, 2.0)};
  L1Underapprox lu = l1_underapprox(e, box, 2, 2);
  REQUIRE(lu.status == SdpStatus::Optimal);
  double mean_gap = 0.0;
  const int N = 5000;
  for (int s = 0; s < N; ++s) {
    auto x = sample_box(box);
    // h lives in normalized [0,1]^2 coordinates
    std::vector<double> u(2);
    for (int i = 0; i < 2; ++i) u[i] = (x[i] - lu.shift[i]) / lu.scale[i];
    double hv = lu.h.eval(u) + lu.rigor_shift;
    double fv = std::sqrt(x[0] + x[1]);
    CHECK(hv <= fv + 1e-6);
    mean_gap += fv - hv;
  }
  CHECK(mean_gap / N < 0.05);  // degree-2 fit of a smooth root is tight
}
