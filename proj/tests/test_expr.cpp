#include <doctest.h>

#include <cmath>
#include <random>

#include "nlcert/expr.hpp"
#include "nlcert/parser.hpp"

using namespace nlcert;

namespace {

std::mt19937_64 rng(4242);

std::vector<double> sample_box(const Box& box) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(box.size());
  for (size_t i = 0; i < box.size(); ++i)
    x[i] = box[i].lo + box[i].width() * u(rng);
  return x;
}

}  // namespace

TEST_CASE("expression building and evaluation") {
  Expr x = ExprNode::make_var(0), y = ExprNode::make_var(1);
  Expr e = x * x + 2.0 * y - 1.0;
  CHECK(eval(e, {3.0, 0.5}) == doctest::Approx(9.0));
  CHECK(max_var(e) == 2);
  CHECK(is_semialgebraic(e));
  Expr t = ExprNode::make_dict(DictFn::Arctan, x);
  CHECK(!is_semialgebraic(t + y));
  CHECK(eval(t, {1.0}) == doctest::Approx(std::atan(1.0)));
}

TEST_CASE("constant folding in make_binary") {
  Expr c = ExprNode::make_binary(ExprKind::Add, ExprNode::make_constant(2.0),
                                 ExprNode::make_constant(3.0));
  CHECK(c->kind == ExprKind::Constant);
  CHECK(c->constant.to_double() == 5.0);
}

TEST_CASE("structural keys identify equal subtrees") {
  Expr x = ExprNode::make_var(0);
  Expr a = ExprNode::make_dict(DictFn::Sin, x * x + 1.0);
  Expr b = ExprNode::make_dict(DictFn::Sin, x * x + 1.0);
  Expr c = ExprNode::make_dict(DictFn::Sin, x * x + 2.0);
  CHECK(a->key() == b->key());
  CHECK(a->key() != c->key());
}

TEST_CASE("parser round trip on a mixed expression") {
  Problem p = parse_problem(
      "# demo\n"
      "var x in [0.5, 2];\n"
      "var y in [-1, 1];\n"
      "objective x*sin(sqrt(x)) + arctan(y) - x^2/4 + min(x, y);\n"
      "constraint x + y >= 0;\n");
  REQUIRE(p.var_names.size() == 2);
  REQUIRE(p.constraints.size() == 1);
  for (int s = 0; s < 100; ++s) {
    auto v = sample_box(p.box);
    double expected = v[0] * std::sin(std::sqrt(v[0])) + std::atan(v[1]) -
                      v[0] * v[0] / 4.0 + std::min(v[0], v[1]);
    CHECK(eval(p.objective, v) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_problem("var x in [0, 1];\nobjective x +;\n"),
                  ParseError);
  try {
    parse_problem("var x in [0, 1];\nobjective x +;\n");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_expression("unknownfn(x)", {"x"}), ParseError);
}

TEST_CASE("pi constant and powers parse") {
  Expr e = parse_expression("pi * x^3 + x^(1/2)", {"x"});
  CHECK(eval(e, {4.0}) ==
        doctest::Approx(3.141592653589793 * 64.0 + 2.0).epsilon(1e-12));
}

TEST_CASE("differentiate matches finite differences") {
  std::vector<std::string> vars = {"x", "y"};
  std::vector<std::string> cases = {
      "x^3 + 2*x*y",      "sin(x*y) + cos(x)", "exp(x) * log(y + 2)",
      "arctan(x + y)",    "sqrt(x + 3)",       "x / (y + 3)",
  };
  for (const auto& s : cases) {
    Expr e = parse_expression(s, vars);
    for (int i = 0; i < 2; ++i) {
      Expr d = differentiate(e, i);
      for (int t = 0; t < 20; ++t) {
        std::uniform_real_distribution<double> u(0.2, 1.5);
        std::vector<double> x = {u(rng), u(rng)};
        const double h = 1e-6;
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        double fd = (eval(e, xp) - eval(e, xm)) / (2.0 * h);
        CHECK(eval(d, x) == doctest::Approx(fd).epsilon(1e-4));
      }
    }
  }
  Expr na = parse_expression("abs(x)", {"x"});
  CHECK_THROWS(differentiate(na, 0));
}

TEST_CASE("interval_eval encloses sampled values") {
  std::vector<std::string> vars = {"x", "y"};
  std::vector<std::string> cases = {
      "x*y - sin(x)",  "sqrt(x + 2) * arctan(y)", "exp(-x^2) + cos(x*y)",
      "abs(x - y)",    "max(x, y^2) + min(x, 1)", "x / (y + 4)",
  };
  Box box = {Interval(-1.0, 1.5), Interval(0.0, 2.0)};
  for (const auto& s : cases) {
    Expr e = parse_expression(s, vars);
    Interval range = interval_eval(e, box);
    for (int t = 0; t < 300; ++t) {
      auto x = sample_box(box);
      CHECK(range.contains(eval(e, x)));
    }
  }
}

TEST_CASE("clipped evaluation survives domain overshoot") {
  // Plain interval arithmetic on x - y over [0,1]^2 yields [-1,1], so
  // sqrt(1 + (x - y)) would see [0, 2] anyway; force an overshoot instead:
  // sqrt(x^2) with x in [-1, 1] is defined everywhere, and sqrt(x) with
  // x in [-0.5, 4] is defined wherever x >= 0 and must be enclosed there.
  Expr e = parse_expression("sqrt(x)", {"x"});
  Box box = {Interval(-0.5, 4.0)};
  Interval r = interval_eval_clipped(e, box);
  CHECK(r.lo <= 0.0);
  CHECK(r.hi >= 2.0);
  CHECK_THROWS_AS(interval_eval(e, box), DomainError);

  Expr lg = parse_expression("log(x)", {"x"});
  CHECK_THROWS_AS(interval_eval_clipped(lg, {Interval(-2.0, -1.0)}),
                  DomainError);
}

TEST_CASE("to_poly converts polynomial expressions and rejects the rest") {
  Expr e = parse_expression("x^2*y - 3*y + 1/2", {"x", "y"});
  auto p = to_poly(e, 2);
  REQUIRE(p.has_value());
  for (int t = 0; t < 50; ++t) {
    auto x = sample_box({Interval(-2.0, 2.0), Interval(-2.0, 2.0)});
    CHECK(p->eval(x) == doctest::Approx(eval(e, x)).epsilon(1e-12));
  }
  CHECK(!to_poly(parse_expression("sqrt(x)", {"x"}), 1).has_value());
  CHECK(!to_poly(parse_expression("sin(x)", {"x"}), 1).has_value());
  CHECK(!to_poly(parse_expression("x / y", {"x", "y"}), 2).has_value());
}

TEST_CASE("dictionary oracle sanity") {
  const auto& atan_e = dictionary(DictFn::Arctan);
  CHECK(atan_e.monotonicity(Interval(-10.0, 10.0)) ==
        Monotonicity::Increasing);
  const auto& sin_e = dictionary(DictFn::Sin);
  CHECK(sin_e.monotonicity(Interval(0.0, 1.0)) == Monotonicity::Increasing);
  CHECK(sin_e.monotonicity(Interval(0.0, 3.14159)) == Monotonicity::Unknown);
  CHECK(dictionary_lookup("arctan").has_value());
  CHECK(dictionary_lookup("cos").has_value());
  CHECK(!dictionary_lookup("tanh").has_value());
  // value/derivative consistency at a point
  CHECK(sin_e.d1(0.3) == doctest::Approx(std::cos(0.3)));
  CHECK(atan_e.d2(0.5) ==
        doctest::Approx(-2.0 * 0.5 / ((1.0 + 0.25) * (1.0 + 0.25))));
}
