#include <doctest.h>

#include <cmath>
#include <random>

#include "nlcert/sos.hpp"

using namespace nlcert;

namespace {

std::mt19937_64 rng(31337);

// Global minimum of a polynomial over [0,1]^n by dense grid + refinement.
double grid_min(const Poly& p, int per_axis = 200) {
  const int n = p.dim();
  REQUIRE(n <= 2);
  double best = std::numeric_limits<double>::infinity();
  if (n == 1) {
    for (int i = 0; i <= per_axis; ++i)
      best = std::min(best, p.eval({double(i) / per_axis}));
  } else {
    for (int i = 0; i <= per_axis; ++i)
      for (int j = 0; j <= per_axis; ++j)
        best = std::min(
            best, p.eval({double(i) / per_axis, double(j) / per_axis}));
  }
  return best;
}

}  // namespace

TEST_CASE("min_order covers objective and constraint degrees") {
  PopProblem pop;
  pop.n = 2;
  pop.objective = Poly::variable(2, 0) * Poly::variable(2, 0) *
                  Poly::variable(2, 0);  // degree 3
  CHECK(min_order(pop) == 2);
  Poly g = Poly::variable(2, 1);
  pop.inequalities.push_back(g * g * g * g);  // degree 4
  CHECK(min_order(pop) == 2);
  pop.equalities.push_back(g * g * g * g * g);  // degree 5
  CHECK(min_order(pop) == 3);
}

TEST_CASE("normalize_to_unit_box preserves values") {
  PopProblem pop;
  pop.n = 2;
  Poly x = Poly::variable(2, 0), y = Poly::variable(2, 1);
  pop.objective = x * x - y * 3.0;
  pop.inequalities.push_back(x + y);
  pop.equalities.push_back(x - y);
  std::vector<Interval> box = {Interval(-2.0, 4.0), Interval(1.0, 3.0)};
  NormalizedPop np = normalize_to_unit_box(pop, box);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int s = 0; s < 50; ++s) {
    std::vector<double> u = {u01(rng), u01(rng)};
    std::vector<double> xx = {np.shift[0] + np.scale[0] * u[0],
                              np.shift[1] + np.scale[1] * u[1]};
    CHECK(np.pop.objective.eval(u) ==
          doctest::Approx(pop.objective.eval(xx)).epsilon(1e-10));
    CHECK(np.pop.inequalities[0].eval(u) ==
          doctest::Approx(pop.inequalities[0].eval(xx)).epsilon(1e-10));
    CHECK(np.pop.equalities[0].eval(u) ==
          doctest::Approx(pop.equalities[0].eval(xx)).epsilon(1e-10));
  }
}

TEST_CASE("unconstrained-over-box univariate minimum") {
  // f(u) = (u - 0.3)^2 (u + 0.2)^2 on [0,1]: global min 0 at u = 0.3.
  Poly u = Poly::variable(1, 0);
  Poly f = (u - Poly::constant(1, 0.3)) * (u - Poly::constant(1, 0.3)) *
           (u + Poly::constant(1, 0.2)) * (u + Poly::constant(1, 0.2));
  PopProblem pop{1, f, {}, {}};
  add_box01_inequalities(pop);
  PopSolution s = solve_pop(pop, 2);
  REQUIRE(s.status == SdpStatus::Optimal);
  CHECK(s.bound == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(s.bound <= 1e-6);  // never above the true minimum
  auto xg = extract_minimizer(s, {Interval(0.0, 1.0)});
  CHECK(xg[0] == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("inequality constraints bind") {
  // min u^2 s.t. u - 0.5 >= 0 on [0,1] -> 0.25 at u = 0.5.
  Poly u = Poly::variable(1, 0);
  PopProblem pop{1, u * u, {u - Poly::constant(1, 0.5)}, {}};
  add_box01_inequalities(pop);
  PopSolution s = solve_pop(pop, 2);
  REQUIRE(s.status == SdpStatus::Optimal);
  CHECK(s.bound == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("equality constraints use free multipliers") {
  // min u s.t. u^2 = 0.25 on [0,1] -> 0.5.
  Poly u = Poly::variable(1, 0);
  PopProblem pop{1, u, {}, {u * u - Poly::constant(1, 0.25)}};
  add_box01_inequalities(pop);
  PopSolution s = solve_pop(pop, 2);
  REQUIRE(s.status == SdpStatus::Optimal);
  CHECK(s.bound == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(s.eq_coeffs.size() > 0);

  // Two variables linked by an equality: min x + y s.t. y = x^2 on [0,1]^2.
  Poly x = Poly::variable(2, 0), y = Poly::variable(2, 1);
  PopProblem pop2{2, x + y, {}, {y - x * x}};
  add_box01_inequalities(pop2);
  PopSolution s2 = solve_pop(pop2, 2);
  REQUIRE(s2.status == SdpStatus::Optimal);
  CHECK(s2.bound == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("lasserre hierarchy is monotone in the order") {
  // Nonconvex bivariate instance; bounds must be non-decreasing in k and
  // never exceed the true minimum.
  Poly x = Poly::variable(2, 0), y = Poly::variable(2, 1);
  Poly f = x * x * y * y * 4.0 - x * y * 3.0 + x * x * x - y * 2.0 +
           Poly::constant(2, 1.0);
  PopProblem pop{2, f, {}, {}};
  add_box01_inequalities(pop);
  const double truth = grid_min(f);
  double prev = -std::numeric_limits<double>::infinity();
  for (int k = 2; k <= 4; ++k) {
    PopSolution s = solve_pop(pop, k);
    REQUIRE(s.status == SdpStatus::Optimal);
    CHECK(s.bound >= prev - 1e-5);  // solver tolerance slack
    CHECK(s.bound <= truth + 1e-6);
    prev = s.bound;
  }
  CHECK(prev == doctest::Approx(truth).epsilon(1e-4));
}

TEST_CASE("certificates extract, verify, and bound rigorously") {
  Poly x = Poly::variable(2, 0), y = Poly::variable(2, 1);
  Poly f = (x - y) * (x - y) + x * 0.5 + Poly::constant(2, 0.1);
  PopProblem pop{2, f, {}, {}};
  add_box01_inequalities(pop);
  const int k = 2;
  PopSolution s = solve_pop(pop, k);
  REQUIRE(s.status == SdpStatus::Optimal);
  Relaxation rel = build_relaxation(pop, k);
  Certificate c = extract_certificate(pop, rel, s);
  std::vector<Interval> unit(2, Interval(0.0, 1.0));
  VerifyResult vr = verify_certificate(c, unit);
  CHECK(vr.certified);
  const double truth = grid_min(f);
  CHECK(vr.mu_rigorous <= truth + 1e-9);
  CHECK(vr.mu_rigorous == doctest::Approx(truth).epsilon(1e-5));
  CHECK(vr.residual_l1 < 1e-6);

  // Tampering with the claimed bound must not stay certified at the same mu.
  Certificate bad = c;
  bad.mu += 0.5;
  VerifyResult vb = verify_certificate(bad, unit);
  CHECK(vb.mu_rigorous <= truth + 1e-9);  // still sound after repair
}

TEST_CASE("certificate verification covers equality multipliers") {
  Poly u = Poly::variable(1, 0);
  PopProblem pop{1, u, {}, {u * u - Poly::constant(1, 0.25)}};
  add_box01_inequalities(pop);
  PopSolution s = solve_pop(pop, 2);
  REQUIRE(s.status == SdpStatus::Optimal);
  Relaxation rel = build_relaxation(pop, 2);
  Certificate c = extract_certificate(pop, rel, s);
  CHECK(c.equalities.size() == 1);
  CHECK(c.eq_multipliers.size() == 1);
  std::vector<Interval> unit(1, Interval(0.0, 1.0));
  VerifyResult vr = verify_certificate(c, unit);
  CHECK(vr.mu_rigorous <= 0.5 + 1e-9);
  CHECK(vr.mu_rigorous == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("certificate json round trip re-verifies") {
  Poly x = Poly::variable(2, 0), y = Poly::variable(2, 1);
  PopProblem pop{2, x * x + y * y - x * y, {x + y - Poly::constant(2, 0.5)},
                 {y - x * x}};
  add_box01_inequalities(pop);
  PopSolution s = solve_pop(pop, 2);
  REQUIRE(s.status == SdpStatus::Optimal);
  Relaxation rel = build_relaxation(pop, 2);
  Certificate c = extract_certificate(pop, rel, s);
  std::string text = certificate_to_json(c);
  Certificate c2 = certificate_from_json(text);
  CHECK(c2.n == c.n);
  CHECK(c2.order == c.order);
  CHECK(c2.mu == c.mu);
  CHECK(c2.bases.size() == c.bases.size());
  CHECK(c2.equalities.size() == c.equalities.size());
  CHECK(c2.eq_multipliers.size() == c.eq_multipliers.size());
  std::vector<Interval> unit(2, Interval(0.0, 1.0));
  VerifyResult v1 = verify_certificate(c, unit);
  VerifyResult v2 = verify_certificate(c2, unit);
  CHECK(v1.mu_rigorous == doctest::Approx(v2.mu_rigorous).epsilon(1e-12));
  CHECK(v1.certified == v2.certified);
}

TEST_CASE("rigorous_lambda_min is a sound eigenvalue lower bound") {
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + int(rng() % 5);
    Eigen::MatrixXd r(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r(i, j) = g(rng);
    Eigen::MatrixXd m = 0.5 * (r + r.transpose());
    if (trial % 2 == 0) m += 3.0 * Eigen::MatrixXd::Identity(n, n);
    const double truth =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues()(0);
    const double lb = rigorous_lambda_min(m);
    CHECK(lb <= truth + 1e-12);
    CHECK(lb >= truth - 1e-6 * (1.0 + std::abs(truth)));
  }
}

TEST_CASE("fixed moments fold into the objective") {
  // With all x-moments fixed to the unit-box values and objective u, the
  // relaxation value equals int_0^1 u du = 1/2 when the POP forces nothing.
  Poly u = Poly::variable(1, 0);
  PopProblem pop{1, u, {}, {}};
  add_box01_inequalities(pop);
  FixedMoments fixed;
  fixed[{1}] = 0.5;
  Relaxation rel = build_relaxation(pop, 2, &fixed);
  CHECK(rel.fixed_objective == doctest::Approx(0.5));
}
