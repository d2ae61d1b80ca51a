#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "nlcert/sdp.hpp"

using namespace nlcert;

namespace {

// min <C, X> s.t. tr(X) = 1, X >= 0 has optimum lambda_min(C).
SdpProblem trace_one_problem(const Eigen::MatrixXd& c) {
  const int n = static_cast<int>(c.rows());
  SdpProblem p;
  p.block_sizes = {n};
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      if (c(i, j) != 0.0) p.cost.push_back({0, i, j, c(i, j)});
  std::vector<SdpProblem::Entry> tr;
  for (int i = 0; i < n; ++i) tr.push_back({0, i, i, 1.0});
  p.constraints.push_back(tr);
  p.rhs = Eigen::VectorXd::Ones(1);
  return p;
}

}  // namespace

TEST_CASE("trace-normalized eigenvalue problem") {
  Eigen::MatrixXd c(3, 3);
  c << 2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0;
  SdpProblem p = trace_one_problem(c);
  p.validate();
  SdpSolution s = solve(p);
  REQUIRE(s.status == SdpStatus::Optimal);
  const double lmin = 2.0 - std::sqrt(2.0);
  CHECK(s.primal_objective == doctest::Approx(lmin).epsilon(1e-6));
  CHECK(s.dual_objective == doctest::Approx(lmin).epsilon(1e-6));
  CHECK(s.primal_residual < 1e-7);
  CHECK(s.dual_residual < 1e-7);
  CHECK(s.duality_gap < 1e-6);
  // primal block is PSD and satisfies the trace constraint
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.X[0]);
  CHECK(es.eigenvalues().minCoeff() > -1e-8);
  CHECK(s.X[0].trace() == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("diagonal blocks reduce to linear programming") {
  // min x0 + 2 x1  s.t. x0 + x1 = 1, x0 - x1 = 0.2, x >= 0 (two 1-blocks).
  SdpProblem p;
  p.block_sizes = {1, 1};
  p.cost = {{0, 0, 0, 1.0}, {1, 0, 0, 2.0}};
  p.constraints = {{{0, 0, 0, 1.0}, {1, 0, 0, 1.0}},
                   {{0, 0, 0, 1.0}, {1, 0, 0, -1.0}}};
  p.rhs = Eigen::VectorXd(2);
  p.rhs << 1.0, 0.2;
  SdpSolution s = solve(p);
  REQUIRE(s.status == SdpStatus::Optimal);
  CHECK(s.X[0](0, 0) == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(s.X[1](0, 0) == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(s.primal_objective == doctest::Approx(1.4).epsilon(1e-6));
}

TEST_CASE("free variables participate in constraints and cost") {
  // min X + 0*u  s.t. X + u = 1, X - u = 0 -> X = u = 1/2.
  SdpProblem p;
  p.block_sizes = {1};
  p.cost = {{0, 0, 0, 1.0}};
  p.constraints = {{{0, 0, 0, 1.0}}, {{0, 0, 0, 1.0}}};
  p.rhs = Eigen::VectorXd(2);
  p.rhs << 1.0, 0.0;
  p.free_vars = {{{0, 1.0}, {1, -1.0}}};
  p.free_cost = Eigen::VectorXd::Zero(1);
  p.validate();
  SdpSolution s = solve(p);
  REQUIRE(s.status == SdpStatus::Optimal);
  CHECK(s.X[0](0, 0) == doctest::Approx(0.5).epsilon(1e-6));
  REQUIRE(s.u.size() == 1);
  CHECK(s.u(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(s.primal_objective == doctest::Approx(0.5).epsilon(1e-6));

  // Free cost shifts the objective: min X + 3u with the same constraints.
  p.free_cost(0) = 3.0;
  SdpSolution s2 = solve(p);
  REQUIRE(s2.status == SdpStatus::Optimal);
  CHECK(s2.primal_objective == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("primal infeasibility is detected") {
  // X11 = -1 with X >= 0 is infeasible.
  SdpProblem p;
  p.block_sizes = {1};
  p.constraints = {{{0, 0, 0, 1.0}}};
  p.rhs = Eigen::VectorXd(1);
  p.rhs << -1.0;
  SdpSolution s = solve(p);
  CHECK(s.status == SdpStatus::PrimalInfeasibleCertificate);
}

TEST_CASE("dual infeasibility (unbounded primal) is detected") {
  // min -X11 s.t. X22 = 1: X11 can grow without bound.
  SdpProblem p;
  p.block_sizes = {2};
  p.cost = {{0, 0, 0, -1.0}};
  p.constraints = {{{0, 1, 1, 1.0}}};
  p.rhs = Eigen::VectorXd(1);
  p.rhs << 1.0;
  SdpSolution s = solve(p);
  CHECK(s.status == SdpStatus::DualInfeasibleCertificate);
}

TEST_CASE("random strictly feasible problems solve to tolerance") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3, m = 4;
    SdpProblem p;
    p.block_sizes = {n};
    // C = I + R'R is PD, so the primal is bounded below on the PSD cone.
    Eigen::MatrixXd r(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r(i, j) = g(rng);
    Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n) + r.transpose() * r;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) p.cost.push_back({0, i, j, c(i, j)});
    // b = A(X0) for PD X0 guarantees strict primal feasibility.
    Eigen::MatrixXd x0 = Eigen::MatrixXd::Identity(n, n);
    p.rhs = Eigen::VectorXd(m);
    for (int k = 0; k < m; ++k) {
      Eigen::MatrixXd a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = g(rng);
      a = 0.5 * (a + a.transpose()).eval();
      std::vector<SdpProblem::Entry> row;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) row.push_back({0, i, j, a(i, j)});
      p.constraints.push_back(row);
      p.rhs(k) = (a * x0).trace();
    }
    SdpSolution s = solve(p);
    REQUIRE(s.status == SdpStatus::Optimal);
    CHECK(s.primal_residual < 1e-6);
    CHECK(s.dual_residual < 1e-6);
    CHECK(s.duality_gap < 1e-5);
    CHECK(std::abs(s.primal_objective - s.dual_objective) <
          1e-5 * (1.0 + std::abs(s.primal_objective)));
  }
}

TEST_CASE("validate rejects malformed problems") {
  SdpProblem p;
  p.block_sizes = {2};
  p.constraints = {{{0, 1, 0, 1.0}}};  // row > col
  p.rhs = Eigen::VectorXd::Ones(1);
  CHECK_THROWS(p.validate());

  SdpProblem q;
  q.block_sizes = {1};
  q.constraints = {{{0, 0, 0, 1.0}}};
  q.rhs = Eigen::VectorXd::Ones(2);  // rhs length mismatch
  CHECK_THROWS(q.validate());

  SdpProblem f;
  f.block_sizes = {1};
  f.constraints = {{{0, 0, 0, 1.0}}};
  f.rhs = Eigen::VectorXd::Ones(1);
  f.free_vars = {{{5, 1.0}}};  // constraint index out of range
  f.free_cost = Eigen::VectorXd::Zero(1);
  CHECK_THROWS(f.validate());
}

TEST_CASE("sdpa text round trip is exact") {
  Eigen::MatrixXd c(2, 2);
  c << 1.25, -0.7531, -0.7531, 3.0e-7;
  SdpProblem p = trace_one_problem(c);
  p.block_sizes.push_back(1);  // extra linear block
  p.cost.push_back({1, 0, 0, 0.125});
  p.constraints[0].push_back({1, 0, 0, -2.0});
  std::string text = export_sdpa(p);
  SdpProblem q = import_sdpa(text);
  CHECK(q.block_sizes == p.block_sizes);
  REQUIRE(q.constraints.size() == p.constraints.size());
  CHECK((q.rhs - p.rhs).norm() == 0.0);
  CHECK(export_sdpa(q) == text);  // bit-exact round trip
  SdpSolution sp = solve(p), sq = solve(q);
  CHECK(sp.primal_objective == sq.primal_objective);
}

TEST_CASE("sdpa export rejects free variables") {
  SdpProblem p;
  p.block_sizes = {1};
  p.constraints = {{{0, 0, 0, 1.0}}};
  p.rhs = Eigen::VectorXd::Ones(1);
  p.free_vars = {{{0, 1.0}}};
  p.free_cost = Eigen::VectorXd::Zero(1);
  CHECK_THROWS(export_sdpa(p));
}
