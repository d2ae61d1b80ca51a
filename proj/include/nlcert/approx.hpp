#pragma once

#include "nlcert/expr.hpp"
#include "nlcert/lift.hpp"
#include "nlcert/sos.hpp"

namespace nlcert {

/// One-sided quadratic bound q(t) = alpha + beta (t - a) + curv (t - a)^2,
/// anchored at a. Coefficients are rounded toward soundness: a lower parabola
/// stays below the function everywhere on its construction interval.
struct Parabola {
  double a = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double curv = 0.0;
  double eval(double t) const { return alpha + (t - a) * (beta + curv * (t - a)); }
  /// Expand into an expression in `arg` with exact dyadic constants; any
  /// non-representable coefficient is perturbed toward soundness.
  Expr to_expr(const Expr& arg, const Interval& range, bool lower) const;
};

Parabola lower_parabola(DictFn fn, const Interval& I, double a);
Parabola upper_parabola(DictFn fn, const Interval& I, double a);

/// Minimax polynomial approximation of a dictionary function on I with a
/// certified two-sided error: p - eps_low <= f <= p + eps_high on I.
struct MinimaxApprox {
  double center = 0.0;
  std::vector<double> coeffs;  // p(t) = sum_i coeffs[i] (t - center)^i
  double eps_low = 0.0, eps_high = 0.0;
  bool equioscillated = false;  // exchange iteration reached its tolerance
  double eval(double t) const;
};
MinimaxApprox remez(DictFn fn, const Interval& I, int degree);

/// Semialgebraic under/over pair for a dictionary function of `arg`,
/// valid whenever arg takes values in I.
struct UnaryApprox {
  Expr under, over;
};
UnaryApprox maxplus_unary(DictFn fn, const Interval& I,
                          const std::vector<double>& points, const Expr& arg);
UnaryApprox minimax_unary(DictFn fn, const Interval& I, int degree,
                          const Expr& arg);
UnaryApprox interval_unary(DictFn fn, const Interval& I);

/// Interval Hessian over a box, by symbolic differentiation plus interval
/// evaluation. Throws if the expression is not twice differentiable.
IntervalMatrix hessian_enclosure(const Expr& e, const std::vector<Interval>& box);

/// Curvature shifts for the quadratic templates: certified lower bounds on
/// lambda_min over an interval matrix enclosure D of H(x) - H(xc).
/// The tight variant maximizes lambda_max(S B S) over the 2^{n-1} sign
/// matrices S with B_ij = max(|lo|, |hi|) of D_ij (guarded to n <= 12);
/// the coarse variant is lambda_min(mid) minus a Gershgorin radius bound.
double lambda_tight(const IntervalMatrix& d);
double lambda_coarse(const IntervalMatrix& d);

/// Rigorous quadratic underestimator of a twice-differentiable expression:
/// second-order Taylor at xc plus lambda/2 |x - xc|^2 with a certified
/// curvature shift, interval-rounded so q <= e holds on the whole box.
Poly quadratic_template(const Expr& e, const std::vector<Interval>& box,
                        const std::vector<double>& xc, bool tight_lambda = true);

/// Expression form of a sparse polynomial (constants snap to dyadics).
Expr expr_from_poly(const Poly& p);

/// Max of quadratic templates anchored at `points` (under) and min of the
/// negated construction on -e (over).
std::pair<Expr, Expr> quadratic_template_pair(
    const Expr& e, const std::vector<Interval>& box,
    const std::vector<std::vector<double>>& points, bool tight_lambda = true);

/// Best L1 polynomial underapproximation of a semialgebraic function:
/// maximize int_{[0,1]^n} h subject to f_sa - h having a degree-2k
/// Positivstellensatz certificate on the lifted set, with h of degree <= d.
struct L1Underapprox {
  Poly h;                 // in normalized [0,1]^n coordinates
  double integral = 0.0;  // value of int h = the hierarchy objective
  double rigor_shift = 0.0;  // h + rigor_shift <= f_sa rigorously (<= 0)
  SdpStatus status = SdpStatus::NumericalFailure;
  std::vector<double> shift, scale;  // x = shift + scale .* u
};
L1Underapprox l1_underapprox(const Expr& f_sa, const std::vector<Interval>& box,
                             int d, int k, const LiftOptions& opts = {});

}  // namespace nlcert
