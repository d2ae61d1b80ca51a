#pragma once

#include "nlcert/expr.hpp"
#include "nlcert/sos.hpp"

namespace nlcert {

struct LiftOptions {
  /// 0: bound lifted variables by interval arithmetic only; k >= 1 also runs
  /// auxiliary order-k relaxations on x-only arguments to tighten the bounds
  /// (needed whenever plain interval arithmetic lets a sqrt argument or a
  /// denominator enclosure cross zero even though the function is defined).
  int zbound_order = 1;
  /// Encode sup/inf nodes on monotone objective paths with inequalities only;
  /// sound for one-sided bounds and avoids the degree-doubling touch product.
  bool monotone_minmax = true;
  /// Denominators whose interval range comes within this relative margin of
  /// zero are rejected.
  double div_margin_rel = 1e-9;
  double sdp_tol = 1e-8;
  int sdp_max_iter = 200;
  /// Additional polynomial constraints g(x) >= 0 in the original variables,
  /// appended to the lifted POP by min_sa / max_sa.
  std::vector<Poly> extra_inequalities;
};

/// A semialgebraic expression turned into a polynomial optimization problem
/// over the original variables plus lifting variables, one per distinct
/// non-polynomial node (sqrt, abs, min, max, division, fractional power).
/// The lifted feasible set projects onto (a superset of) the graph of the
/// expression, so minima of the lifted POP lower-bound the expression.
struct LiftedPop {
  PopProblem pop;  // dimension n_x + n_z
  int n_x = 0;
  int n_z = 0;
  std::vector<Interval> full_box;    // x box followed by z bounds
  std::vector<std::string> z_keys;   // structural key per lifting variable
};

LiftedPop lift(const Expr& f, const std::vector<Interval>& box,
               const LiftOptions& opts = {});

/// Number of lifting variables `lift` would introduce for this expression.
int lifting_count(const Expr& f);

/// Result of a one-sided semialgebraic bound computed through lifting plus
/// the order-k moment relaxation on the [0,1]-normalized lifted POP.
struct SaBound {
  SdpStatus status = SdpStatus::NumericalFailure;
  double bound = 0.0;            // lower bound for min_sa, upper for max_sa
  std::vector<double> x_guess;   // clamped first moments, original coords
  int order = 0;
  LiftedPop lifted;
  PopSolution sol;               // in normalized coordinates
  PopProblem normalized_pop;     // what was actually relaxed
  std::vector<double> shift, scale;  // x = shift + scale .* u
};

SaBound min_sa(const Expr& f, const std::vector<Interval>& box, int k,
               const LiftOptions& opts = {});
SaBound max_sa(const Expr& f, const std::vector<Interval>& box, int k,
               const LiftOptions& opts = {});

}  // namespace nlcert
