#include "nlcert/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace nlcert {

namespace {

/// Constant expression guaranteed to evaluate at or below v (for lower
/// approximations) — make_constant may snap off-grid doubles by <= 2^-63.
Expr const_below(double v) {
  double t = v;
  for (int i = 0; i < 8; ++i) {
    Expr e = ExprNode::make_constant(t);
    if (e->constant.to_interval().hi <= v) return e;
    t = (Interval(t) - Interval(std::exp2(-60.0) * (1.0 + std::abs(v)))).lo;
  }
  throw std::logic_error("const_below: could not round down");
}

Expr const_above(double v) {
  double t = v;
  for (int i = 0; i < 8; ++i) {
    Expr e = ExprNode::make_constant(t);
    if (e->constant.to_interval().lo >= v) return e;
    t = (Interval(t) + Interval(std::exp2(-60.0) * (1.0 + std::abs(v)))).hi;
  }
  throw std::logic_error("const_above: could not round up");
}

/// Representation error of make_constant(c), as a rigorous upper bound.
double repr_err(double c) {
  Expr e = ExprNode::make_constant(c);
  return (Interval(c) - e->constant.to_interval()).mag();
}

Expr horner_centered(const std::vector<double>& coeffs, double center,
                     const Expr& arg) {
  Expr u = arg - ExprNode::make_constant(center);
  Expr acc = ExprNode::make_constant(coeffs.empty() ? 0.0 : coeffs.back());
  for (int i = static_cast<int>(coeffs.size()) - 2; i >= 0; --i)
    acc = ExprNode::make_constant(coeffs[i]) + acc * u;
  return acc;
}

Expr subst_var0(const Expr& e, const Expr& arg) {
  if (e->kind == ExprKind::Var) {
    if (e->var != 0) throw std::logic_error("subst_var0: unexpected variable");
    return arg;
  }
  if (e->children.empty()) return e;
  std::vector<Expr> ch;
  for (const auto& c : e->children) ch.push_back(subst_var0(c, arg));
  switch (e->kind) {
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
      return ExprNode::make_binary(e->kind, ch[0], ch[1]);
    case ExprKind::Min:
    case ExprKind::Max:
      return ExprNode::make_minmax(e->kind, ch[0], ch[1]);
    case ExprKind::Pow:
      return ExprNode::make_pow(ch[0], e->exponent);
    case ExprKind::Sqrt:
      return ExprNode::make_sqrt(ch[0]);
    case ExprKind::Abs:
      return ExprNode::make_abs(ch[0]);
    case ExprKind::Dict:
      return ExprNode::make_dict(e->fn, ch[0]);
    default:
      throw std::logic_error("subst_var0: unexpected node");
  }
}

Expr fold_max(const std::vector<Expr>& parts) {
  Expr acc = parts.at(0);
  for (size_t i = 1; i < parts.size(); ++i)
    acc = ExprNode::make_minmax(ExprKind::Max, acc, parts[i]);
  return acc;
}

Expr fold_min(const std::vector<Expr>& parts) {
  Expr acc = parts.at(0);
  for (size_t i = 1; i < parts.size(); ++i)
    acc = ExprNode::make_minmax(ExprKind::Min, acc, parts[i]);
  return acc;
}

}  // namespace

Expr Parabola::to_expr(const Expr& arg, const Interval& range,
                       bool lower) const {
  // Anchor, slope and curvature snap to representable dyadics; the induced
  // pointwise error over `range` is charged against the constant term.
  const double w = std::max(std::abs(range.lo - a), std::abs(range.hi - a));
  Interval wl(0.0, std::max(w, 0.0));
  Interval slack = Interval(repr_err(a)) *
                       (Interval(std::abs(beta)) +
                        Interval(std::abs(curv)) * (2.0 * wl + Interval(repr_err(a)))) +
                   Interval(repr_err(beta)) * wl +
                   Interval(repr_err(curv)) * wl * wl;
  const double adj = lower ? (Interval(alpha) - slack).lo
                           : (Interval(alpha) + slack).hi;
  Expr c0 = lower ? const_below(adj) : const_above(adj);
  Expr u = arg - ExprNode::make_constant(a);
  return c0 + u * (ExprNode::make_constant(beta) +
                   ExprNode::make_constant(curv) * u);
}

Parabola lower_parabola(DictFn fn, const Interval& I, double a) {
  const DictionaryEntry& d = dictionary(fn);
  a = std::clamp(a, I.lo, I.hi);
  const Interval v = d.ivalue(Interval(a));
  const Interval d1 = d.id1(Interval(a));
  const Interval g = d.id2(I);
  const double w = std::max(a - I.lo, I.hi - a);
  Parabola p;
  p.a = a;
  p.beta = d1.mid();
  p.curv = (Interval(g.lo) * Interval(0.5)).lo;
  p.alpha = (v - Interval(d1.rad()) * Interval(w)).lo;
  return p;
}

Parabola upper_parabola(DictFn fn, const Interval& I, double a) {
  const DictionaryEntry& d = dictionary(fn);
  a = std::clamp(a, I.lo, I.hi);
  const Interval v = d.ivalue(Interval(a));
  const Interval d1 = d.id1(Interval(a));
  const Interval g = d.id2(I);
  const double w = std::max(a - I.lo, I.hi - a);
  Parabola p;
  p.a = a;
  p.beta = d1.mid();
  p.curv = (Interval(g.hi) * Interval(0.5)).hi;
  p.alpha = (v + Interval(d1.rad()) * Interval(w)).hi;
  return p;
}

double MinimaxApprox::eval(double t) const {
  double u = t - center, acc = coeffs.empty() ? 0.0 : coeffs.back();
  for (int i = static_cast<int>(coeffs.size()) - 2; i >= 0; --i)
    acc = coeffs[i] + acc * u;
  return acc;
}

namespace {

/// Certify sup over I of (f - p) [sign=+1] or (p - f) [sign=-1] by interval
/// evaluation on pieces, with one refinement pass on the worst piece.
double certify_sup(DictFn fn, const Expr& p_univar, const Interval& I,
                   int pieces, int sign) {
  const DictionaryEntry& d = dictionary(fn);
  auto piece_sup = [&](const Interval& J) {
    Interval fv = d.ivalue(J);
    Interval pv = interval_eval(p_univar, {J});
    Interval diff = sign > 0 ? fv - pv : pv - fv;
    return diff.hi;
  };
  double worst = -std::numeric_limits<double>::infinity();
  int worst_idx = 0;
  std::vector<double> cuts(pieces + 1);
  for (int i = 0; i <= pieces; ++i)
    cuts[i] = I.lo + (I.hi - I.lo) * (double(i) / pieces);
  cuts[0] = I.lo;
  cuts[pieces] = I.hi;
  std::vector<double> vals(pieces);
  for (int i = 0; i < pieces; ++i) {
    vals[i] = piece_sup(Interval(cuts[i], std::max(cuts[i], cuts[i + 1])));
    if (vals[i] > worst) {
      worst = vals[i];
      worst_idx = i;
    }
  }
  // One refinement of the worst piece.
  double others = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < pieces; ++i)
    if (i != worst_idx) others = std::max(others, vals[i]);
  const int sub = 64;
  double refined = -std::numeric_limits<double>::infinity();
  double lo = cuts[worst_idx], hi = cuts[worst_idx + 1];
  for (int i = 0; i < sub; ++i) {
    double a = lo + (hi - lo) * (double(i) / sub);
    double b = i + 1 == sub ? hi : lo + (hi - lo) * (double(i + 1) / sub);
    refined = std::max(refined, piece_sup(Interval(a, std::max(a, b))));
  }
  return std::max(others, refined);
}

}  // namespace

MinimaxApprox remez(DictFn fn, const Interval& I, int degree) {
  const DictionaryEntry& d = dictionary(fn);
  if (degree < 0) throw std::invalid_argument("remez: negative degree");
  const int m = degree + 2;  // reference size
  const double mid = I.mid(), rad = std::max(I.rad(), 1e-300);

  std::vector<double> ref(m);
  for (int i = 0; i < m; ++i)
    ref[i] = mid + rad * std::cos(M_PI * double(m - 1 - i) / (m - 1));

  Eigen::VectorXd coeffs(degree + 1);
  double level = 0.0;
  auto solve_reference = [&]() {
    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
      double u = (ref[i] - mid) / rad;  // conditioning: solve in scaled basis
      double pw = 1.0;
      for (int j = 0; j <= degree; ++j) {
        a(i, j) = pw;
        pw *= u;
      }
      a(i, degree + 1) = (i % 2 == 0) ? 1.0 : -1.0;
      b(i) = d.value(ref[i]);
    }
    Eigen::VectorXd sol = a.fullPivLu().solve(b);
    coeffs = sol.head(degree + 1);
    level = std::abs(sol(degree + 1));
  };

  auto p_eval = [&](double t) {
    double u = (t - mid) / rad, acc = coeffs(degree);
    for (int j = degree - 1; j >= 0; --j) acc = coeffs(j) + acc * u;
    return acc;
  };

  const int grid_n = 4096;
  bool converged = false;
  for (int iter = 0; iter < 50; ++iter) {
    solve_reference();
    // Locate alternating extrema of the residual on a dense grid.
    std::vector<std::pair<double, double>> extrema;  // (t, err)
    double prev_sign = 0.0;
    double seg_best = 0.0, seg_t = I.lo;
    bool have_seg = false;
    for (int i = 0; i <= grid_n; ++i) {
      double t = I.lo + (I.hi - I.lo) * (double(i) / grid_n);
      double e = d.value(t) - p_eval(t);
      double s = e >= 0.0 ? 1.0 : -1.0;
      if (!have_seg || s != prev_sign) {
        if (have_seg) extrema.emplace_back(seg_t, seg_best);
        prev_sign = s;
        seg_best = e;
        seg_t = t;
        have_seg = true;
      } else if (std::abs(e) > std::abs(seg_best)) {
        seg_best = e;
        seg_t = t;
      }
    }
    if (have_seg) extrema.emplace_back(seg_t, seg_best);
    while (static_cast<int>(extrema.size()) > m) {
      // Drop the weakest extremum; merge its neighbours if both survive with
      // equal signs by keeping the larger one.
      size_t weakest = 0;
      for (size_t i = 1; i < extrema.size(); ++i)
        if (std::abs(extrema[i].second) < std::abs(extrema[weakest].second))
          weakest = i;
      extrema.erase(extrema.begin() + weakest);
      for (size_t i = 0; i + 1 < extrema.size();) {
        if ((extrema[i].second >= 0) == (extrema[i + 1].second >= 0)) {
          if (std::abs(extrema[i].second) < std::abs(extrema[i + 1].second))
            extrema.erase(extrema.begin() + i);
          else
            extrema.erase(extrema.begin() + i + 1);
        } else {
          ++i;
        }
      }
    }
    if (static_cast<int>(extrema.size()) < m) break;  // degenerate; keep last
    double dev = 0.0;
    for (auto& [t, e] : extrema) dev = std::max(dev, std::abs(e));
    for (int i = 0; i < m; ++i) ref[i] = extrema[i].first;
    if (dev > 0.0 && (dev - level) / dev < 1e-3) {
      converged = true;
      solve_reference();
      break;
    }
  }

  MinimaxApprox out;
  out.center = mid;
  out.equioscillated = converged;
  // Coefficients over u = t - mid: divide the scaled-basis ones by rad^i.
  out.coeffs.resize(degree + 1);
  double rp = 1.0;
  for (int j = 0; j <= degree; ++j) {
    out.coeffs[j] = coeffs(j) / rp;
    rp *= rad;
  }
  // Certify the two-sided error of the exact expression we will emit.
  Expr p_univar = horner_centered(out.coeffs, out.center, ExprNode::make_var(0));
  out.eps_high = certify_sup(fn, p_univar, I, 4096, +1);  // sup f - p
  out.eps_low = certify_sup(fn, p_univar, I, 4096, -1);   // sup p - f
  if (!std::isfinite(out.eps_high) || !std::isfinite(out.eps_low))
    out.equioscillated = false;
  return out;
}

UnaryApprox maxplus_unary(DictFn fn, const Interval& I,
                          const std::vector<double>& points, const Expr& arg) {
  std::vector<double> pts = points;
  if (pts.empty()) pts.push_back(I.mid());
  std::vector<Expr> lows, highs;
  for (double a : pts) {
    lows.push_back(lower_parabola(fn, I, a).to_expr(arg, I, true));
    highs.push_back(upper_parabola(fn, I, a).to_expr(arg, I, false));
  }
  return {fold_max(lows), fold_min(highs)};
}

UnaryApprox minimax_unary(DictFn fn, const Interval& I, int degree,
                          const Expr& arg) {
  MinimaxApprox mm = remez(fn, I, degree);
  Expr p = horner_centered(mm.coeffs, mm.center, arg);
  return {p - const_above(mm.eps_low), p + const_above(mm.eps_high)};
}

UnaryApprox interval_unary(DictFn fn, const Interval& I) {
  const Interval v = dictionary(fn).ivalue(I);
  return {const_below(v.lo), const_above(v.hi)};
}

IntervalMatrix hessian_enclosure(const Expr& e,
                                 const std::vector<Interval>& box) {
  const int n = static_cast<int>(box.size());
  IntervalMatrix h(n);
  std::vector<Expr> grad(n);
  for (int i = 0; i < n; ++i) grad[i] = differentiate(e, i);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      h.set(i, j, interval_eval(differentiate(grad[i], j), box));
  return h;
}

double lambda_coarse(const IntervalMatrix& d) {
  const int n = d.size();
  Eigen::MatrixXd mid = d.midpoint();
  double base = rigorous_lambda_min(mid);
  // Outward-rounded radius relative to the floating midpoint.
  Interval worst_row(0.0);
  for (int i = 0; i < n; ++i) {
    Interval row(0.0);
    for (int j = 0; j < n; ++j) {
      Interval r1 = Interval(d.hi(i, j)) - Interval(mid(i, j));
      Interval r2 = Interval(mid(i, j)) - Interval(d.lo(i, j));
      row = row + Interval(std::max(r1.mag(), r2.mag()));
    }
    if (row.hi > worst_row.hi) worst_row = row;
  }
  return (Interval(base) - worst_row).lo;
}

double lambda_tight(const IntervalMatrix& d) {
  const int n = d.size();
  if (n > 12) return lambda_coarse(d);
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      b(i, j) = std::max(std::abs(d.lo(i, j)), std::abs(d.hi(i, j)));
  double worst = -std::numeric_limits<double>::infinity();
  const int count = 1 << (n - 1);
  Eigen::VectorXd s(n);
  for (int mask = 0; mask < count; ++mask) {
    s(0) = 1.0;
    for (int i = 1; i < n; ++i) s(i) = (mask >> (i - 1)) & 1 ? -1.0 : 1.0;
    Eigen::MatrixXd m = s.asDiagonal() * b * s.asDiagonal();
    double lam_max = -rigorous_lambda_min(-m);
    worst = std::max(worst, lam_max);
  }
  return -worst;
}

Poly quadratic_template(const Expr& e, const std::vector<Interval>& box,
                        const std::vector<double>& xc, bool tight_lambda) {
  const int n = static_cast<int>(box.size());
  if (static_cast<int>(xc.size()) != n)
    throw std::invalid_argument("quadratic_template: center dimension mismatch");
  std::vector<Interval> point;
  for (double c : xc) point.emplace_back(c);

  const Interval v = interval_eval(e, point);
  std::vector<Expr> grad(n);
  std::vector<Interval> g(n);
  for (int i = 0; i < n; ++i) {
    grad[i] = differentiate(e, i);
    g[i] = interval_eval(grad[i], point);
  }
  IntervalMatrix hp(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      hp.set(i, j, interval_eval(differentiate(grad[i], j), point));
  IntervalMatrix hbox = hessian_enclosure(e, box);

  Eigen::MatrixXd m = hp.midpoint();
  IntervalMatrix diff(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      diff.set(i, j, hbox(i, j) - Interval(m(i, j)));
  double lambda = tight_lambda ? std::max(lambda_tight(diff), lambda_coarse(diff))
                               : lambda_coarse(diff);

  // Slack: gradient and Hessian evaluation radii over the largest |x - xc|.
  Interval slack(0.0);
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = std::max(xc[i] - box[i].lo, box[i].hi - xc[i]);
    slack = slack + Interval(g[i].rad()) * Interval(w[i]);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      slack = slack +
              Interval(0.5) * Interval(hp(i, j).rad()) * Interval(w[i]) * Interval(w[j]);
  const double c0 = (v - slack).lo;

  Poly q = Poly::constant(n, c0);
  for (int i = 0; i < n; ++i) {
    Poly di = Poly::variable(n, i) - Poly::constant(n, xc[i]);
    q = q + di * g[i].mid();
    q = q + di * di * (0.5 * lambda);
    for (int j = 0; j < n; ++j) {
      Poly dj = Poly::variable(n, j) - Poly::constant(n, xc[j]);
      q = q + di * dj * (0.5 * m(i, j));
    }
  }
  return q;
}

Expr expr_from_poly(const Poly& p) {
  Expr acc = ExprNode::make_constant(0.0);
  bool first = true;
  for (const auto& [mon, c] : p.terms()) {
    Expr term = ExprNode::make_constant(c);
    for (size_t i = 0; i < mon.size(); ++i)
      for (int k = 0; k < mon[i]; ++k)
        term = term * ExprNode::make_var(static_cast<int>(i));
    acc = first ? term : acc + term;
    first = false;
  }
  return acc;
}

std::pair<Expr, Expr> quadratic_template_pair(
    const Expr& e, const std::vector<Interval>& box,
    const std::vector<std::vector<double>>& points, bool tight_lambda) {
  if (points.empty())
    throw std::invalid_argument("quadratic_template_pair: no anchor points");
  std::vector<Expr> lows, highs;
  Expr neg = -e;
  for (const auto& xc : points) {
    lows.push_back(expr_from_poly(quadratic_template(e, box, xc, tight_lambda)));
    highs.push_back(
        expr_from_poly(quadratic_template(neg, box, xc, tight_lambda) * -1.0));
  }
  return {fold_max(lows), fold_min(highs)};
}

L1Underapprox l1_underapprox(const Expr& f_sa, const std::vector<Interval>& box,
                             int d, int k, const LiftOptions& opts) {
  LiftedPop lifted = lift(f_sa, box, opts);
  NormalizedPop np = normalize_to_unit_box(lifted.pop, lifted.full_box);
  add_box01_inequalities(np.pop);
  normalize_inequality_scales(np.pop);
  const int nd = np.pop.n;
  const int nx = lifted.n_x;

  FixedMoments fixed;
  for (const auto& mx : mons(nx, d)) {
    if (degree(mx) == 0) continue;
    Monomial full(nd, 0);
    for (int i = 0; i < nx; ++i) full[i] = mx[i];
    fixed[full] = unit_box_moment(mx).to_double();
  }

  const int order = std::max(k, min_order(np.pop));
  PopSolution sol = solve_pop(np.pop, order, opts.sdp_tol, opts.sdp_max_iter,
                              &fixed);

  L1Underapprox out;
  out.status = sol.status;
  out.integral = sol.bound;
  out.shift = np.shift;
  out.scale = np.scale;

  // Recover h: the part of f - sum_j sigma_j g_j supported on x-monomials of
  // degree <= d (identical to f elsewhere by the matching constraints).
  Relaxation rel = build_relaxation(np.pop, order, &fixed);
  Poly combo(nd);
  const Poly one = Poly::constant(nd, 1.0);
  for (size_t j = 0; j < sol.gram.size(); ++j) {
    Poly sigma(nd);
    const auto& basis = rel.bases[j];
    for (size_t p = 0; p < basis.size(); ++p)
      for (size_t q = p; q < basis.size(); ++q) {
        double c = sol.gram[j](p, q);
        if (c == 0.0) continue;
        Monomial mm(nd, 0);
        for (int i = 0; i < nd; ++i) mm[i] = basis[p][i] + basis[q][i];
        sigma.add_term(mm, p == q ? c : 2.0 * c);
      }
    combo = combo + sigma * (j == 0 ? one : np.pop.inequalities[j - 1]);
  }
  std::vector<Poly> eq_mult;
  {
    int off = 0;
    for (size_t l = 0; l < np.pop.equalities.size(); ++l) {
      Poly p_l(nd);
      for (const auto& beta : rel.eq_bases[l]) {
        if (off < sol.eq_coeffs.size() && sol.eq_coeffs(off) != 0.0)
          p_l.add_term(beta, sol.eq_coeffs(off));
        ++off;
      }
      combo = combo + p_l * np.pop.equalities[l];
      eq_mult.push_back(p_l);
    }
  }
  Poly diff = np.pop.objective - combo;
  Poly h(nx);
  for (const auto& [mon, c] : diff.terms()) {
    bool x_only = true;
    for (int i = nx; i < nd; ++i)
      if (mon[i] != 0) x_only = false;
    if (!x_only || degree(mon) > d) continue;
    h.add_term(Monomial(mon.begin(), mon.begin() + nx), c);
  }
  out.h = h;

  // Rigorous gap: verify the identity f - h = sum sigma_j g_j with mu = 0;
  // the resulting sound bound shifts h downward.
  Certificate cert;
  cert.n = nd;
  cert.order = order;
  cert.mu = 0.0;
  cert.objective = np.pop.objective - h.embedded(nd);
  cert.inequalities = np.pop.inequalities;
  cert.equalities = np.pop.equalities;
  cert.eq_multipliers = eq_mult;
  cert.bases = rel.bases;
  cert.gram = sol.gram;
  std::vector<Interval> unit(nd, Interval(0.0, 1.0));
  out.rigor_shift = std::min(0.0, verify_certificate(cert, unit).mu_rigorous);
  return out;
}

}  // namespace nlcert
