#include "nlcert/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <random>
#include <stdexcept>

namespace nlcert {

int Precision::initial_points(DictFn fn) const {
  auto it = points_per_fn.find(dictionary(fn).name);
  return it == points_per_fn.end() ? 1 : std::max(1, it->second);
}

int Precision::initial_degree(DictFn fn) const {
  auto it = degree_per_fn.find(dictionary(fn).name);
  return it == degree_per_fn.end() ? 4 : std::max(1, it->second);
}

namespace {

Interval approx_range(const Expr& under, const Expr& over,
                      const std::vector<Interval>& box) {
  Interval iu = interval_eval_clipped(under, box);
  Interval io = interval_eval_clipped(over, box);
  return Interval(std::min(iu.lo, io.lo), std::max(iu.hi, io.hi));
}

Expr const_lo(const Interval& v) {
  Expr e = ExprNode::make_constant(v.lo);
  if (e->constant.to_interval().hi <= v.lo) return e;
  return ExprNode::make_constant(
      (Interval(v.lo) - Interval(std::exp2(-50.0) * (1.0 + v.mag()))).lo);
}

Expr const_hi(const Interval& v) {
  Expr e = ExprNode::make_constant(v.hi);
  if (e->constant.to_interval().lo >= v.hi) return e;
  return ExprNode::make_constant(
      (Interval(v.hi) + Interval(std::exp2(-50.0) * (1.0 + v.mag()))).hi);
}

double verified_lower_bound(const SaBound& sab);

struct TemplateBuilder {
  const std::vector<Interval>& box;
  const Precision& prec;
  bool fallback_used = false;
  std::map<std::string, TemplatePair> memo;
  std::map<std::string, Interval> sa_range_memo;

  /// Rigorous range enclosure of a semialgebraic subtree through the lifted
  /// relaxation; used when plain interval arithmetic cannot enclose it (e.g.
  /// a sqrt argument whose interval enclosure dips below zero).
  Interval sa_range(const Expr& g) {
    auto it = sa_range_memo.find(g->key());
    if (it != sa_range_memo.end()) return it->second;
    LiftOptions lo;
    SaBound mn = min_sa(g, box, prec.sa_order, lo);
    SaBound mx = min_sa(-g, box, prec.sa_order, lo);
    const double lb = verified_lower_bound(mn);
    const double ub = -verified_lower_bound(mx);
    if (!std::isfinite(lb) || !std::isfinite(ub))
      throw DomainError("range bound relaxation failed for " + g->key());
    Interval r(lb, ub);
    sa_range_memo.emplace(g->key(), r);
    return r;
  }

  Interval range_of(const Expr& g) {
    try {
      return interval_eval_clipped(g, box);
    } catch (const DomainError&) {
      if (!is_semialgebraic(g)) throw;
      return sa_range(g);
    }
  }

  TemplatePair constant_fallback(const Expr& e) {
    fallback_used = true;
    Interval r = e->kind == ExprKind::Dict
                     ? dictionary(e->fn).ivalue(range_of(e->children[0]))
                     : range_of(e);
    return {const_lo(r), const_hi(r), true};
  }

  bool exact(const TemplatePair& t) const { return t.under.get() == t.over.get(); }

  TemplatePair mul_rule(const Expr& e, const TemplatePair& a,
                        const TemplatePair& b) {
    auto nonneg = [&](const Expr& x) { return interval_eval_clipped(x, box).lo >= 0.0; };
    auto nonpos = [&](const Expr& x) { return interval_eval_clipped(x, box).hi <= 0.0; };
    if (exact(a)) {
      if (nonneg(a.under)) return {a.under * b.under, a.under * b.over, false};
      if (nonpos(a.under)) return {a.under * b.over, a.under * b.under, false};
      return constant_fallback(e);
    }
    if (exact(b)) {
      if (nonneg(b.under)) return {a.under * b.under, a.over * b.under, false};
      if (nonpos(b.under)) return {a.over * b.under, a.under * b.under, false};
      return constant_fallback(e);
    }
    // Both sides approximated: sign-determinate cases only.
    if (nonneg(a.under) && nonneg(b.under))
      return {a.under * b.under, a.over * b.over, false};
    if (nonpos(a.over) && nonpos(b.over))
      return {a.over * b.over, a.under * b.under, false};
    return constant_fallback(e);
  }

  TemplatePair dict_rule(const Expr& e) {
    TemplatePair c = build(e->children[0]);
    Interval ic = range_of(e->children[0]);
    Interval valid = ic;
    if (!exact(c)) {
      Interval ia;
      try {
        ia = approx_range(c.under, c.over, box);
      } catch (const DomainError&) {
        ia = join(range_of(c.under), range_of(c.over));
      }
      valid = join(ic, ia);
    }
    const DictFn fn = e->fn;

    auto unary_in = [&](const Expr& arg) -> UnaryApprox {
      switch (prec.mode) {
        case ApproxMode::IntervalOnly:
          return interval_unary(fn, valid);
        case ApproxMode::Minimax: {
          int deg = prec.initial_degree(fn);
          auto it = prec.node.find(e->key());
          if (it != prec.node.end() && it->second.degree > 0)
            deg = it->second.degree;
          return minimax_unary(fn, valid, deg, arg);
        }
        case ApproxMode::Maxplus:
        default: {
          std::vector<double> pts;
          auto it = prec.node.find(e->key());
          if (it != prec.node.end()) pts = it->second.points;
          if (pts.empty()) {
            const int k = prec.initial_points(fn);
            for (int i = 0; i < k; ++i)
              pts.push_back(valid.lo + valid.width() * (i + 0.5) / k);
          }
          return maxplus_unary(fn, valid, pts, arg);
        }
      }
    };

    if (prec.mode == ApproxMode::IntervalOnly) {
      UnaryApprox ua = interval_unary(fn, valid);
      return {ua.under, ua.over, false};
    }
    if (exact(c)) {
      UnaryApprox ua = unary_in(e->children[0]);
      return {ua.under, ua.over, false};
    }
    switch (dictionary(fn).monotonicity(valid)) {
      case Monotonicity::Increasing:
        return {unary_in(c.under).under, unary_in(c.over).over, false};
      case Monotonicity::Decreasing:
        return {unary_in(c.over).under, unary_in(c.under).over, false};
      case Monotonicity::Unknown:
        return constant_fallback(e);
    }
    return constant_fallback(e);
  }

  TemplatePair build(const Expr& e) {
    if (is_semialgebraic(e)) return {e, e, false};
    auto it = memo.find(e->key());
    if (it != memo.end()) return it->second;
    TemplatePair t = build_uncached(e);
    memo.emplace(e->key(), t);
    return t;
  }

  TemplatePair build_uncached(const Expr& e) {
    switch (e->kind) {
      case ExprKind::Add: {
        TemplatePair a = build(e->children[0]), b = build(e->children[1]);
        return {a.under + b.under, a.over + b.over, false};
      }
      case ExprKind::Sub: {
        TemplatePair a = build(e->children[0]), b = build(e->children[1]);
        return {a.under - b.over, a.over - b.under, false};
      }
      case ExprKind::Mul: {
        TemplatePair a = build(e->children[0]), b = build(e->children[1]);
        return mul_rule(e, a, b);
      }
      case ExprKind::Div: {
        TemplatePair a = build(e->children[0]), b = build(e->children[1]);
        if (exact(b)) {
          Interval ib = interval_eval_clipped(b.under, box);
          if (ib.lo > 0.0) return {a.under / b.under, a.over / b.under, false};
          if (ib.hi < 0.0) return {a.over / b.under, a.under / b.under, false};
        }
        return constant_fallback(e);
      }
      case ExprKind::Pow: {
        const Rational& r = e->exponent;
        TemplatePair a = build(e->children[0]);
        if (r.den == 1 && r.num >= 2 &&
            interval_eval_clipped(a.under, box).lo >= 0.0) {
          // nonnegative base: t^r monotone increasing
          Expr u = a.under, o = a.over;
          return {ExprNode::make_pow(u, r), ExprNode::make_pow(o, r), false};
        }
        if (r.num > 0 && r.den > 1 && interval_eval_clipped(a.under, box).lo >= 0.0)
          return {ExprNode::make_pow(a.under, r), ExprNode::make_pow(a.over, r),
                  false};
        return constant_fallback(e);
      }
      case ExprKind::Sqrt: {
        TemplatePair a = build(e->children[0]);
        if (interval_eval_clipped(a.under, box).lo >= 0.0)
          return {ExprNode::make_sqrt(a.under), ExprNode::make_sqrt(a.over),
                  false};
        return constant_fallback(e);
      }
      case ExprKind::Abs: {
        TemplatePair a = build(e->children[0]);
        Expr under = ExprNode::make_minmax(ExprKind::Max, a.under, -a.over);
        Expr over = ExprNode::make_minmax(ExprKind::Max, a.over, -a.under);
        return {under, over, false};
      }
      case ExprKind::Min:
      case ExprKind::Max: {
        TemplatePair a = build(e->children[0]), b = build(e->children[1]);
        return {ExprNode::make_minmax(e->kind, a.under, b.under),
                ExprNode::make_minmax(e->kind, a.over, b.over), false};
      }
      case ExprKind::Dict:
        return dict_rule(e);
      default:
        throw std::logic_error("template_approx: unexpected node");
    }
  }
};

Expr poly_to_original_coords(const Poly& h, const std::vector<double>& shift,
                             const std::vector<double>& scale, int n) {
  std::vector<double> s2(n), c2(n);
  for (int i = 0; i < n; ++i) {
    c2[i] = 1.0 / scale[i];
    s2[i] = -shift[i] / scale[i];
  }
  return expr_from_poly(h.substitute_affine(s2, c2));
}

}  // namespace

int lifting_count_pair(const TemplatePair& t) {
  return std::max(lifting_count(t.under), lifting_count(t.over));
}

TemplatePair template_approx(const Expr& e, const std::vector<Interval>& box,
                             const Precision& prec) {
  TemplateBuilder builder{box, prec};
  TemplatePair t = builder.build(e);
  t.interval_fallback = builder.fallback_used;

  const int count = std::max(lifting_count(t.under), lifting_count(t.over));
  if (count > prec.n_lifting_max && prec.reduce != ReduceMode::None) {
    if (prec.reduce == ReduceMode::Maxplus) {
      std::vector<std::vector<double>> anchors = prec.template_anchors;
      if (anchors.empty()) {
        std::vector<double> mid;
        for (const auto& b : box) mid.push_back(b.mid());
        anchors.push_back(mid);
      }
      try {
        auto [u, o] = quadratic_template_pair(e, box, anchors, true);
        t.under = u;
        t.over = o;
      } catch (const std::exception&) {
        // not twice differentiable; keep the (over-budget) templates
      }
    } else {  // ReduceMode::L1
      LiftOptions lo;
      L1Underapprox lu = l1_underapprox(t.under, box, prec.reduce_l1_degree,
                                        prec.reduce_l1_order, lo);
      if (lu.status == SdpStatus::Optimal) {
        const int n = static_cast<int>(box.size());
        t.under = poly_to_original_coords(lu.h, lu.shift, lu.scale, n) +
                  ExprNode::make_constant(lu.rigor_shift);
      }
      L1Underapprox ho = l1_underapprox(-t.over, box, prec.reduce_l1_degree,
                                        prec.reduce_l1_order, lo);
      if (ho.status == SdpStatus::Optimal) {
        const int n = static_cast<int>(box.size());
        t.over = -(poly_to_original_coords(ho.h, ho.shift, ho.scale, n) +
                   ExprNode::make_constant(ho.rigor_shift));
      }
    }
  }
  return t;
}

std::vector<double> randeval_argmin(const Expr& e,
                                    const std::vector<Interval>& box,
                                    int samples, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = static_cast<int>(box.size());
  std::vector<double> best(n), x(n);
  double fbest = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) x[i] = box[i].lo + box[i].width() * unit(rng);
    try {
      double v = eval(e, x);
      if (v < fbest) {
        fbest = v;
        best = x;
      }
    } catch (const DomainError&) {
    }
  }
  if (!std::isfinite(fbest))
    for (int i = 0; i < n; ++i) best[i] = box[i].mid();
  return best;
}

std::vector<double> local_descent(const Expr& e,
                                  const std::vector<Interval>& box,
                                  std::vector<double> x0) {
  const int n = static_cast<int>(box.size());
  auto value = [&](const std::vector<double>& x) {
    try {
      return eval(e, x);
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double f = value(x0);
  for (int sweep = 0; sweep < 20; ++sweep) {
    const double frac = 0.125 * std::pow(0.7, sweep);
    for (int i = 0; i < n; ++i) {
      const double step = box[i].width() * frac;
      if (step <= 0.0) continue;
      for (double cand : {x0[i] - step, x0[i] + step}) {
        cand = std::clamp(cand, box[i].lo, box[i].hi);
        std::vector<double> y = x0;
        y[i] = cand;
        double fy = value(y);
        if (fy < f) {
          f = fy;
          x0 = y;
        }
      }
    }
  }
  return x0;
}

double qmc_integral(const Expr& e, const std::vector<Interval>& box,
                    int samples) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  const int n = static_cast<int>(box.size());
  if (n > 12) throw std::invalid_argument("qmc_integral: dimension too large");
  auto halton = [](int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
      f /= base;
      r += f * (index % base);
      index /= base;
    }
    return r;
  };
  double acc = 0.0;
  std::vector<double> x(n);
  int used = 0;
  for (int s = 1; s <= samples; ++s) {
    for (int i = 0; i < n; ++i)
      x[i] = box[i].lo + box[i].width() * halton(s, primes[i]);
    try {
      acc += eval(e, x);
      ++used;
    } catch (const DomainError&) {
    }
  }
  double vol = 1.0;
  for (const auto& b : box) vol *= b.width();
  return used > 0 ? vol * acc / used : 0.0;
}

namespace {

void collect_dict_nodes(const Expr& e,
                        std::map<std::string, Expr>& nodes) {
  if (e->kind == ExprKind::Dict) nodes.emplace(e->key(), e);
  for (const auto& c : e->children) collect_dict_nodes(c, nodes);
}

double rigorous_bound(const SaBound& sab, Certificate* cert_out) {
  if (sab.status != SdpStatus::Optimal &&
      sab.status != SdpStatus::IterationLimit)
    return -std::numeric_limits<double>::infinity();
  Relaxation rel = build_relaxation(sab.normalized_pop, sab.order);
  Certificate cert = extract_certificate(sab.normalized_pop, rel, sab.sol);
  std::vector<Interval> unit(sab.normalized_pop.n, Interval(0.0, 1.0));
  VerifyResult vr = verify_certificate(cert, unit);
  if (cert_out) *cert_out = cert;
  return vr.mu_rigorous;
}

double verified_lower_bound(const SaBound& sab) {
  return rigorous_bound(sab, nullptr);
}

}  // namespace

OptimResult template_optim(const Expr& e, const std::vector<Interval>& box,
                           Precision prec, const OptimOptions& opts) {
  OptimResult out;
  std::map<std::string, Expr> dict_nodes;
  collect_dict_nodes(e, dict_nodes);

  auto safe_eval = [&](const std::vector<double>& x) {
    try {
      return eval(e, x);
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<double> x0 = opts.initial_point.empty()
                               ? randeval_argmin(e, box, opts.samples, opts.seed)
                               : opts.initial_point;
  out.minimizer = x0;
  out.upper = safe_eval(x0);

  auto add_point = [&](const std::vector<double>& x) {
    for (auto& [key, node] : dict_nodes) {
      try {
        double img = eval(node->children[0], x);
        auto& st = prec.node[key];
        bool dup = false;
        for (double p : st.points)
          if (std::abs(p - img) < 1e-12 * (1.0 + std::abs(img))) dup = true;
        if (!dup) st.points.push_back(img);
      } catch (const DomainError&) {
      }
    }
    prec.template_anchors.push_back(x);
  };
  add_point(x0);

  for (int it = 0; it < opts.iterations; ++it) {
    TemplatePair t = template_approx(e, box, prec);
    SaBound sab = min_sa(t.under, box, opts.order, opts.lift);

    IterationRecord rec;
    rec.status = sab.status;
    rec.bound = sab.status == SdpStatus::Optimal
                    ? sab.bound
                    : -std::numeric_limits<double>::infinity();
    rec.liftings = lifting_count(t.under);
    rec.interval_fallback = t.interval_fallback;

    Certificate cert;
    rec.bound_rigorous = opts.rigorous
                             ? rigorous_bound(sab, &cert)
                             : rec.bound;
    if (rec.bound > out.lower) out.lower = rec.bound;
    if (rec.bound_rigorous > out.lower_rigorous) {
      out.lower_rigorous = rec.bound_rigorous;
      if (opts.rigorous) {
        out.certificate = cert;
        out.has_certificate = true;
      }
      out.last = sab;
    }

    std::vector<double> x_opt = local_descent(e, box, sab.x_guess);
    double fx = safe_eval(x_opt);
    if (fx < out.upper) {
      out.upper = fx;
      out.minimizer = x_opt;
    }
    rec.upper = out.upper;
    out.iterations.push_back(rec);

    if (out.lower >= opts.stop_at) break;
    if (it + 1 < opts.iterations) {
      add_point(x_opt);
      if (prec.mode == ApproxMode::Minimax)
        for (auto& [key, node] : dict_nodes) {
          auto& st = prec.node[key];
          if (st.degree == 0) st.degree = prec.initial_degree(node->fn);
          st.degree += 2;
        }
    }
  }
  return out;
}

SubdivideResult subdivide_certify(const Expr& e,
                                  const std::vector<Interval>& box,
                                  const Precision& prec,
                                  const SubdivideOptions& opts) {
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - t_start).count();
  };

  SubdivideResult out;

  struct Leaf {
    std::vector<Interval> b;
    double bound;
    bool refinable;  // false once the relaxation machinery has run
    bool has_cert = false;
    Certificate cert;
    double cert_bound = 0.0;
  };

  auto evaluate = [&](const std::vector<Interval>& b, bool full) -> Leaf {
    Interval iv(-std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity());
    try {
      iv = interval_eval_clipped(e, b);
    } catch (const DomainError&) {
    }
    if (iv.lo >= opts.target) return {b, iv.lo, false};
    if (!full) return {b, iv.lo, true};
    OptimOptions oo = opts.optim;
    oo.stop_at = opts.target;
    OptimResult r = template_optim(e, b, prec, oo);
    if (r.upper < out.upper) {
      out.upper = r.upper;
      out.minimizer = r.minimizer;
    }
    double bound = opts.optim.rigorous ? r.lower_rigorous : r.lower;
    Leaf leaf{b, std::max(iv.lo, bound), false};
    if (r.has_certificate && std::isfinite(r.lower_rigorous)) {
      leaf.has_cert = true;
      leaf.cert = r.certificate;
      leaf.cert_bound = r.lower_rigorous;
    }
    return leaf;
  };

  // Worst-first worklist ordered by bound (then insertion order for
  // determinism).
  std::multimap<double, Leaf> work;
  Leaf root = evaluate(box, true);
  work.emplace(root.bound, root);
  out.boxes_used = 1;

  while (!work.empty()) {
    auto worst = work.begin();
    if (worst->first >= opts.target) break;  // everything is certified
    if (out.boxes_used + 1 > opts.max_boxes ||
        elapsed() > opts.time_budget_seconds)
      break;
    Leaf leaf = worst->second;
    work.erase(worst);
    int widest = 0;
    for (size_t i = 1; i < leaf.b.size(); ++i)
      if (leaf.b[i].width() > leaf.b[widest].width())
        widest = static_cast<int>(i);
    const double cut = leaf.b[widest].mid();
    for (int half = 0; half < 2; ++half) {
      std::vector<Interval> nb = leaf.b;
      nb[widest] = half == 0 ? Interval(leaf.b[widest].lo, cut)
                             : Interval(cut, leaf.b[widest].hi);
      Leaf child = evaluate(nb, true);
      work.emplace(child.bound, child);
    }
    out.boxes_used += 1;  // one split: net one extra leaf
  }

  out.lower = std::numeric_limits<double>::infinity();
  out.certified = true;
  for (const auto& [bound, leaf] : work) {
    out.lower = std::min(out.lower, bound);
    LeafRecord rec;
    rec.box = leaf.b;
    rec.bound = bound;
    rec.has_certificate = leaf.has_cert;
    rec.certificate = leaf.cert;
    rec.certificate_bound = leaf.cert_bound;
    out.leaves.push_back(std::move(rec));
    if (bound < opts.target) out.certified = false;
  }
  if (work.empty()) {
    out.lower = -std::numeric_limits<double>::infinity();
    out.certified = false;
  }
  out.seconds = elapsed();
  return out;
}

}  // namespace nlcert
