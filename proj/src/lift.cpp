#include "nlcert/lift.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace nlcert {

namespace {

int isign(const Interval& v) {
  if (v.lo >= 0.0) return 1;
  if (v.hi <= 0.0) return -1;
  return 0;
}

/// Lifting variables per distinct non-polynomial node.
void count_lift_nodes(const Expr& e, std::map<std::string, int>& seen) {
  switch (e->kind) {
    case ExprKind::Sqrt:
    case ExprKind::Abs:
    case ExprKind::Min:
    case ExprKind::Max:
    case ExprKind::Div:
      seen.emplace(e->key(), 1);
      break;
    case ExprKind::Pow: {
      const Rational& r = e->exponent;
      if (r.den != 1)
        seen.emplace(e->key(), r.num < 0 ? 2 : 1);
      else if (r.num < 0)
        seen.emplace(e->key(), 1);
      break;
    }
    default:
      break;
  }
  for (const auto& c : e->children) count_lift_nodes(c, seen);
}

Poly truncate_dim(const Poly& p, int newdim) {
  Poly q(newdim);
  for (const auto& [m, c] : p.terms()) {
    Monomial t(m.begin(), m.begin() + newdim);
    q.add_term(t, c);
  }
  return q;
}

class Lifter {
 public:
  Lifter(const std::vector<Interval>& box, int n_x, int cap,
         const LiftOptions& opts)
      : box_(box), opts_(opts), n_x_(n_x), dim_(n_x + cap) {}

  Poly convert(const Expr& e, int sign) {
    auto it = cache_.find(e->key());
    if (it != cache_.end()) return it->second;
    Poly p = convert_uncached(e, sign);
    cache_.emplace(e->key(), p);
    return p;
  }

  LiftedPop finish(Poly objective) {
    LiftedPop out;
    out.n_x = n_x_;
    out.n_z = static_cast<int>(z_bounds_.size());
    const int nd = n_x_ + out.n_z;
    out.pop.n = nd;
    out.pop.objective = truncate_dim(objective, nd);
    for (const auto& g : ineqs_) out.pop.inequalities.push_back(truncate_dim(g, nd));
    for (const auto& h : eqs_) out.pop.equalities.push_back(truncate_dim(h, nd));
    out.full_box = box_;
    out.full_box.insert(out.full_box.end(), z_bounds_.begin(), z_bounds_.end());
    out.z_keys = z_keys_;
    return out;
  }

 private:
  Poly convert_uncached(const Expr& e, int sign) {
    switch (e->kind) {
      case ExprKind::Constant:
        return Poly::constant(dim_, e->constant.to_double());
      case ExprKind::Var:
        return Poly::variable(dim_, e->var);
      case ExprKind::Add:
        return convert(e->children[0], sign) + convert(e->children[1], sign);
      case ExprKind::Sub:
        return convert(e->children[0], sign) - convert(e->children[1], -sign);
      case ExprKind::Mul: {
        const Interval ia = range_or_whole(e->children[0]);
        const Interval ib = range_or_whole(e->children[1]);
        Poly pa = convert(e->children[0], sign * isign(ib));
        Poly pb = convert(e->children[1], sign * isign(ia));
        return pa * pb;
      }
      case ExprKind::Div: {
        const Interval ia = range_or_whole(e->children[0]);
        // Convert the denominator first: lifting it may tighten its cached
        // range (verified auxiliary bounds), which the margin check needs.
        Poly pb = convert(e->children[1], -sign * isign(ia));
        const Interval ib = range(e->children[1]);
        Poly pa = convert(e->children[0], sign * isign(ib));
        return lift_div(e, pa, pb, range(e->children[0]), ib);
      }
      case ExprKind::Pow:
        return lift_pow(e, sign);
      case ExprKind::Sqrt: {
        Poly pu = convert(e->children[0], sign);
        Interval iu = intersect(range(e->children[0]),
                                Interval(0.0, std::numeric_limits<double>::infinity()));
        Interval bnd = refine_via_fn(
            pu, iu, [](const Interval& v) { return nlcert::sqrt(v); });
        range_cache_[e->key()] = bnd;
        Poly z = new_z(e->key(), bnd);
        push_equality(z * z - pu);
        return z;
      }
      case ExprKind::Abs: {
        Poly pu = convert(e->children[0], 0);
        Interval bnd = nlcert::abs(range(e->children[0]));
        // (conversion first: any nested refined ranges are cached by now)
        Poly z = new_z(e->key(), bnd);
        ineqs_.push_back(z - pu);
        ineqs_.push_back(z + pu);
        if (!(opts_.monotone_minmax && sign > 0))
          ineqs_.push_back(pu * pu - z * z);
        return z;
      }
      case ExprKind::Min:
      case ExprKind::Max: {
        const bool is_max = e->kind == ExprKind::Max;
        Poly pa = convert(e->children[0], sign);
        Poly pb = convert(e->children[1], sign);
        // Ranges after conversion: nested refined bounds are cached by now.
        Interval ia = range(e->children[0]), ib = range(e->children[1]);
        Interval bnd = is_max ? nlcert::max(ia, ib) : nlcert::min(ia, ib);
        Poly z = new_z(e->key(), bnd);
        if (is_max) {
          ineqs_.push_back(z - pa);
          ineqs_.push_back(z - pb);
          if (!(opts_.monotone_minmax && sign > 0))
            ineqs_.push_back(-((z - pa) * (z - pb)));
        } else {
          ineqs_.push_back(pa - z);
          ineqs_.push_back(pb - z);
          if (!(opts_.monotone_minmax && sign < 0))
            ineqs_.push_back(-((z - pa) * (z - pb)));
        }
        return z;
      }
      case ExprKind::Dict:
        throw std::invalid_argument("lift: expression is not semialgebraic");
    }
    throw std::logic_error("lift: unreachable");
  }

  Poly lift_pow(const Expr& e, int sign) {
    const Rational r = e->exponent;
    const Expr& u = e->children[0];
    if (r.den == 1 && r.num >= 0) {
      const Interval iu = range(u);
      int child_sign = 0;
      if (r.num % 2 == 1 || iu.lo >= 0.0) child_sign = sign;
      Poly pu = convert(u, child_sign);
      return int_power(pu, static_cast<int>(r.num));
    }
    // Fractional or negative exponent: go through w = u^{1/q} >= 0.
    Poly base;
    Interval ibase;
    if (r.den == 1) {
      base = convert(u, 0);
      ibase = range(u);
    } else {
      Poly pu = convert(u, 0);
      Interval iu = intersect(range(u),
                              Interval(0.0, std::numeric_limits<double>::infinity()));
      const int q = static_cast<int>(r.den);
      Interval wb = refine_via_fn(
          pu, iu, [q](const Interval& v) { return nlcert::root(v, q); });
      Poly w = new_z(e->key() + "#root", wb);
      push_equality(int_power(w, q) - pu);
      base = w;
      ibase = wb;
    }
    const int p = static_cast<int>(r.num < 0 ? -r.num : r.num);
    Poly bp = int_power(base, p);
    Interval ibp = pow_int(ibase, p);
    if (r.num >= 0) return bp;
    return lift_div(e, Poly::constant(dim_, 1.0), bp, Interval(1.0), ibp);
  }

  Poly lift_div(const Expr& e, const Poly& numer, const Poly& denom,
                const Interval& numer_range, const Interval& denom_range) {
    const double margin =
        opts_.div_margin_rel * (1.0 + denom_range.mag());
    if (denom_range.lo <= margin && denom_range.hi >= -margin)
      throw DomainError("lift: denominator range reaches zero on the box");
    // Safe: the range excludes zero, so interval division is defined.
    Interval bnd = numer_range / denom_range;
    range_cache_[e->key()] = bnd;
    Poly z = new_z(e->key(), bnd);
    push_equality(z * denom - numer);
    return z;
  }

  Poly int_power(const Poly& p, int e) {
    Poly r = Poly::constant(dim_, 1.0);
    for (int i = 0; i < e; ++i) r = r * p;
    return r;
  }

  Poly new_z(const std::string& key, const Interval& bnd) {
    const int idx = n_x_ + static_cast<int>(z_bounds_.size());
    if (idx >= dim_) throw std::logic_error("lift: variable capacity exceeded");
    z_bounds_.push_back(bnd);
    z_keys_.push_back(key);
    return Poly::variable(dim_, idx);
  }

  void push_equality(const Poly& h) { eqs_.push_back(h); }

  /// Structural range enclosure: like interval_eval_clipped, but routed
  /// through the cache so that refined bounds installed for lifted nodes
  /// (sqrt, division) propagate into enclosing ranges.
  Interval range(const Expr& e) {
    auto it = range_cache_.find(e->key());
    if (it != range_cache_.end()) return it->second;
    Interval v;
    switch (e->kind) {
      case ExprKind::Constant: v = e->constant.to_interval(); break;
      case ExprKind::Var: v = box_.at(e->var); break;
      case ExprKind::Add: v = range(e->children[0]) + range(e->children[1]); break;
      case ExprKind::Sub: v = range(e->children[0]) - range(e->children[1]); break;
      case ExprKind::Mul: v = range(e->children[0]) * range(e->children[1]); break;
      case ExprKind::Div: v = range(e->children[0]) / range(e->children[1]); break;
      case ExprKind::Pow: {
        Interval b = range(e->children[0]);
        const Rational& r = e->exponent;
        if (r.den == 1) {
          v = pow_int(b, r.num);
        } else {
          if (r.den % 2 == 0)
            b = intersect(b, Interval(0.0, std::numeric_limits<double>::infinity()));
          v = pow_int(root(b, r.den), r.num);
        }
        break;
      }
      case ExprKind::Sqrt:
        v = nlcert::sqrt(intersect(
            range(e->children[0]),
            Interval(0.0, std::numeric_limits<double>::infinity())));
        break;
      case ExprKind::Abs: v = nlcert::abs(range(e->children[0])); break;
      case ExprKind::Min: v = nlcert::min(range(e->children[0]), range(e->children[1])); break;
      case ExprKind::Max: v = nlcert::max(range(e->children[0]), range(e->children[1])); break;
      case ExprKind::Dict:
        throw std::invalid_argument("lift: expression is not semialgebraic");
    }
    range_cache_.emplace(e->key(), v);
    return v;
  }

  /// Sign queries tolerate undefined enclosures: unknown sign is safe (it
  /// only disables the monotone min/max shortcut for that subtree).
  Interval range_or_whole(const Expr& e) {
    try {
      return range(e);
    } catch (const DomainError&) {
      return Interval(-std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity());
    }
  }

  /// Bound fn(argument) where `arg` is the argument's lifted polynomial; when
  /// allowed and the argument is x-only, tighten the interval range of the
  /// argument with a verified low-order relaxation before applying fn.
  template <class Fn>
  Interval refine_via_fn(const Poly& arg, Interval arg_range, Fn&& fn) {
    if (opts_.zbound_order >= 1) {
      bool x_only = true;
      for (const auto& [m, c] : arg.terms())
        for (int i = n_x_; i < dim_ && x_only; ++i)
          if (m[i] != 0) x_only = false;
      if (x_only) {
        Poly ux = truncate_dim(arg, n_x_);
        auto rigorous_min = [&](const Poly& obj) {
          PopProblem q{n_x_, obj, {}};
          NormalizedPop np = normalize_to_unit_box(q, box_);
          add_box01_inequalities(np.pop);
          int k = std::max(opts_.zbound_order, min_order(np.pop));
          PopSolution s = solve_pop(np.pop, k, opts_.sdp_tol, opts_.sdp_max_iter);
          if (s.status != SdpStatus::Optimal)
            return -std::numeric_limits<double>::infinity();
          Relaxation rel = build_relaxation(np.pop, k);
          Certificate c = extract_certificate(np.pop, rel, s);
          std::vector<Interval> unit(n_x_, Interval(0.0, 1.0));
          return verify_certificate(c, unit).mu_rigorous;
        };
        double lo = rigorous_min(ux);
        double hi = -rigorous_min(-ux);
        arg_range = intersect(arg_range, Interval(lo, hi));
      }
    }
    return fn(arg_range);
  }

  const std::vector<Interval>& box_;
  const LiftOptions& opts_;
  int n_x_;
  int dim_;
  std::vector<Interval> z_bounds_;
  std::vector<std::string> z_keys_;
  std::vector<Poly> ineqs_;
  std::vector<Poly> eqs_;
  std::map<std::string, Poly> cache_;
  std::map<std::string, Interval> range_cache_;
};

}  // namespace

int lifting_count(const Expr& f) {
  std::map<std::string, int> seen;
  count_lift_nodes(f, seen);
  int total = 0;
  for (const auto& [k, c] : seen) total += c;
  return total;
}

LiftedPop lift(const Expr& f, const std::vector<Interval>& box,
               const LiftOptions& opts) {
  const int n_x = static_cast<int>(box.size());
  if (max_var(f) > n_x)
    throw std::invalid_argument("lift: expression uses more variables than box");
  std::map<std::string, int> seen;
  count_lift_nodes(f, seen);
  int cap = 0;
  for (const auto& [k, c] : seen) cap += c;
  Lifter lifter(box, n_x, cap, opts);
  Poly obj = lifter.convert(f, 1);
  return lifter.finish(std::move(obj));
}

SaBound min_sa(const Expr& f, const std::vector<Interval>& box, int k,
               const LiftOptions& opts) {
  SaBound out;
  out.lifted = lift(f, box, opts);
  for (const Poly& g : opts.extra_inequalities)
    out.lifted.pop.inequalities.push_back(g.embedded(out.lifted.pop.n));
  NormalizedPop np = normalize_to_unit_box(out.lifted.pop, out.lifted.full_box);
  add_box01_inequalities(np.pop);
  normalize_inequality_scales(np.pop);
  out.order = std::max(k, min_order(np.pop));
  out.sol = solve_pop(np.pop, out.order, opts.sdp_tol, opts.sdp_max_iter);
  out.status = out.sol.status;
  out.bound = out.sol.bound;
  out.normalized_pop = np.pop;
  out.shift = np.shift;
  out.scale = np.scale;
  std::vector<Interval> unit(np.pop.n, Interval(0.0, 1.0));
  std::vector<double> u = extract_minimizer(out.sol, unit);
  out.x_guess.resize(out.lifted.n_x);
  for (int i = 0; i < out.lifted.n_x; ++i)
    out.x_guess[i] = np.shift[i] + np.scale[i] * u[i];
  return out;
}

SaBound max_sa(const Expr& f, const std::vector<Interval>& box, int k,
               const LiftOptions& opts) {
  SaBound out = min_sa(-f, box, k, opts);
  out.bound = -out.bound;
  return out;
}

}  // namespace nlcert
