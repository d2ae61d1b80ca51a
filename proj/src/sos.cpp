#include "nlcert/sos.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "json.hpp"

namespace nlcert {

namespace {

int half_degree_up(const Poly& p) { return (p.deg() + 1) / 2; }

Monomial mon_sum(const Monomial& a, const Monomial& b, const Monomial& c) {
  Monomial r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i] + c[i];
  return r;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

}  // namespace

int min_order(const PopProblem& pop) {
  int k = half_degree_up(pop.objective);
  for (const auto& g : pop.inequalities) k = std::max(k, half_degree_up(g));
  for (const auto& h : pop.equalities) k = std::max(k, half_degree_up(h));
  return std::max(k, 1);
}

void add_ball_constraint(PopProblem& pop, double radius_sq) {
  Poly g = Poly::constant(pop.n, radius_sq);
  for (int i = 0; i < pop.n; ++i) {
    Poly xi = Poly::variable(pop.n, i);
    g = g - xi * xi;
  }
  pop.inequalities.push_back(g);
}

void add_box01_inequalities(PopProblem& pop) {
  for (int i = 0; i < pop.n; ++i) {
    Poly xi = Poly::variable(pop.n, i);
    pop.inequalities.push_back(xi - xi * xi);
  }
}

void normalize_inequality_scales(PopProblem& pop) {
  auto unit_scale = [](Poly& g) {
    double mx = 0.0;
    for (const auto& [mono, c] : g.terms()) mx = std::max(mx, std::abs(c));
    if (mx > 0.0 && std::isfinite(mx)) g = g * (1.0 / mx);
  };
  for (Poly& g : pop.inequalities) unit_scale(g);
  for (Poly& h : pop.equalities) unit_scale(h);
}

NormalizedPop normalize_to_unit_box(const PopProblem& pop,
                                    const std::vector<Interval>& box) {
  if (static_cast<int>(box.size()) != pop.n)
    throw std::invalid_argument("normalize_to_unit_box: box dimension mismatch");
  NormalizedPop out;
  out.pop.n = pop.n;
  out.shift.resize(pop.n);
  out.scale.resize(pop.n);
  for (int i = 0; i < pop.n; ++i) {
    out.shift[i] = box[i].lo;
    out.scale[i] = box[i].hi - box[i].lo;
    if (!(out.scale[i] > 0.0)) out.scale[i] = 1.0;  // degenerate coordinate
  }
  out.pop.objective = pop.objective.substitute_affine(out.shift, out.scale);
  for (const auto& g : pop.inequalities)
    out.pop.inequalities.push_back(g.substitute_affine(out.shift, out.scale));
  for (const auto& h : pop.equalities)
    out.pop.equalities.push_back(h.substitute_affine(out.shift, out.scale));
  return out;
}

Relaxation build_relaxation(const PopProblem& pop, int k,
                            const FixedMoments* extra_fixed) {
  if (k < min_order(pop))
    throw std::invalid_argument("build_relaxation: order below the minimum");
  Relaxation rel;
  rel.n = pop.n;
  rel.order = k;
  rel.fixed[Monomial(pop.n, 0)] = 1.0;
  if (extra_fixed)
    for (const auto& [m, v] : *extra_fixed) rel.fixed[m] = v;

  const int nblocks = 1 + static_cast<int>(pop.inequalities.size());
  rel.bases.resize(nblocks);
  rel.bases[0] = mons(pop.n, k);
  for (int j = 1; j < nblocks; ++j)
    rel.bases[j] = mons(pop.n, k - half_degree_up(pop.inequalities[j - 1]));
  for (const auto& h : pop.equalities)
    rel.eq_bases.push_back(mons(pop.n, 2 * k - h.deg()));

  const Poly one = Poly::constant(pop.n, 1.0);
  auto g_of = [&](int j) -> const Poly& {
    return j == 0 ? one : pop.inequalities[j - 1];
  };

  // Pass 1: enumerate every monomial reachable as z_p + z_q + gamma and give
  // the non-fixed ones deterministic graded-lex dual indices.
  struct Contribution {
    Monomial alpha;
    int block, p, q;
    double value;
  };
  std::vector<Contribution> contribs;
  std::map<Monomial, int, GradedLex> index;
  for (int j = 0; j < nblocks; ++j) {
    const auto& basis = rel.bases[j];
    const int nb = static_cast<int>(basis.size());
    for (int p = 0; p < nb; ++p)
      for (int q = p; q < nb; ++q)
        for (const auto& [gamma, c] : g_of(j).terms()) {
          Monomial alpha = mon_sum(basis[p], basis[q], gamma);
          if (!rel.fixed.count(alpha)) index.emplace(alpha, 0);
          contribs.push_back({std::move(alpha), j, p, q, c});
        }
  }
  for (size_t l = 0; l < pop.equalities.size(); ++l)
    for (const auto& beta : rel.eq_bases[l])
      for (const auto& [gamma, c] : pop.equalities[l].terms()) {
        Monomial alpha(pop.n, 0);
        for (int i = 0; i < pop.n; ++i) alpha[i] = beta[i] + gamma[i];
        if (!rel.fixed.count(alpha)) index.emplace(alpha, 0);
      }
  {
    int next = 0;
    for (auto& [m, idx] : index) idx = next++;
  }
  rel.free_monomials.resize(index.size());
  for (const auto& [m, idx] : index) rel.free_monomials[idx] = m;

  // Pass 2: route each contribution to its constraint matrix, or into the
  // cost matrix when the moment is fixed.
  rel.sdp.block_sizes.clear();
  for (const auto& b : rel.bases)
    rel.sdp.block_sizes.push_back(static_cast<int>(b.size()));
  rel.sdp.constraints.assign(index.size(), {});
  std::map<std::tuple<int, int, int>, double> cost_acc;
  for (const auto& c : contribs) {
    auto it = rel.fixed.find(c.alpha);
    if (it != rel.fixed.end()) {
      if (it->second != 0.0)
        cost_acc[{c.block, c.p, c.q}] += c.value * it->second;
    } else {
      rel.sdp.constraints[index.at(c.alpha)].push_back(
          {c.block, c.p, c.q, c.value});
    }
  }
  for (const auto& [key, v] : cost_acc)
    rel.sdp.cost.push_back(
        {std::get<0>(key), std::get<1>(key), std::get<2>(key), v});

  // Equality multipliers: one free SDP variable per coefficient of each p_l;
  // the products x^beta * h_l route to constraint rows (or the cost for fixed
  // moments) exactly like the Gram contributions above.
  int n_free = 0;
  for (const auto& eb : rel.eq_bases) n_free += static_cast<int>(eb.size());
  rel.sdp.free_vars.assign(n_free, {});
  rel.sdp.free_cost = Eigen::VectorXd::Zero(n_free);
  {
    int var = 0;
    for (size_t l = 0; l < pop.equalities.size(); ++l)
      for (const auto& beta : rel.eq_bases[l]) {
        for (const auto& [gamma, cv] : pop.equalities[l].terms()) {
          Monomial alpha(pop.n, 0);
          for (int i = 0; i < pop.n; ++i) alpha[i] = beta[i] + gamma[i];
          auto it = rel.fixed.find(alpha);
          if (it != rel.fixed.end()) {
            if (it->second != 0.0) rel.sdp.free_cost(var) += cv * it->second;
          } else {
            rel.sdp.free_vars[var].push_back({index.at(alpha), cv});
          }
        }
        ++var;
      }
  }

  rel.sdp.rhs = Eigen::VectorXd::Zero(static_cast<int>(index.size()));
  rel.fixed_objective = 0.0;
  for (const auto& [alpha, f_a] : pop.objective.terms()) {
    auto fx = rel.fixed.find(alpha);
    if (fx != rel.fixed.end()) {
      rel.fixed_objective += f_a * fx->second;
    } else {
      auto it = index.find(alpha);
      if (it == index.end())
        throw std::invalid_argument(
            "build_relaxation: objective monomial outside the order-k span");
      rel.sdp.rhs(it->second) = f_a;
    }
  }
  return rel;
}

PopSolution solve_pop(const PopProblem& pop, int k, double tol, int max_iter,
                      const FixedMoments* extra_fixed) {
  // Power-of-two objective rescaling: exact on coefficients, kinder to the
  // interior-point method when the objective dwarfs the (unit-scaled)
  // constraints. Mild imbalance is left alone — rescaling near-unit
  // objectives was observed to hurt convergence.
  double cmax = 0.0;
  for (const auto& [m, c] : pop.objective.terms())
    cmax = std::max(cmax, std::abs(c));
  double scale = 1.0;
  if (cmax > 64.0 || (cmax > 0.0 && cmax < 1.0 / 64.0))
    scale = std::exp2(std::round(std::log2(cmax)));

  PopProblem scaled = pop;
  scaled.objective = pop.objective * (1.0 / scale);
  Relaxation rel = build_relaxation(scaled, k, extra_fixed);

  SdpSolution sdp = solve(rel.sdp, tol, max_iter);

  PopSolution out;
  out.status = sdp.status;
  out.iterations = sdp.iterations;
  out.gap = sdp.duality_gap;
  out.bound = scale * (rel.fixed_objective - sdp.primal_objective);
  out.gram.resize(sdp.X.size());
  for (size_t b = 0; b < sdp.X.size(); ++b) out.gram[b] = scale * sdp.X[b];
  out.eq_coeffs = scale * sdp.u;
  for (const auto& [m, v] : rel.fixed) out.moments[m] = v;
  for (size_t i = 0; i < rel.free_monomials.size(); ++i)
    out.moments[rel.free_monomials[i]] = -sdp.y(static_cast<int>(i));
  out.first_moments.assign(pop.n, 0.0);
  for (int i = 0; i < pop.n; ++i) {
    Monomial e(pop.n, 0);
    e[i] = 1;
    auto it = out.moments.find(e);
    if (it != out.moments.end()) out.first_moments[i] = it->second;
  }
  return out;
}

std::vector<double> extract_minimizer(const PopSolution& sol,
                                      const std::vector<Interval>& box) {
  std::vector<double> x = sol.first_moments;
  for (size_t i = 0; i < x.size() && i < box.size(); ++i)
    x[i] = std::clamp(x[i], box[i].lo, box[i].hi);
  return x;
}

Certificate extract_certificate(const PopProblem& pop, const Relaxation& rel,
                                const PopSolution& sol) {
  Certificate c;
  c.n = pop.n;
  c.order = rel.order;
  c.mu = sol.bound;
  c.objective = pop.objective;
  c.inequalities = pop.inequalities;
  c.equalities = pop.equalities;
  c.bases = rel.bases;
  c.gram = sol.gram;
  int off = 0;
  for (size_t l = 0; l < pop.equalities.size(); ++l) {
    Poly p_l(pop.n);
    for (const auto& beta : rel.eq_bases[l]) {
      if (off < sol.eq_coeffs.size() && sol.eq_coeffs(off) != 0.0)
        p_l.add_term(beta, sol.eq_coeffs(off));
      ++off;
    }
    c.eq_multipliers.push_back(p_l);
  }
  return c;
}

namespace {

using IMat = std::vector<std::vector<Interval>>;

IMat to_imat(const Eigen::MatrixXd& m) {
  IMat r(m.rows(), std::vector<Interval>(m.cols(), Interval(0.0)));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r[i][j] = Interval(m(i, j));
  return r;
}

IMat imul(const IMat& a, const IMat& b) {
  const size_t n = a.size(), k = b.size(), m = b[0].size();
  IMat r(n, std::vector<Interval>(m, Interval(0.0)));
  for (size_t i = 0; i < n; ++i)
    for (size_t l = 0; l < k; ++l) {
      const Interval& ail = a[i][l];
      if (ail.lo == 0.0 && ail.hi == 0.0) continue;
      for (size_t j = 0; j < m; ++j) r[i][j] = r[i][j] + ail * b[l][j];
    }
  return r;
}

IMat itranspose(const IMat& a) {
  IMat r(a[0].size(), std::vector<Interval>(a.size()));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[0].size(); ++j) r[j][i] = a[i][j];
  return r;
}

double gersh_lambda_min(const IMat& h) {
  double lam = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < h.size(); ++i) {
    Interval rad(0.0);
    for (size_t j = 0; j < h.size(); ++j)
      if (j != i) rad = rad + Interval(h[i][j].mag());
    lam = std::min(lam, (h[i][i] - rad).lo);
  }
  return lam;
}

double gersh_lambda_max(const IMat& h) {
  double lam = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < h.size(); ++i) {
    Interval rad(0.0);
    for (size_t j = 0; j < h.size(); ++j)
      if (j != i) rad = rad + Interval(h[i][j].mag());
    lam = std::max(lam, (h[i][i] + rad).hi);
  }
  return lam;
}

}  // namespace

double rigorous_lambda_min(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  if (es.info() != Eigen::Success)
    return gersh_lambda_min(to_imat(g));
  IMat qi = to_imat(es.eigenvectors());
  IMat qt = itranspose(qi);
  IMat qtq = imul(qt, qi);
  double qmin = gersh_lambda_min(qtq);
  if (qmin <= 0.0) return gersh_lambda_min(to_imat(g));  // Q not certified
  double qmax = gersh_lambda_max(qtq);
  IMat h = imul(qt, imul(to_imat(g), qi));
  double hmin = gersh_lambda_min(h);
  // v'Gv = w'Hw/|Qw|^2; split by sign to stay on the sound side.
  if (hmin >= 0.0) return (Interval(hmin) / Interval(qmax)).lo;
  return (Interval(hmin) / Interval(qmin)).lo;
}

namespace {

IPoly multiplier_ipoly(const std::vector<Monomial>& basis,
                       const Eigen::MatrixXd& gram, int n) {
  IPoly s(n);
  const int nb = static_cast<int>(basis.size());
  for (int p = 0; p < nb; ++p)
    for (int q = p; q < nb; ++q) {
      double c = gram(p, q);
      if (c == 0.0) continue;
      Monomial m(n, 0);
      for (int i = 0; i < n; ++i) m[i] = basis[p][i] + basis[q][i];
      s.add_term(m, Interval(p == q ? c : 2.0 * c));
    }
  return s;
}

}  // namespace

VerifyResult verify_certificate(const Certificate& c,
                                const std::vector<Interval>& box) {
  VerifyResult out;
  const int n = c.n;
  IPoly residual = IPoly::from(c.objective);
  residual.add_term(Monomial(n, 0), Interval(-c.mu));

  Interval penalty_total(0.0);
  for (size_t j = 0; j < c.gram.size(); ++j) {
    IPoly sigma = multiplier_ipoly(c.bases[j], c.gram[j], n);
    IPoly g =
        j == 0 ? IPoly::from(Poly::constant(n, 1.0)) : IPoly::from(c.inequalities[j - 1]);
    residual = residual - sigma * g;

    double margin = rigorous_lambda_min(c.gram[j]);
    out.psd_margin.push_back(margin);
    if (margin < 0.0) {
      // Repair with G + delta*I; the extra -delta * sum_p x^{2 z_p} * g_j is
      // charged against mu via its interval magnitude over the box.
      Interval delta = Interval(0.0) - Interval(margin);
      Interval ssum(0.0);
      for (const auto& zp : c.bases[j]) {
        Interval t(1.0);
        for (int i = 0; i < n; ++i) t = t * pow_int(box[i], 2 * zp[i]);
        ssum = ssum + t;
      }
      Interval gval =
          j == 0 ? Interval(1.0) : c.inequalities[j - 1].interval_eval(box);
      Interval prod = ssum * gval;
      penalty_total = penalty_total + delta * Interval(std::max(0.0, prod.hi));
    }
  }

  // Equality multiplier terms: p_l * h_l vanishes pointwise on the feasible
  // set (h_l = 0 there), so subtracting it keeps the bound sound while
  // cancelling its share of the coefficient residual.
  for (size_t l = 0; l < c.eq_multipliers.size() && l < c.equalities.size(); ++l)
    residual =
        residual - IPoly::from(c.eq_multipliers[l]) * IPoly::from(c.equalities[l]);

  out.residual_l1 = residual.weighted_l1(box);
  out.mu_rigorous =
      (Interval(c.mu) - Interval(out.residual_l1) - penalty_total).lo;
  out.certified = out.mu_rigorous >= c.mu - 1e-6 * (1.0 + std::abs(c.mu));
  return out;
}

std::string certificate_to_json(const Certificate& c) {
  nlohmann::json j;
  j["format"] = "nlcert/1";
  j["kind"] = "sos_certificate";
  j["n"] = c.n;
  j["order"] = c.order;
  j["mu"] = fmt_double(c.mu);
  auto poly_json = [](const Poly& p) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [m, v] : p.terms())
      terms.push_back({{"alpha", m}, {"c", fmt_double(v)}});
    return nlohmann::json{{"dim", p.dim()}, {"terms", terms}};
  };
  j["objective"] = poly_json(c.objective);
  j["inequalities"] = nlohmann::json::array();
  for (const auto& g : c.inequalities) j["inequalities"].push_back(poly_json(g));
  j["equalities"] = nlohmann::json::array();
  for (const auto& h : c.equalities) j["equalities"].push_back(poly_json(h));
  j["eq_multipliers"] = nlohmann::json::array();
  for (const auto& p : c.eq_multipliers)
    j["eq_multipliers"].push_back(poly_json(p));
  j["blocks"] = nlohmann::json::array();
  for (size_t b = 0; b < c.gram.size(); ++b) {
    nlohmann::json blk;
    blk["basis"] = c.bases[b];
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < c.gram[b].rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int s = 0; s < c.gram[b].cols(); ++s)
        row.push_back(fmt_double(c.gram[b](r, s)));
      rows.push_back(row);
    }
    blk["gram"] = rows;
    j["blocks"].push_back(blk);
  }
  return j.dump(1);
}

Certificate certificate_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("format", "") != std::string("nlcert/1"))
    throw std::invalid_argument("certificate: unsupported format");
  Certificate c;
  c.n = j.at("n").get<int>();
  c.order = j.at("order").get<int>();
  c.mu = parse_double(j.at("mu").get<std::string>());
  auto poly_from = [](const nlohmann::json& pj) {
    Poly p(pj.at("dim").get<int>());
    for (const auto& t : pj.at("terms"))
      p.add_term(t.at("alpha").get<Monomial>(),
                 parse_double(t.at("c").get<std::string>()));
    return p;
  };
  c.objective = poly_from(j.at("objective"));
  for (const auto& gj : j.at("inequalities"))
    c.inequalities.push_back(poly_from(gj));
  if (j.contains("equalities"))
    for (const auto& hj : j.at("equalities")) c.equalities.push_back(poly_from(hj));
  if (j.contains("eq_multipliers"))
    for (const auto& pj : j.at("eq_multipliers"))
      c.eq_multipliers.push_back(poly_from(pj));
  for (const auto& blk : j.at("blocks")) {
    c.bases.push_back(blk.at("basis").get<std::vector<Monomial>>());
    const auto& rows = blk.at("gram");
    const int nb = static_cast<int>(rows.size());
    Eigen::MatrixXd g(nb, nb);
    for (int r = 0; r < nb; ++r)
      for (int s = 0; s < nb; ++s)
        g(r, s) = parse_double(rows[r][s].get<std::string>());
    c.gram.push_back(g);
  }
  return c;
}

}  // namespace nlcert
