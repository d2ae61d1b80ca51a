#include "nlcert/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "nlcert/approx.hpp"
#include "nlcert/lift.hpp"

namespace nlcert {

namespace {

using nlohmann::json;

json box_to_json(const std::vector<Interval>& box) {
  json out = json::array();
  for (const auto& b : box) out.push_back({b.lo, b.hi});
  return out;
}

json vec_to_json(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

double finite_or(double v, double fallback) {
  return std::isfinite(v) ? v : fallback;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

ApproxMode approx_mode(const std::string& name) {
  if (name == "maxplus") return ApproxMode::Maxplus;
  if (name == "minimax") return ApproxMode::Minimax;
  if (name == "interval") return ApproxMode::IntervalOnly;
  throw std::invalid_argument("unknown approximation mode: " + name);
}

OptimOptions optim_options(const RunConfig& cfg, const Problem& prob) {
  OptimOptions oo;
  oo.order = cfg.order;
  oo.iterations = cfg.iters;
  oo.seed = cfg.seed;
  oo.lift.sdp_tol = cfg.tol;
  const int n = static_cast<int>(prob.box.size());
  for (const Expr& c : prob.constraints) {
    std::optional<Poly> g = to_poly(c, n);
    if (!g)
      throw std::invalid_argument(
          "constraints must be polynomial in the problem variables");
    oo.lift.extra_inequalities.push_back(*g);
  }
  return oo;
}

json iteration_json(const IterationRecord& rec) {
  return {{"bound", rec.bound},
          {"bound_rigorous", rec.bound_rigorous},
          {"upper", rec.upper},
          {"liftings", rec.liftings},
          {"interval_fallback", rec.interval_fallback},
          {"status", to_string(rec.status)}};
}

json report_skeleton(const RunConfig& cfg) {
  json rep;
  rep["schema"] = "nlcert/1";
  rep["kind"] = "report";
  rep["mode"] = cfg.mode;
  rep["config"] = config_to_json(cfg);
  return rep;
}

std::string leaf_cert_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "leaf_%03d.json", index);
  return buf;
}

RunOutcome run_certify(const RunConfig& cfg) {
  Problem prob = parse_problem_file(cfg.file);
  Precision prec = precision_from_config(cfg);

  SubdivideOptions so;
  so.optim = optim_options(cfg, prob);
  so.max_boxes = cfg.max_boxes;
  so.target = cfg.bound;
  SubdivideResult r = subdivide_certify(prob.objective, prob.box, prec, so);

  RunOutcome out;
  out.report = report_skeleton(cfg);
  out.report["problem"] = {{"file", cfg.file},
                           {"variables", prob.var_names},
                           {"box", box_to_json(prob.box)}};
  out.report["status"] = r.certified ? "certified" : "inconclusive";
  out.report["target"] = cfg.bound;
  out.report["lower"] = finite_or(r.lower, 0.0);
  out.report["upper"] = finite_or(r.upper, 0.0);
  out.report["minimizer"] = vec_to_json(r.minimizer);
  out.report["boxes"] = r.boxes_used;

  if (!cfg.cert_dir.empty()) std::filesystem::create_directories(cfg.cert_dir);
  json leaves = json::array();
  for (size_t i = 0; i < r.leaves.size(); ++i) {
    const LeafRecord& leaf = r.leaves[i];
    json lj = {{"box", box_to_json(leaf.box)}, {"bound", leaf.bound}};
    if (leaf.has_certificate) {
      lj["certificate_bound"] = leaf.certificate_bound;
      if (!cfg.cert_dir.empty()) {
        const std::string name = leaf_cert_name(static_cast<int>(i));
        write_text_file(cfg.cert_dir + "/" + name,
                        certificate_to_json(leaf.certificate));
        lj["certificate"] = name;
      }
    }
    leaves.push_back(std::move(lj));
  }
  out.report["leaves"] = std::move(leaves);
  out.report["timing"] = {{"seconds", r.seconds}};

  out.exit_code = r.certified ? 0 : 1;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "certify %s: %s lower=%.6g upper=%.6g boxes=%d time=%.1fs",
                cfg.file.c_str(), r.certified ? "certified" : "inconclusive",
                r.lower, r.upper, r.boxes_used, r.seconds);
  out.summary = buf;
  return out;
}

RunOutcome run_minimize_problem(const RunConfig& cfg, const Problem& prob,
                                const std::string& label) {
  Precision prec = precision_from_config(cfg);
  OptimOptions oo = optim_options(cfg, prob);

  const auto t0 = std::chrono::steady_clock::now();
  OptimResult r = template_optim(prob.objective, prob.box, prec, oo);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const bool solved = std::isfinite(r.lower_rigorous);

  RunOutcome out;
  out.report = report_skeleton(cfg);
  out.report["problem"] = {{"file", label},
                           {"variables", prob.var_names},
                           {"box", box_to_json(prob.box)}};
  out.report["status"] = solved ? "solved" : "inconclusive";
  out.report["lower"] = finite_or(r.lower, 0.0);
  out.report["lower_rigorous"] = finite_or(r.lower_rigorous, 0.0);
  out.report["upper"] = finite_or(r.upper, 0.0);
  out.report["minimizer"] = vec_to_json(r.minimizer);
  json iters = json::array();
  for (const auto& rec : r.iterations) iters.push_back(iteration_json(rec));
  out.report["iterations"] = std::move(iters);
  if (r.has_certificate && !cfg.cert_dir.empty()) {
    std::filesystem::create_directories(cfg.cert_dir);
    const std::string name = "certificate.json";
    write_text_file(cfg.cert_dir + "/" + name,
                    certificate_to_json(r.certificate));
    out.report["certificate"] = name;
  }
  out.report["timing"] = {{"seconds", seconds}};

  out.exit_code = solved ? 0 : 1;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "minimize %s: %s lower=%.6g (rigorous %.6g) upper=%.6g "
                "iters=%zu time=%.1fs",
                label.c_str(), solved ? "solved" : "inconclusive", r.lower,
                r.lower_rigorous, r.upper, r.iterations.size(), seconds);
  out.summary = buf;
  return out;
}

RunOutcome run_minimize(const RunConfig& cfg) {
  Problem prob = parse_problem_file(cfg.file);
  return run_minimize_problem(cfg, prob, cfg.file);
}

// --- bench suites ---------------------------------------------------------

json bench_mc(const RunConfig& cfg) {
  RunConfig sub = cfg;
  sub.mode = "certify";
  sub.file = cfg.bench_dir + "/mc.prob";
  sub.bound = -1.92;
  if (sub.points.find("sin") == sub.points.end()) sub.points["sin"] = 2;
  sub.out.clear();
  sub.cert_dir.clear();
  RunOutcome r = run_certify(sub);
  return {{"suite", "mc"},
          {"target", -1.92},
          {"status", r.report["status"]},
          {"lower", r.report["lower"]},
          {"boxes", r.report["boxes"]},
          {"seconds", r.report["timing"]["seconds"]}};
}

json bench_swf(const RunConfig& cfg) {
  RunConfig sub = cfg;
  sub.mode = "minimize";
  if (sub.points.find("sin") == sub.points.end()) sub.points["sin"] = 4;
  sub.out.clear();
  sub.cert_dir.clear();
  Problem prob = schwefel_problem(cfg.swf_n, cfg.swf_eps);
  RunOutcome r = run_minimize_problem(sub, prob, "swf");
  return {{"suite", "swf"},
          {"n", cfg.swf_n},
          {"eps", cfg.swf_eps},
          {"status", r.report["status"]},
          {"lower", r.report["lower"]},
          {"lower_rigorous", r.report["lower_rigorous"]},
          {"upper", r.report["upper"]},
          {"seconds", r.report["timing"]["seconds"]}};
}

json bench_flyspeck(const RunConfig& cfg) {
  Problem sa = parse_problem_file(cfg.bench_dir + "/flyspeck9922_sa.prob");
  Problem full = parse_problem_file(cfg.bench_dir + "/flyspeck9922.prob");

  LiftOptions lo;
  lo.sdp_tol = cfg.tol;
  const auto t0 = std::chrono::steady_clock::now();
  SaBound mn = min_sa(sa.objective, sa.box, cfg.order, lo);
  SaBound mx = max_sa(sa.objective, sa.box, cfg.order, lo);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  // Interval baseline for the full inequality: bound the arctan argument by
  // the semialgebraic relaxation, then add the interval range of the affine
  // sqrt part. The parsed objective is l + arctan(f_sa); peel the arctan term.
  double baseline = 0.0;
  bool have_baseline = false;
  if (full.objective->kind == ExprKind::Add &&
      full.objective->children[1]->kind == ExprKind::Dict) {
    Expr l = full.objective->children[0];
    Interval il = interval_eval(l, full.box);
    baseline = (Interval(il.lo) + atan(Interval(mn.bound))).lo;
    have_baseline = true;
  }

  json rows = json::array();
  rows.push_back({{"suite", "flyspeck9922"},
                  {"name", "fsa_min"},
                  {"k", cfg.order},
                  {"bound", mn.bound},
                  {"status", to_string(mn.status)},
                  {"seconds", seconds}});
  rows.push_back({{"suite", "flyspeck9922"},
                  {"name", "fsa_max"},
                  {"k", cfg.order},
                  {"bound", mx.bound},
                  {"status", to_string(mx.status)}});
  if (have_baseline)
    rows.push_back({{"suite", "flyspeck9922"},
                    {"name", "interval_baseline"},
                    {"k", cfg.order},
                    {"bound", baseline}});
  return rows;
}

json bench_l1table(const RunConfig& cfg) {
  Problem sa = parse_problem_file(cfg.bench_dir + "/flyspeck9922_sa.prob");
  LiftOptions lo;
  lo.sdp_tol = cfg.tol;
  const int k = cfg.order;
  double vol = 1.0;
  for (const auto& b : sa.box) vol *= b.width();
  const double int_f =
      qmc_integral(sa.objective, sa.box, 100000) / vol;  // unit-box scale

  json rows = json::array();
  for (int d : {2, 4}) {
    const auto t0 = std::chrono::steady_clock::now();
    L1Underapprox lu = l1_underapprox(sa.objective, sa.box, d, k, lo);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    // Certified minimum of h over the unit box at the same order.
    double mu = 0.0;
    std::string mu_status = "not-run";
    if (lu.status == SdpStatus::Optimal) {
      PopProblem hp{static_cast<int>(sa.box.size()), lu.h, {}};
      add_box01_inequalities(hp);
      PopSolution hs = solve_pop(hp, std::max(k, min_order(hp)), cfg.tol);
      mu = hs.bound + lu.rigor_shift;
      mu_status = to_string(hs.status);
    }
    rows.push_back({{"suite", "l1table"},
                    {"d", d},
                    {"k", k},
                    {"mu", mu},
                    {"mu_status", mu_status},
                    {"integral_h", lu.integral},
                    {"tightness", int_f - lu.integral},
                    {"status", to_string(lu.status)},
                    {"seconds", seconds}});
  }
  return rows;
}

RunOutcome run_bench(const RunConfig& cfg) {
  json rows = json::array();
  auto append = [&rows](const json& r) {
    if (r.is_array())
      for (const auto& x : r) rows.push_back(x);
    else
      rows.push_back(r);
  };
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.suite == "mc" || cfg.suite == "all") append(bench_mc(cfg));
  if (cfg.suite == "swf" || cfg.suite == "all") append(bench_swf(cfg));
  if (cfg.suite == "flyspeck9922" || cfg.suite == "all")
    append(bench_flyspeck(cfg));
  if (cfg.suite == "l1table" || cfg.suite == "all") append(bench_l1table(cfg));
  if (rows.empty()) throw std::invalid_argument("unknown suite: " + cfg.suite);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  RunOutcome out;
  out.report = report_skeleton(cfg);
  out.report["status"] = "ok";
  out.report["rows"] = rows;
  out.report["timing"] = {{"seconds", seconds}};
  out.exit_code = 0;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "bench %s: %zu rows, time=%.1fs",
                cfg.suite.c_str(), rows.size(), seconds);
  out.summary = buf;
  return out;
}

}  // namespace

json config_to_json(const RunConfig& cfg) {
  json pts = json::object(), degs = json::object();
  for (const auto& [k, v] : cfg.points) pts[k] = v;
  for (const auto& [k, v] : cfg.degree) degs[k] = v;
  json out = {{"mode", cfg.mode},
              {"file", cfg.file},
              {"suite", cfg.suite},
              {"order", cfg.order},
              {"approx", cfg.approx},
              {"points", pts},
              {"degree", degs},
              {"reduce_lift", cfg.reduce_lift},
              {"nlift_max", cfg.nlift_max},
              {"max_boxes", cfg.max_boxes},
              {"iters", cfg.iters},
              {"tol", cfg.tol},
              {"seed", cfg.seed}};
  if (std::isfinite(cfg.bound)) out["bound"] = cfg.bound;
  if (cfg.mode == "bench") {
    out["swf_n"] = cfg.swf_n;
    out["swf_eps"] = cfg.swf_eps;
  }
  return out;
}

Precision precision_from_config(const RunConfig& cfg) {
  Precision prec;
  prec.mode = approx_mode(cfg.approx);
  auto check_fn = [](const std::string& name) {
    if (!dictionary_lookup(name))
      throw std::invalid_argument("unknown function name: " + name);
  };
  for (const auto& [name, k] : cfg.points) {
    check_fn(name);
    if (k < 1) throw std::invalid_argument("point count must be >= 1");
    prec.points_per_fn[name] = k;
  }
  for (const auto& [name, d] : cfg.degree) {
    check_fn(name);
    if (d < 1) throw std::invalid_argument("degree must be >= 1");
    prec.degree_per_fn[name] = d;
  }
  if (cfg.nlift_max < 1)
    throw std::invalid_argument("lifting budget must be >= 1");
  prec.n_lifting_max = cfg.nlift_max;
  if (cfg.reduce_lift == "none") {
    prec.reduce = ReduceMode::None;
  } else if (cfg.reduce_lift == "maxplus") {
    prec.reduce = ReduceMode::Maxplus;
  } else if (cfg.reduce_lift.rfind("l1:", 0) == 0) {
    prec.reduce = ReduceMode::L1;
    prec.reduce_l1_degree = std::stoi(cfg.reduce_lift.substr(3));
    if (prec.reduce_l1_degree < 1)
      throw std::invalid_argument("reduce-lift l1 degree must be >= 1");
  } else {
    throw std::invalid_argument("unknown reduce-lift mode: " + cfg.reduce_lift);
  }
  return prec;
}

Problem schwefel_problem(int n, int eps) {
  if (n < 1) throw std::invalid_argument("schwefel: n must be >= 1");
  Problem prob;
  prob.box.assign(n, Interval(1.0, 500.0));
  for (int i = 0; i < n; ++i) prob.var_names.push_back("x" + std::to_string(i + 1));
  Expr sum;
  const int terms = eps == 0 ? n : n - 1;
  for (int i = 0; i < terms; ++i) {
    Expr xi = ExprNode::make_var(i);
    Expr coeff = xi;
    if (eps != 0)
      coeff = xi + double(eps) * ExprNode::make_var(i + 1);
    Expr term = coeff * ExprNode::make_dict(DictFn::Sin,
                                            ExprNode::make_sqrt(xi));
    sum = sum ? sum + term : term;
  }
  prob.objective = -sum;
  return prob;
}

RunOutcome run(const RunConfig& cfg) {
  RunOutcome out;
  try {
    if (cfg.mode == "certify") {
      if (!std::isfinite(cfg.bound))
        throw std::invalid_argument("certify requires --bound");
      out = run_certify(cfg);
    } else if (cfg.mode == "minimize") {
      out = run_minimize(cfg);
    } else if (cfg.mode == "bench") {
      out = run_bench(cfg);
    } else {
      throw std::invalid_argument("unknown mode: " + cfg.mode);
    }
  } catch (const std::exception& ex) {
    out.exit_code = 2;
    out.summary = std::string("error: ") + ex.what();
    out.report = report_skeleton(cfg);
    out.report["status"] = "error";
    out.report["error"] = ex.what();
  }
  if (!cfg.out.empty()) {
    try {
      write_text_file(cfg.out, out.report.dump(2) + "\n");
    } catch (const std::exception& ex) {
      out.exit_code = 2;
      out.summary = std::string("error: ") + ex.what();
    }
  }
  return out;
}

}  // namespace nlcert
