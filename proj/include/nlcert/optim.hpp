#pragma once

#include <map>
#include <string>
#include <vector>

#include "nlcert/approx.hpp"
#include "nlcert/expr.hpp"
#include "nlcert/lift.hpp"

namespace nlcert {

enum class ApproxMode { Maxplus, Minimax, IntervalOnly };
enum class ReduceMode { None, Maxplus, L1 };

/// Per-node refinement state, keyed by the node's structural key.
struct NodeState {
  std::vector<double> points;  // maxplus anchors in the child's image
  int degree = 0;              // minimax degree (0: take the per-fn default)
};

struct Precision {
  ApproxMode mode = ApproxMode::Maxplus;
  std::map<std::string, int> points_per_fn;  // initial anchors per dictionary fn
  std::map<std::string, int> degree_per_fn;  // initial minimax degree per fn
  std::map<std::string, NodeState> node;     // runtime per-node refinements
  int n_lifting_max = 12;
  /// Relaxation order for auxiliary range bounds of transcendental-node
  /// arguments when interval arithmetic cannot enclose them.
  int sa_order = 2;
  ReduceMode reduce = ReduceMode::None;
  int reduce_l1_degree = 2;
  int reduce_l1_order = 2;
  std::vector<std::vector<double>> template_anchors;  // maxplus reduction

  int initial_points(DictFn fn) const;
  int initial_degree(DictFn fn) const;
};

/// Semialgebraic template: under <= e <= over on the box.
struct TemplatePair {
  Expr under, over;
  bool interval_fallback = false;  // some node degraded to constant bounds
};

/// Recursive template construction: semialgebraic subtrees pass through
/// unchanged, dictionary nodes get one-sided unary approximations composed by
/// monotonicity, other operations combine child templates with sign-aware
/// rules, and the result is coarsened when it exceeds the lifting budget.
TemplatePair template_approx(const Expr& e, const std::vector<Interval>& box,
                             const Precision& prec);

/// Number of lifting variables the expression would introduce.
int lifting_count(const Expr& e);

/// Deterministic uniform samples of e over the box; returns the best point.
std::vector<double> randeval_argmin(const Expr& e,
                                    const std::vector<Interval>& box,
                                    int samples, unsigned long long seed);

/// Clamped projected coordinate descent from x0 (20 sweeps).
std::vector<double> local_descent(const Expr& e,
                                  const std::vector<Interval>& box,
                                  std::vector<double> x0);

/// Quasi-Monte-Carlo (Halton) average of e over the box times its volume.
double qmc_integral(const Expr& e, const std::vector<Interval>& box,
                    int samples);

struct OptimOptions {
  int order = 2;                  // relaxation order for the lifted POP
  int iterations = 4;             // template refinement rounds
  int samples = 512;              // randeval budget
  unsigned long long seed = 0;
  double stop_at = std::numeric_limits<double>::infinity();
  std::vector<double> initial_point;  // overrides randeval seeding
  LiftOptions lift;
  bool rigorous = true;  // verify certificates; report sound bounds
};

struct IterationRecord {
  double bound = 0.0;           // relaxation value of the under-template
  double bound_rigorous = 0.0;  // certified (when rigorous verification ran)
  double upper = 0.0;           // best evaluated point so far
  int liftings = 0;
  bool interval_fallback = false;
  SdpStatus status = SdpStatus::NumericalFailure;
};

struct OptimResult {
  double lower = -std::numeric_limits<double>::infinity();  // best bound
  double lower_rigorous = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  std::vector<double> minimizer;  // best evaluated point
  std::vector<IterationRecord> iterations;
  SaBound last;          // relaxation data of the final iteration
  Certificate certificate;  // of the final under-template bound
  bool has_certificate = false;
};

/// Template refinement loop: approximate, bound through the lifted
/// relaxation, extract a minimizer candidate, enrich the templates at its
/// image, repeat.
OptimResult template_optim(const Expr& e, const std::vector<Interval>& box,
                           Precision prec, const OptimOptions& opts);

struct SubdivideOptions {
  OptimOptions optim;
  int max_boxes = 64;
  double time_budget_seconds = 120.0;
  double target = -std::numeric_limits<double>::infinity();  // certify f >= target
};

struct LeafRecord {
  std::vector<Interval> box;
  double bound = 0.0;
  bool has_certificate = false;  // false when the interval shortcut closed it
  Certificate certificate;       // over the leaf's normalized lifted POP
  double certificate_bound = 0.0;  // verified value at production time
};

struct SubdivideResult {
  bool certified = false;  // every leaf has a rigorous bound >= target
  double lower = -std::numeric_limits<double>::infinity();  // min over leaves
  double upper = std::numeric_limits<double>::infinity();
  std::vector<double> minimizer;
  int boxes_used = 0;
  double seconds = 0.0;
  std::vector<LeafRecord> leaves;
};

/// Branch-and-bound over the box: worst-bound-first worklist, bisection of
/// the widest coordinate, interval shortcut before the relaxation machinery.
SubdivideResult subdivide_certify(const Expr& e,
                                  const std::vector<Interval>& box,
                                  const Precision& prec,
                                  const SubdivideOptions& opts);

}  // namespace nlcert
