#pragma once

#include <map>
#include <string>
#include <vector>

#include "nlcert/poly.hpp"
#include "nlcert/sdp.hpp"

namespace nlcert {

/// Polynomial optimization problem: minimize `objective` over the basic
/// semialgebraic set {x : g_j(x) >= 0 for all j, h_l(x) = 0 for all l}.
struct PopProblem {
  int n = 0;
  Poly objective;
  std::vector<Poly> inequalities;
  std::vector<Poly> equalities;
};

/// Smallest admissible relaxation order:
/// max(ceil(deg f / 2), max_j ceil(deg g_j / 2)).
int min_order(const PopProblem& pop);

/// Append the Archimedean ball constraint radius_sq - |x|^2 >= 0.
void add_ball_constraint(PopProblem& pop, double radius_sq);

/// Append x_i (1 - x_i) >= 0 for every variable (unit-box encoding).
void add_box01_inequalities(PopProblem& pop);

/// Rescale every inequality to unit max-coefficient (g >= 0 iff c*g >= 0 for
/// c > 0). Mixed constraint scales otherwise wreck the SDP's conditioning.
void normalize_inequality_scales(PopProblem& pop);

/// Rescale a POP from an arbitrary box onto [0,1]^n via x = shift + scale*u.
struct NormalizedPop {
  PopProblem pop;
  std::vector<double> shift, scale;
};
NormalizedPop normalize_to_unit_box(const PopProblem& pop,
                                    const std::vector<Interval>& box);

using FixedMoments = std::map<Monomial, double, GradedLex>;

/// Order-k moment relaxation compiled to the embedded SDP's standard form.
/// The SDP primal blocks are the multiplier Gram matrices (block 0 for the
/// unit multiplier, block j for inequalities[j-1]); the SDP dual vector holds
/// the negated moments of the free monomials. Moments listed in `fixed`
/// (always containing y_0 = 1) are substituted into the cost matrix, which is
/// how the weighted-degree-d underapproximation variant reuses this path.
struct Relaxation {
  SdpProblem sdp;
  int n = 0;
  int order = 0;
  std::vector<Monomial> free_monomials;  // SDP constraint index -> alpha
  FixedMoments fixed;
  double fixed_objective = 0.0;  // sum of f_alpha * fixed moment values
  std::vector<std::vector<Monomial>> bases;
  /// Monomial basis of the free multiplier polynomial of each equality; the
  /// SDP free variables are their coefficients, concatenated in this order.
  std::vector<std::vector<Monomial>> eq_bases;
};

Relaxation build_relaxation(const PopProblem& pop, int k,
                            const FixedMoments* extra_fixed = nullptr);

struct PopSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  double bound = 0.0;  // hierarchy value: fixed_objective - primal optimum
  std::vector<double> first_moments;  // y_{e_i}, the minimizer guess
  FixedMoments moments;               // all moments of degree <= 2k
  std::vector<Eigen::MatrixXd> gram;  // per-block multiplier Grams
  Eigen::VectorXd eq_coeffs;  // equality multiplier coefficients (see eq_bases)
  int iterations = 0;
  double gap = 0.0;
};

PopSolution solve_pop(const PopProblem& pop, int k, double tol = 1e-8,
                      int max_iter = 200,
                      const FixedMoments* extra_fixed = nullptr);

/// First-order moments clamped to the box.
std::vector<double> extract_minimizer(const PopSolution& sol,
                                      const std::vector<Interval>& box);

/// A putative Positivstellensatz identity
///   objective - mu = sum_j z_j' G_j z_j * g_j + sum_l p_l * h_l
/// (g for block 0 is 1; the p_l are free multipliers of the equalities h_l),
/// recorded with floating-point Grams; verification reestablishes soundness.
struct Certificate {
  int n = 0;
  int order = 0;
  double mu = 0.0;
  Poly objective;
  std::vector<Poly> inequalities;
  std::vector<Poly> equalities;
  std::vector<Poly> eq_multipliers;
  std::vector<std::vector<Monomial>> bases;
  std::vector<Eigen::MatrixXd> gram;
};

Certificate extract_certificate(const PopProblem& pop, const Relaxation& rel,
                                const PopSolution& sol);

struct VerifyResult {
  bool certified = false;
  double mu_rigorous = 0.0;  // sound lower bound on the constraint set
  double residual_l1 = 0.0;  // weighted l1 of the interval identity residual
  std::vector<double> psd_margin;  // certified lambda_min lower bound per block
};

/// Interval recomputation of the identity plus a rigorous PSD check of each
/// Gram (Gershgorin after an approximate eigenbasis rotation). Blocks that
/// miss PSD by delta are repaired with a delta*I shift whose cost is charged
/// against mu; mu_rigorous is always a sound bound over `box`.
VerifyResult verify_certificate(const Certificate& c,
                                const std::vector<Interval>& box);

/// Certified lower bound on the smallest eigenvalue of a symmetric matrix:
/// congruence with the approximate eigenbasis Q (inertia-preserving for any
/// invertible Q), Gershgorin in interval arithmetic, corrected by the
/// certified spectrum of Q'Q.
double rigorous_lambda_min(const Eigen::MatrixXd& g);

std::string certificate_to_json(const Certificate& c);
Certificate certificate_from_json(const std::string& text);

}  // namespace nlcert
