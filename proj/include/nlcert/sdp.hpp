#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nlcert {

/// Block-diagonal semidefinite program in standard primal form, optionally
/// extended with free (sign-unconstrained) scalar variables u:
///   min  sum_b <C_b, X_b> + c_free' u
///   s.t. sum_b <A_{i,b}, X_b> + (F u)_i = b_i   (i = 1..m),   X_b >= 0,
/// with dual
///   max  b'y   s.t.  C_b - sum_i y_i A_{i,b} = S_b >= 0,   F' y = c_free.
/// Symmetric matrices are stored sparsely as upper-triangle entries.
struct SdpProblem {
  struct Entry {
    int block;
    int row, col;  // row <= col
    double value;
  };
  struct FreeEntry {
    int constraint;
    double value;
  };

  std::vector<int> block_sizes;            // 1-blocks encode linear constraints
  std::vector<Entry> cost;                 // C
  std::vector<std::vector<Entry>> constraints;  // A_i, one list per i
  Eigen::VectorXd rhs;                     // b
  std::vector<std::vector<FreeEntry>> free_vars;  // columns of F
  Eigen::VectorXd free_cost;               // c_free (empty when no free vars)

  int num_constraints() const { return static_cast<int>(constraints.size()); }
  int num_free() const { return static_cast<int>(free_vars.size()); }
  void validate() const;  // throws on malformed data
};

enum class SdpStatus {
  Optimal,
  PrimalInfeasibleCertificate,
  DualInfeasibleCertificate,
  NumericalFailure,
  IterationLimit,
};

const char* to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  std::vector<Eigen::MatrixXd> X;  // primal blocks
  Eigen::VectorXd u;               // primal free variables
  Eigen::VectorXd y;               // dual vector
  std::vector<Eigen::MatrixXd> S;  // dual slack blocks
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;  // ||b - A(X)|| / (1 + ||b||)
  double dual_residual = 0.0;    // ||C - A'(y) - S||_F / (1 + ||C||_F)
  double duality_gap = 0.0;      // <X,S> / (1 + |pobj| + |dobj|)
  int iterations = 0;
  std::string trace;  // short iteration summary, filled on failure
};

/// Primal-dual path-following with Nesterov-Todd scaling and a Mehrotra
/// predictor-corrector; dense per-block linear algebra. Deterministic.
SdpSolution solve(const SdpProblem& p, double tol = 1e-8, int max_iter = 200);

/// Sparse SDPA-style text representation; round-trips bit-exactly.
std::string export_sdpa(const SdpProblem& p);
SdpProblem import_sdpa(const std::string& text);

}  // namespace nlcert
