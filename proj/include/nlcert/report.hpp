#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "nlcert/optim.hpp"
#include "nlcert/parser.hpp"

namespace nlcert {

/// Everything a run needs, assembled from command-line flags (or directly by
/// tests). Validation happens before any solve.
struct RunConfig {
  std::string mode;   // "certify" | "minimize" | "bench"
  std::string file;   // problem file (certify / minimize)
  std::string suite;  // bench: "mc" | "swf" | "flyspeck9922" | "l1table"
  double bound = -std::numeric_limits<double>::infinity();  // certify target
  int order = 2;
  std::string approx = "maxplus";  // "maxplus" | "minimax" | "interval"
  std::map<std::string, int> points;  // per-function maxplus anchor counts
  std::map<std::string, int> degree;  // per-function minimax degrees
  std::string reduce_lift = "none";   // "none" | "maxplus" | "l1:<d>"
  int nlift_max = 12;
  int max_boxes = 64;
  int iters = 4;
  double tol = 1e-8;
  unsigned long long seed = 0;
  int swf_n = 2;      // bench swf dimension
  int swf_eps = 0;    // bench swf coupling (0: separable, 1: modified)
  std::string out;       // report JSON path (empty: not written)
  std::string cert_dir;  // certificate directory (empty: not written)
  std::string bench_dir = "benchmarks";  // where the .prob corpus lives
};

nlohmann::json config_to_json(const RunConfig& cfg);

/// Translate the flag-level approximation settings into the optimizer's
/// precision record; throws std::invalid_argument on unknown names.
Precision precision_from_config(const RunConfig& cfg);

struct RunOutcome {
  int exit_code = 2;  // 0: certified/solved, 1: inconclusive, 2: error
  std::string summary;  // the one-line human summary
  nlohmann::json report;
};

/// Run the configured mode end to end: solve, assemble the report (schema
/// "nlcert/1"), write the report and certificate files when paths are set.
/// Errors are caught and turned into exit code 2 with an "error" report.
RunOutcome run(const RunConfig& cfg);

/// The plain Schwefel objective -sum x_i sin(sqrt(x_i)) on [1,500]^n, or the
/// coupled variant -sum_{i<n} (x_i + eps x_{i+1}) sin(sqrt(x_i)) for eps=1.
Problem schwefel_problem(int n, int eps);

}  // namespace nlcert
