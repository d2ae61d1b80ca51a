#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlcert/report.hpp"

namespace {

bool parse_assignments(const std::vector<std::string>& items,
                       std::map<std::string, int>& out, std::string& err) {
  for (const std::string& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      err = "expected <fn>=<value>, got '" + item + "'";
      return false;
    }
    try {
      out[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      err = "bad integer in '" + item + "'";
      return false;
    }
  }
  return true;
}

void add_common_flags(CLI::App* cmd, nlcert::RunConfig& cfg,
                      std::vector<std::string>& points,
                      std::vector<std::string>& degrees) {
  cmd->add_option("--order", cfg.order, "Relaxation order k");
  cmd->add_option("--approx", cfg.approx,
                  "Approximation mode: maxplus|minimax|interval")
      ->check(CLI::IsMember({"maxplus", "minimax", "interval"}));
  cmd->add_option("--points", points,
                  "Initial maxplus anchors per function, e.g. sin=2");
  cmd->add_option("--degree", degrees,
                  "Initial minimax degree per function, e.g. arctan=4");
  cmd->add_option("--reduce-lift", cfg.reduce_lift,
                  "Lifting reduction: none|maxplus|l1:<d>");
  cmd->add_option("--nlift-max", cfg.nlift_max, "Lifting variable budget");
  cmd->add_option("--max-boxes", cfg.max_boxes, "Subdivision box budget");
  cmd->add_option("--iters", cfg.iters, "Template refinement iterations");
  cmd->add_option("--tol", cfg.tol, "Interior-point tolerance");
  cmd->add_option("--seed", cfg.seed, "Sampling seed");
  cmd->add_option("--out", cfg.out, "Report JSON output path");
  cmd->add_option("--cert-dir", cfg.cert_dir, "Certificate output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "nlcert: certified lower bounds for polynomial, semialgebraic and "
      "transcendental optimization over boxes"};
  app.require_subcommand(1);

  nlcert::RunConfig cfg;
  std::vector<std::string> points, degrees;

  CLI::App* certify =
      app.add_subcommand("certify", "Prove objective >= bound on the box");
  certify->add_option("--file", cfg.file, "Problem file")->required();
  certify->add_option("--bound", cfg.bound, "Target lower bound")->required();
  add_common_flags(certify, cfg, points, degrees);

  CLI::App* minimize =
      app.add_subcommand("minimize", "Compute a certified lower bound");
  minimize->add_option("--file", cfg.file, "Problem file")->required();
  add_common_flags(minimize, cfg, points, degrees);

  CLI::App* bench = app.add_subcommand("bench", "Run a benchmark suite");
  bench->add_option("suite", cfg.suite,
                    "Suite: mc|swf|flyspeck9922|l1table|all")
      ->required();
  bench->add_option("--swf-n", cfg.swf_n, "Schwefel dimension");
  bench->add_option("--swf-eps", cfg.swf_eps, "Schwefel coupling (0 or 1)");
  bench->add_option("--bench-dir", cfg.bench_dir, "Benchmark corpus directory");
  add_common_flags(bench, cfg, points, degrees);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::string err;
  if (!parse_assignments(points, cfg.points, err) ||
      !parse_assignments(degrees, cfg.degree, err)) {
    std::fprintf(stderr, "error: %s\n", err.c_str());
    return 2;
  }

  if (certify->parsed()) cfg.mode = "certify";
  if (minimize->parsed()) cfg.mode = "minimize";
  if (bench->parsed()) cfg.mode = "bench";

  nlcert::RunOutcome out = nlcert::run(cfg);
  std::printf("%s\n", out.summary.c_str());
  if (cfg.out.empty() && out.exit_code != 2)
    std::printf("%s\n", out.report.dump(2).c_str());
  return out.exit_code;
}
