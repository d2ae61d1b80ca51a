#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "nlcert/report.hpp"
#include "nlcert/sos.hpp"

using namespace nlcert;
using nlohmann::json;

namespace {

const char* kTmpDir = "/tmp/nlcert_test_cli";

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Recursively drop timing-related keys so reports can be compared across runs.
json strip_timing(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() == "timing" || it.key() == "seconds") continue;
      out[it.key()] = strip_timing(it.value());
    }
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(strip_timing(v));
    return out;
  }
  return j;
}

int run_binary(const std::string& args) {
  std::string cmd = std::string(NLCERT_BIN) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("run minimize end to end with report and certificate") {
  std::system(("mkdir -p " + std::string(kTmpDir)).c_str());
  const std::string prob = std::string(kTmpDir) + "/root.prob";
  write_file(prob,
             "var x in [1, 4];\n"
             "objective sqrt(x) + 1/x;\n");
  RunConfig cfg;
  cfg.mode = "minimize";
  cfg.file = prob;
  cfg.iters = 1;
  cfg.out = std::string(kTmpDir) + "/report.json";
  cfg.cert_dir = std::string(kTmpDir) + "/certs";
  RunOutcome r = run(cfg);
  CHECK(r.exit_code == 0);
  CHECK(r.report["schema"] == "nlcert/1");
  CHECK(r.report["status"] == "solved");
  // true minimum of sqrt(x) + 1/x on [1,4] is at the interior point x where
  // 1/(2 sqrt x) = 1/x^2, i.e. x = 2^(4/3): value ~ 1.88988157484231.
  const double truth = 1.88988157484231;
  double lower = r.report["lower_rigorous"];
  double upper = r.report["upper"];
  CHECK(lower <= truth + 1e-9);
  CHECK(upper >= truth - 1e-9);
  CHECK(lower == doctest::Approx(truth).epsilon(1e-3));

  // the written report parses and matches the returned one
  json on_disk = json::parse(read_file(cfg.out));
  CHECK(strip_timing(on_disk) == strip_timing(r.report));

  // the certificate re-verifies independently of the producing run
  REQUIRE(r.report.contains("certificate"));
  std::string cert_path =
      cfg.cert_dir + "/" + r.report["certificate"].get<std::string>();
  Certificate c = certificate_from_json(read_file(cert_path));
  std::vector<Interval> unit(c.n, Interval(0.0, 1.0));
  VerifyResult vr = verify_certificate(c, unit);
  CHECK(vr.mu_rigorous == doctest::Approx(lower).epsilon(1e-9));
}

TEST_CASE("certify mode splits on the target") {
  const std::string prob = std::string(kTmpDir) + "/quad.prob";
  std::system(("mkdir -p " + std::string(kTmpDir)).c_str());
  write_file(prob,
             "var x in [-1, 1];\n"
             "var y in [-1, 1];\n"
             "objective x^2 + y^2 - x*y/2;\n");
  RunConfig ok;
  ok.mode = "certify";
  ok.file = prob;
  ok.bound = -0.1;  // true min is 0
  ok.iters = 1;
  RunOutcome pass = run(ok);
  CHECK(pass.exit_code == 0);
  CHECK(pass.report["status"] == "certified");

  RunConfig bad = ok;
  bad.bound = 0.5;  // impossible: f(0,0) = 0 < 0.5
  bad.max_boxes = 4;
  RunOutcome fail = run(bad);
  CHECK(fail.exit_code == 1);
  CHECK(fail.report["status"] == "inconclusive");
}

TEST_CASE("errors surface as exit code 2 with positions") {
  const std::string prob = std::string(kTmpDir) + "/broken.prob";
  std::system(("mkdir -p " + std::string(kTmpDir)).c_str());
  write_file(prob, "var x in [0, 1];\nobjective x + ;\n");
  RunConfig cfg;
  cfg.mode = "minimize";
  cfg.file = prob;
  RunOutcome r = run(cfg);
  CHECK(r.exit_code == 2);
  CHECK(r.report["status"] == "error");
  std::string msg = r.report["error"];
  CHECK(msg.find("line 2") != std::string::npos);

  RunConfig missing;
  missing.mode = "minimize";
  missing.file = std::string(kTmpDir) + "/does_not_exist.prob";
  CHECK(run(missing).exit_code == 2);

  RunConfig suite;
  suite.mode = "bench";
  suite.suite = "nope";
  CHECK(run(suite).exit_code == 2);
}

TEST_CASE("reports are deterministic modulo timing") {
  RunConfig cfg;
  cfg.mode = "bench";
  cfg.suite = "mc";
  cfg.seed = 42;
  RunOutcome a = run(cfg);
  RunOutcome b = run(cfg);
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(strip_timing(a.report).dump() == strip_timing(b.report).dump());
}

TEST_CASE("installed binary honors the exit code contract") {
  std::system(("mkdir -p " + std::string(kTmpDir)).c_str());
  const std::string prob = std::string(kTmpDir) + "/bin.prob";
  write_file(prob,
             "var x in [0, 2];\n"
             "objective x^2 + 1;\n");
  CHECK(run_binary("certify --file " + prob + " --bound 0.5 --iters 1") == 0);
  CHECK(run_binary("certify --file " + prob + " --bound 1.5 --iters 1 "
                   "--max-boxes 2") == 1);
  const std::string broken = std::string(kTmpDir) + "/bin_broken.prob";
  write_file(broken, "objective what;\n");
  CHECK(run_binary("minimize --file " + broken) == 2);
  CHECK(run_binary("bench unknown-suite") == 2);
}

TEST_CASE("binary determinism on written reports") {
  std::system(("mkdir -p " + std::string(kTmpDir)).c_str());
  const std::string o1 = std::string(kTmpDir) + "/r1.json";
  const std::string o2 = std::string(kTmpDir) + "/r2.json";
  const std::string prob = std::string(kTmpDir) + "/det.prob";
  write_file(prob,
             "var x in [1, 3];\n"
             "objective x * sqrt(x) - 2*x;\n");
  REQUIRE(run_binary("minimize --file " + prob + " --seed 7 --out " + o1) ==
          0);
  REQUIRE(run_binary("minimize --file " + prob + " --seed 7 --out " + o2) ==
          0);
  json a = strip_timing(json::parse(read_file(o1)));
  json b = strip_timing(json::parse(read_file(o2)));
  CHECK(a.dump() == b.dump());
}

TEST_CASE("schwefel generator matches its formula") {
  Problem p = schwefel_problem(2, 0);
  REQUIRE(p.box.size() == 2);
  CHECK(p.box[0].lo == 1.0);
  CHECK(p.box[0].hi == 500.0);
  for (double x : {2.0, 100.0, 420.97}) {
    double expected = -2.0 * x * std::sin(std::sqrt(x));
    CHECK(eval(p.objective, {x, x}) == doctest::Approx(expected));
  }
  Problem c = schwefel_problem(3, 1);
  double v = eval(c.objective, {10.0, 20.0, 30.0});
  double expected = -(10.0 + 20.0) * std::sin(std::sqrt(10.0)) -
                    (20.0 + 30.0) * std::sin(std::sqrt(20.0));
  CHECK(v == doctest::Approx(expected));
  CHECK_THROWS(schwefel_problem(0, 0));
}
