// End-to-end checks of the command-line tool; the binary path arrives via
// WALSH_CLI_BIN. Runs each subcommand against small spec files and checks
// exit codes plus byte-identical reruns.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string cli() {
  const char* bin = std::getenv("WALSH_CLI_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

std::string tmp_path(const std::string& name) {
  return std::string("/tmp/walsh_cli_test_") + name;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& args) {
  const std::string cmd = cli() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

const char* kDiscSpec = R"({
  "rays": [
    {"theta": 0.0, "weight": 0.6666666666666666, "ell": 1.0,
     "b": {"kind": "constant", "value": 0.0},
     "s": {"kind": "constant", "value": 1.0}},
    {"theta": 3.141592653589793, "weight": 0.3333333333333333, "ell": 1.0,
     "b": {"kind": "constant", "value": 0.0},
     "s": {"kind": "constant", "value": 1.0}}
  ]
})";

const char* kMixedSpec = R"({
  "rays": [
    {"theta": 0.0, "weight": 0.5, "ell": 1.0,
     "b": {"kind": "constant", "value": 0.0},
     "s": {"kind": "constant", "value": 1.0}},
    {"theta": 3.141592653589793, "weight": 0.5, "ell": "inf",
     "b": {"kind": "constant", "value": 1.0},
     "s": {"kind": "constant", "value": 1.0}}
  ]
})";

const char* kPlaneSpec = R"({
  "rays": [
    {"theta": 0.0, "weight": 0.5, "ell": "inf",
     "b": {"kind": "constant", "value": 0.0},
     "s": {"kind": "constant", "value": 1.0}},
    {"theta": 3.141592653589793, "weight": 0.5, "ell": "inf",
     "b": {"kind": "constant", "value": 0.0},
     "s": {"kind": "constant", "value": 1.0}}
  ]
})";

const char* kHalfReward = R"({
  "origin": 0.0,
  "rays": [
    {"theta": 0.0, "radii": [0.0, 1.0], "values": [0.0, 1.0]},
    {"theta": 3.141592653589793, "radii": [0.0, 1.0], "values": [0.0, 0.0]}
  ]
})";

const char* kHalfSpec = R"({
  "rays": [
    {"theta": 0.0, "weight": 0.5, "ell": 1.0,
     "b": {"kind": "constant", "value": 0.0},
     "s": {"kind": "constant", "value": 1.0}},
    {"theta": 3.141592653589793, "weight": 0.5, "ell": 1.0,
     "b": {"kind": "constant", "value": 0.0},
     "s": {"kind": "constant", "value": 1.0}}
  ]
})";

const char* kControl = R"({
  "pair0": {"rays": [
    {"theta": 0.0, "b": {"kind": "constant", "value": -1.0}, "s": {"kind": "constant", "value": 1.0}},
    {"theta": 3.141592653589793, "b": {"kind": "constant", "value": -1.0}, "s": {"kind": "constant", "value": 1.0}}]},
  "pair1": {"rays": [
    {"theta": 0.0, "b": {"kind": "constant", "value": 1.0}, "s": {"kind": "constant", "value": 1.0}},
    {"theta": 3.141592653589793, "b": {"kind": "constant", "value": 1.0}, "s": {"kind": "constant", "value": 1.0}}]}
})";

struct Files {
  Files() {
    write_file(tmp_path("disc.json"), kDiscSpec);
    write_file(tmp_path("mixed.json"), kMixedSpec);
    write_file(tmp_path("plane.json"), kPlaneSpec);
    write_file(tmp_path("half.json"), kHalfSpec);
    write_file(tmp_path("reward.json"), kHalfReward);
    write_file(tmp_path("control.json"), kControl);
  }
};

const Files files;

}  // namespace

TEST_CASE("check command") {
  CHECK(run("check --spec " + tmp_path("disc.json")) == 0);
  write_file(tmp_path("bad.json"), "{\"rays\": [{\"theta\": 0}]}");
  CHECK(run("check --spec " + tmp_path("bad.json")) == 2);
  CHECK(run("check --spec " + tmp_path("missing.json")) == 2);
}

TEST_CASE("usage errors exit 64") {
  CHECK(run("frobnicate") == 64);
  CHECK(run("classify") == 64);  // missing required --spec
}

TEST_CASE("classify command") {
  const std::string out = tmp_path("verdict.json");
  CHECK(run("classify --spec " + tmp_path("mixed.json") + " --start origin --out " + out) == 0);
  const std::string doc = read_file(out);
  CHECK(doc.find("\"case\":\"mixed\"") != std::string::npos);

  CHECK(run("classify --spec " + tmp_path("disc.json") + " --out " + out) == 0);
  CHECK(read_file(out).find("\"case\":\"certain\"") != std::string::npos);

  CHECK(run("classify --spec " + tmp_path("plane.json") + " --out " + out) == 0);
  CHECK(read_file(out).find("\"case\":\"never\"") != std::string::npos);
}

TEST_CASE("exit-law analytic and not-applicable") {
  const std::string out = tmp_path("law.json");
  CHECK(run("exit-law --spec " + tmp_path("disc.json") + " --start origin --out " + out) == 0);
  const std::string doc = read_file(out);
  CHECK(doc.find("0.66666666666666") != std::string::npos);
  // every charged ray has infinite scale: not applicable, exit 3
  CHECK(run("exit-law --spec " + tmp_path("plane.json") + " --start origin") == 3);
}

TEST_CASE("simulate requires a seed and reproduces bytes") {
  CHECK(run("simulate --spec " + tmp_path("disc.json") + " --paths 10 --horizon 0.01") == 2);
  const std::string out1 = tmp_path("sim1.json"), out2 = tmp_path("sim2.json");
  const std::string args = "simulate --spec " + tmp_path("disc.json") +
                           " --paths 50 --step 1e-3 --horizon 0.5 --seed 42 --out ";
  CHECK(run(args + out1) == 0);
  CHECK(run(args + out2) == 0);
  const std::string a = read_file(out1), b = read_file(out2);
  CHECK(a == b);
  CHECK(!a.empty());
}

TEST_CASE("stop command solves the benchmark") {
  const std::string out = tmp_path("stop.json");
  CHECK(run("stop --spec " + tmp_path("half.json") + " --reward " + tmp_path("reward.json") +
            " --tol 1e-8 --out " + out) == 0);
  const std::string doc = read_file(out);
  const auto pos = doc.find("\"c0\":");
  REQUIRE(pos != std::string::npos);
  const double c0 = std::atof(doc.c_str() + pos + 5);
  CHECK(std::abs(c0 - 0.5) < 1e-6);
}

TEST_CASE("control command solves the benchmark") {
  const std::string out = tmp_path("control_out.json");
  CHECK(run("control --spec " + tmp_path("half.json") + " --reward " + tmp_path("reward.json") +
            " --control " + tmp_path("control.json") + " --tol 1e-8 --out " + out) == 0);
  const std::string doc = read_file(out);
  const auto pos = doc.find("\"c_star\":");
  REQUIRE(pos != std::string::npos);
  const double c = std::atof(doc.c_str() + pos + 9);
  CHECK(std::abs(c - 0.8807970779778823) < 1e-5);
  CHECK(doc.find("max-then-min") != std::string::npos);
  CHECK(doc.find("min-everywhere") != std::string::npos);
}

TEST_CASE("profile command") {
  const std::string out = tmp_path("prof.csv");
  CHECK(run("profile --spec " + tmp_path("mixed.json") + " --format csv --out " + out) == 0);
  CHECK(read_file(out).rfind("theta,r,p", 0) == 0);
}

TEST_CASE("path dump long format") {
  const std::string dump = tmp_path("paths.csv");
  CHECK(run("simulate --spec " + tmp_path("disc.json") +
            " --paths 3 --step 1e-3 --horizon 0.05 --seed 7 --dump-paths " + dump) == 0);
  const std::string doc = read_file(dump);
  CHECK(doc.rfind("path,t,r,theta,L", 0) == 0);
  CHECK(doc.find("\n2,") != std::string::npos);  // third path present
}
