#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/stat.h>
#include <sys/wait.h>

#include "rgcov/io.hpp"

namespace {

const char* kCli = RGCOV_CLI_PATH;

struct TempDir {
  std::string path;
  TempDir() {
    char tmpl[] = "/tmp/rgcov_cli_XXXXXX";
    path = ::mkdtemp(tmpl);
  }
  std::string file(const std::string& name) const { return path + "/" + name; }
};

int run(const std::string& args) {
  std::string cmd = std::string(kCli) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

bool exists(const std::string& path) {
  struct stat st{};
  return ::stat(path.c_str(), &st) == 0;
}

const char* kMixedModel = R"({
  "n": 1, "p": 1,
  "phi": [[[0.5]]],
  "noise": {"kind": "student_t", "dof": 5.0}
})";

const char* kUnitRootModel = R"({
  "n": 1, "p": 1,
  "phi": [[[1.0]]],
  "noise": {"kind": "student_t", "dof": 5.0}
})";

const char* kDiagMixedModel = R"({
  "n": 2, "p": 1,
  "phi": [[[0.5, 0.0], [0.0, 2.0]]],
  "noise": {"kind": "student_t", "dof": 5.0}
})";

}  // namespace

TEST_CASE("cli: bad usage exits 1, missing data exits 2") {
  CHECK(run("simulate") == 1);
  CHECK(run("frobnicate") == 1);
  TempDir dir;
  CHECK(run("estimate --data " + dir.file("nope.csv") + " --order 1 --out " +
            dir.file("o.json")) == 2);
}

TEST_CASE("cli: simulate writes deterministic CSV plus a manifest") {
  TempDir dir;
  rgcov::write_text_file(dir.file("model.json"), kMixedModel);
  std::string base = "simulate --model " + dir.file("model.json") +
                     " --length 50 --burn 100 --seed 7 --out ";
  CHECK(run(base + dir.file("a.csv")) == 0);
  CHECK(run(base + dir.file("b.csv")) == 0);
  REQUIRE(exists(dir.file("a.csv")));
  REQUIRE(exists(dir.file("b.csv")));
  CHECK(exists(dir.file("a.csv.manifest.json")));
  std::string a = rgcov::read_text_file(dir.file("a.csv"));
  std::string b = rgcov::read_text_file(dir.file("b.csv"));
  CHECK(a == b);
  CHECK(a.find("y1") != std::string::npos);

  std::string manifest = rgcov::read_text_file(dir.file("a.csv.manifest.json"));
  CHECK(manifest.find("\"command\"") != std::string::npos);
  CHECK(manifest.find("\"config_digest\"") != std::string::npos);
  CHECK(manifest.find("\"kernel\"") != std::string::npos);
  CHECK(manifest.find("\"version\"") != std::string::npos);
}

TEST_CASE("cli: unit root model exits 3 and writes no output") {
  TempDir dir;
  rgcov::write_text_file(dir.file("model.json"), kUnitRootModel);
  int code = run("simulate --model " + dir.file("model.json") +
                 " --length 50 --out " + dir.file("y.csv"));
  CHECK(code == 3);
  CHECK(!exists(dir.file("y.csv")));
}

TEST_CASE("cli: estimate pipeline on simulated data") {
  TempDir dir;
  rgcov::write_text_file(dir.file("model.json"), kMixedModel);
  REQUIRE(run("simulate --model " + dir.file("model.json") +
              " --length 400 --seed 3 --out " + dir.file("y.csv")) == 0);
  int code = run("estimate --data " + dir.file("y.csv") +
                 " --order 1 --lags 2 --transforms linear,square --eta 1.0 " +
                 "--out " + dir.file("fit.json"));
  CHECK(code == 0);
  REQUIRE(exists(dir.file("fit.json")));
  std::string fit = rgcov::read_text_file(dir.file("fit.json"));
  CHECK(fit.find("\"coefficients\"") != std::string::npos);
  CHECK(fit.find("\"specification_test\"") != std::string::npos);
  CHECK(fit.find("\"weight_dimension\"") != std::string::npos);
}

TEST_CASE("cli: rnlsd test on raw data") {
  TempDir dir;
  // iid panel via a causal model with zero coefficient.
  rgcov::write_text_file(dir.file("model.json"), R"({
    "n": 1, "p": 1, "phi": [[[0.0]]],
    "noise": {"kind": "student_t", "dof": 5.0}
  })");
  REQUIRE(run("simulate --model " + dir.file("model.json") +
              " --length 300 --seed 5 --out " + dir.file("y.csv")) == 0);
  int code = run("test --data " + dir.file("y.csv") +
                 " --mode rnlsd --lags 2 --transforms linear,square " +
                 "--delta 0.3 --draws 20000 --out " + dir.file("t.json"));
  CHECK(code == 0);
  std::string out = rgcov::read_text_file(dir.file("t.json"));
  CHECK(out.find("\"p_value\"") != std::string::npos);
  CHECK(out.find("\"mixture\"") != std::string::npos);
}

TEST_CASE("cli: decompose splits a diagonal mixed model") {
  TempDir dir;
  rgcov::write_text_file(dir.file("model.json"), kDiagMixedModel);
  int code = run("decompose --model " + dir.file("model.json") +
                 " --out-dir " + dir.path);
  CHECK(code == 0);
  REQUIRE(exists(dir.file("decomposition.json")));
  REQUIRE(exists(dir.file("allocations.json")));
  std::string dec = rgcov::read_text_file(dir.file("decomposition.json"));
  CHECK(dec.find("\"n_causal\": 1") != std::string::npos);
  CHECK(dec.find("\"n_noncausal\": 1") != std::string::npos);

  // With data attached, component series are also written.
  rgcov::write_text_file(dir.file("model2.json"), kDiagMixedModel);
  REQUIRE(run("simulate --model " + dir.file("model2.json") +
              " --length 60 --seed 2 --out " + dir.file("y.csv")) == 0);
  code = run("decompose --model " + dir.file("model.json") + " --data " +
             dir.file("y.csv") + " --out-dir " + dir.path);
  CHECK(code == 0);
  CHECK(exists(dir.file("components.csv")));
}

TEST_CASE("cli: backtest runs end to end") {
  TempDir dir;
  std::string prices =
      "date,a,b\n"
      "1,10.0,20.0\n"
      "2,10.5,19.8\n"
      "3,10.3,20.4\n"
      "4,10.8,20.1\n";
  rgcov::write_text_file(dir.file("prices.csv"), prices);
  rgcov::write_text_file(dir.file("alloc.json"), R"([
    {"label": "ew", "coefficients": [1.0, 1.0]},
    {"label": "ls", "coefficients": [1.0, -1.0]}
  ])");
  int code = run("backtest --data " + dir.file("prices.csv") +
                 " --allocations " + dir.file("alloc.json") +
                 " --initial 100 --out " + dir.file("bt.csv"));
  CHECK(code == 0);
  std::string out = rgcov::read_text_file(dir.file("bt.csv"));
  CHECK(out.find("date,portfolio,return,cumulative,value") !=
        std::string::npos);
  CHECK(out.find("ew") != std::string::npos);
  CHECK(out.find("ls") != std::string::npos);
}

TEST_CASE("cli: kernel override is honoured and recorded") {
  TempDir dir;
  rgcov::write_text_file(dir.file("model.json"), kMixedModel);
  std::string cmd = std::string("RGCOV_KERNELS=scalar ") + kCli +
                    " simulate --model " + dir.file("model.json") +
                    " --length 30 --out " + dir.file("y.csv") +
                    " >/dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  std::string manifest = rgcov::read_text_file(dir.file("y.csv.manifest.json"));
  CHECK(manifest.find("\"kernel\": \"scalar\"") != std::string::npos);
}

TEST_CASE("cli: mc study is reproducible byte for byte") {
  TempDir dir;
  rgcov::write_text_file(dir.file("study.json"), R"({
    "dgp": {"n": 1, "p": 1, "phi": [[[0.5]]],
            "noise": {"kind": "student_t", "dof": 5.0}},
    "estimators": [{
      "label": "quick",
      "config": {
        "lags": 2,
        "transforms": ["linear", "square"],
        "optimizer": {"random_starts": 1, "probe_nm_iterations": 150,
                       "probe_bfgs_iterations": 20, "polish_top": 1,
                       "deep_nm_iterations": 400, "deep_bfgs_iterations": 40,
                       "deep_restart_iterations": 200}
      }
    }],
    "replications": 4,
    "sample_sizes": [120],
    "shrink_grid": [0.5],
    "base_seed": 99,
    "burn": 100
  })");
  std::string base = "mc --config " + dir.file("study.json") + " --jobs 2 ";
  CHECK(run(base + "--out " + dir.file("r1.json") + " --csv " +
            dir.file("r1.csv")) == 0);
  CHECK(run(base + "--out " + dir.file("r2.json") + " --csv " +
            dir.file("r2.csv")) == 0);
  CHECK(rgcov::read_text_file(dir.file("r1.json")) ==
        rgcov::read_text_file(dir.file("r2.json")));
  CHECK(rgcov::read_text_file(dir.file("r1.csv")) ==
        rgcov::read_text_file(dir.file("r2.csv")));
}
