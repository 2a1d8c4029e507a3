// Runs the karcher executable end to end and checks outputs and exit codes.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "karcher/karcher.hpp"

namespace {

namespace fs = std::filesystem;

struct Invocation {
  int status = -1;
  std::string output;
};

Invocation run(const std::string& args) {
  const std::string cmd = std::string(KARCHER_CLI) + " " + args + " 2>&1";
  Invocation r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("karcher_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, MeanOfScalarPairIsTwo) {
  const fs::path in = write("in.json", R"({"dim": 1, "matrices": [[[1]], [[4]]]})");
  const Invocation r = run("mean " + in.string() + " --solver mm --out " + path("mean.json"));
  ASSERT_EQ(r.status, 0) << r.output;
  const auto mats = karcher::io::parse_matrices_json(slurp(path("mean.json")));
  ASSERT_EQ(mats.size(), 1u);
  EXPECT_NEAR(mats[0](0, 0), 2.0, 1e-10);
  const std::string trace = slurp(path("mean.trace.csv"));
  EXPECT_EQ(trace.rfind("iter,objective,grad_norm,log_error,elapsed\n", 0), 0u);
}

TEST_F(Cli, SingleMatrixIsEchoed) {
  const std::string text = R"({"dim": 2, "matrices": [[[2, 0.5], [0.5, 3]]]})";
  const fs::path in = write("in.json", text);
  for (const char* solver : {"mm", "gd-ls", "gd-fixed"}) {
    const Invocation r = run("mean " + in.string() + " --solver " + solver + " --out " + path("m.json"));
    ASSERT_EQ(r.status, 0) << r.output;
    const auto mats = karcher::io::parse_matrices_json(slurp(path("m.json")));
    EXPECT_EQ(mats[0], (karcher::Matrix<>{{2, 0.5}, {0.5, 3}})) << solver;
  }
}

TEST_F(Cli, NonSymmetricInputCitesMatrixIndex) {
  const fs::path in = write("in.json", R"({"dim": 2, "matrices": [[[1, 0], [0, 1]], [[1, 2], [0, 1]]]})");
  const Invocation r = run("mean " + in.string() + " --out " + path("m.json"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("matrix 1"), std::string::npos) << r.output;
  EXPECT_FALSE(fs::exists(path("m.json")));
}

TEST_F(Cli, NonSpdInputReportsEigenvalue) {
  const fs::path in = write("in.json", R"({"dim": 2, "matrices": [[[1, 2], [2, 1]]]})");
  const Invocation r = run("mean " + in.string() + " --out " + path("m.json"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("eigenvalue -1"), std::string::npos) << r.output;
}

TEST_F(Cli, MissingFileAndBadFlagsAreInputErrors) {
  EXPECT_EQ(run("mean " + path("nope.json")).status, 1);
  const fs::path in = write("in.json", R"({"dim": 1, "matrices": [[[1]], [[4]]]})");
  EXPECT_EQ(run("mean " + in.string() + " --solver newton").status, 1);
  EXPECT_EQ(run("mean " + in.string() + " --c 2 --out " + path("m.json")).status, 1);
  EXPECT_EQ(run("frobnicate").status, 1);
}

TEST_F(Cli, MaxItersExceededExitsTwo) {
  const fs::path in = write("in.json", R"({"dim": 1, "matrices": [[[1]], [[1000]], [[3]]]})");
  const Invocation r = run("mean " + in.string() + " --max-iters 1 --tol 1e-300 --out " + path("m.json"));
  EXPECT_EQ(r.status, 2) << r.output;
  EXPECT_TRUE(fs::exists(path("m.json")));
}

TEST_F(Cli, BenchTinySpecWritesTwoRowCsv) {
  const fs::path spec = write("tiny.json", R"({"n": 1, "p": 2, "spectrum": {"kind": "uniform"},
    "runs": 1, "seed": 4, "solvers": [{"kind": "mm"}, {"kind": "gd-ls", "config": {"nu": 1}}]})");
  // n = 1: the start point is the answer, so every trace has a single entry.
  const Invocation r = run("bench " + spec.string() + " --out " + path("tiny"));
  ASSERT_EQ(r.status, 0) << r.output;
  const std::string csv = slurp(path("tiny.csv"));
  EXPECT_EQ(csv.rfind("iter,mm,gd-ls-nu1\n", 0), 0u) << csv;
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2) << csv;
  const auto sidecar = nlohmann::json::parse(slurp(path("tiny.json")));
  EXPECT_EQ(sidecar["seed"], 4);
  EXPECT_EQ(sidecar["solvers"].size(), 2u);
}

TEST_F(Cli, BenchInvalidSpecNamesField) {
  const fs::path spec = write("bad.json", R"({"n": 3, "p": 2, "spectrum": {"kind": "uniform", "lo": -1}})");
  const Invocation r = run("bench " + spec.string() + " --out " + path("bad"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("spectrum.lo"), std::string::npos) << r.output;
}

TEST_F(Cli, BenchBundledFig1) {
  const Invocation r = run("bench " + std::string(KARCHER_SPECS_DIR) + "/fig1_small.json --seed 8 --out " +
                    path("fig1"));
  ASSERT_EQ(r.status, 0) << r.output;
  const std::string csv = slurp(path("fig1.csv"));
  const std::string header = csv.substr(0, csv.find('\n'));
  EXPECT_EQ(header, "iter,mm,gd-ls-nu0.25,gd-ls-nu0.5,gd-ls-nu1,gd-ls-nu2,gd-ls-nu4,gd-fixed-nu1");
  EXPECT_EQ(nlohmann::json::parse(slurp(path("fig1.json")))["seed"], 8);
  EXPECT_EQ(nlohmann::json::parse(slurp(path("fig1.json")))["runs"], 5);
}

TEST_F(Cli, BenchBundledFig3Rescale) {
  const Invocation r = run("bench " + std::string(KARCHER_SPECS_DIR) + "/fig3_rescale.json --out " + path("fig3"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(nlohmann::json::parse(slurp(path("fig3.json")))["scale_first_by"], 1e4);
  EXPECT_TRUE(fs::exists(path("fig3.csv")));
  EXPECT_TRUE(fs::exists(path("fig3.runs.csv")));
}

TEST_F(Cli, CheckPassesOnFreshBuild) {
  const Invocation r = run("check");
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(r.output.find("FAIL"), std::string::npos) << r.output;
}

TEST_F(Cli, CheckDetectsInjectedG2Fault) {
  const Invocation r = run("check --inject-fault g2-cancellation");
  EXPECT_EQ(r.status, 3) << r.output;
  EXPECT_NE(r.output.find("FAIL  g1*g2"), std::string::npos) << r.output;
}

}  // namespace
