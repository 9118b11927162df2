#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "support.hpp"

namespace lnn {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(LNN_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

class CliSolverTest : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!test::solver_available()) GTEST_SKIP() << "z3 not on PATH";
  }
};

TEST_F(CliSolverTest, SynthVerifiesWalkthrough) {
  const CliRun r = run_cli({"synth", "--benchmark", "parrilo", "--gamma", "100", "--hidden", "2"});
  EXPECT_EQ(r.code, cli::kVerified) << r.err;
  EXPECT_NE(r.out.find("verdict: verified"), std::string::npos);
  EXPECT_NE(r.out.find("certificate: V = "), std::string::npos);
  EXPECT_NE(r.out.find("iterations: "), std::string::npos);
  EXPECT_NE(r.out.find("time [s]: train="), std::string::npos);
}

TEST(Cli, ConfigurationErrorsExitOne) {
  EXPECT_EQ(run_cli({"synth", "--system", "missing.ode"}).code, cli::kError);
  EXPECT_EQ(run_cli({"synth", "--benchmark", "parrilo", "--max-iterations", "0"}).code, cli::kError);
  EXPECT_EQ(run_cli({"synth", "--benchmark", "nope"}).code, cli::kError);
  EXPECT_EQ(run_cli({"synth"}).code, cli::kError);
  EXPECT_EQ(run_cli({"synth", "--benchmark", "parrilo", "--hidden", "2,x"}).code, cli::kError);
  EXPECT_EQ(run_cli({"synth", "--benchmark", "parrilo", "--slope", "steep"}).code, cli::kError);
  EXPECT_EQ(run_cli({"synth", "--benchmark", "parrilo", "--last-layer", "relu"}).code, cli::kError);
  EXPECT_EQ(run_cli({"synth", "--benchmark", "parrilo", "--rho", "1", "--no-orthant"}).code, cli::kError);
  EXPECT_EQ(run_cli({"synth", "--benchmark", "parrilo", "--bogus-flag"}).code, cli::kError);
  EXPECT_EQ(run_cli({}).code, cli::kError);
  const CliRun r = run_cli({"synth", "--benchmark", "parrilo", "--max-iterations", "0"});
  EXPECT_NE(r.err.find("max-iterations"), std::string::npos);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run_cli({"--help"}).code, 0); }

TEST_F(CliSolverTest, ExhaustedAndInconclusiveExitCodes) {
  EXPECT_EQ(run_cli({"synth", "--benchmark", "parrilo", "--initial-samples", "1", "--max-iterations", "1", "--seed",
                     "7"})
                .code,
            cli::kExhausted);
  EXPECT_EQ(run_cli({"synth", "--system", std::string(LNN_SYSTEMS_DIR) + "/linear2d.ode", "--solver",
                     "/nonexistent/z3"})
                .code,
            cli::kInconclusive);
}

TEST_F(CliSolverTest, SynthWritesArtifacts) {
  const fs::path dir = scratch("artifacts");
  const CliRun r = run_cli({"synth", "--benchmark", "parrilo", "--seed", "3", "--out", dir.string(), "--emit-smt"});
  ASSERT_EQ(r.code, cli::kVerified) << r.err;
  for (const char* name : {"config.json", "history.json", "counterexamples.csv", "certificate.txt"}) {
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  }
  std::ifstream hist(dir / "history.json");
  const auto h = nlohmann::json::parse(hist);
  EXPECT_EQ(h["status"], "verified");
  const std::size_t iterations = h["iterations"];
  EXPECT_TRUE(fs::exists(dir / "iter_001_phi1.smt2") || iterations > 1);
  char last[64];
  std::snprintf(last, sizeof last, "iter_%03zu_phi2.smt2", iterations);
  EXPECT_TRUE(fs::exists(dir / last));
  std::ifstream cfg(dir / "config.json");
  EXPECT_EQ(nlohmann::json::parse(cfg)["target"], "parrilo");

  // The stored certificate re-verifies through the check command.
  const CliRun check =
      run_cli({"check", "--benchmark", "parrilo", "--certificate", (dir / "certificate.txt").string(), "--samples",
               "10000"});
  EXPECT_EQ(check.code, cli::kVerified) << check.out << check.err;
  EXPECT_NE(check.out.find("sampled: 0 violations"), std::string::npos);
}

TEST_F(CliSolverTest, SweepGridAllSucceed) {
  const fs::path dir = scratch("sweep");
  const CliRun r = run_cli({"sweep", "--benchmark", "parrilo", "--hidden-grid", "2,5", "--gamma-grid", "10,20",
                            "--csv", (dir / "sweep.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "sweep.csv");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto rows = lines(buf.str());
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], "benchmark,hidden,gamma,status,iterations,seconds");
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_NE(rows[i].find(",success,"), std::string::npos) << rows[i];
  EXPECT_EQ(lines(r.out).size(), 5u);
}

TEST_F(CliSolverTest, SweepMarksBudgetHitAsOot) {
  const CliRun r = run_cli({"sweep", "--benchmark", "parrilo", "--hidden-grid", "2", "--gamma-grid", "100",
                            "--initial-samples", "1", "--max-iterations", "1", "--seed", "7"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(" oot "), std::string::npos) << r.out;
}

TEST(Cli, EmptySweepIsEmptyTable) {
  const fs::path dir = scratch("empty_sweep");
  const CliRun r = run_cli({"sweep", "--benchmark", "parrilo", "--hidden-grid", "", "--gamma-grid", "", "--out",
                            dir.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out).size(), 1u);
  std::ifstream in(dir / "sweep.csv");
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), "benchmark,hidden,gamma,status,iterations,seconds\n");
}

TEST(Cli, LevelsetGrid) {
  const fs::path dir = scratch("levelsets");
  const std::string cert = write_file(dir / "cert.txt", "lnn-certificate 1\nvars: x, y\nV = x^2 + y^2\n");
  const CliRun r =
      run_cli({"levelsets", "--benchmark", "parrilo", "--certificate", cert, "--resolution", "3", "--bounds", "-1,1,-1,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows[0], "layer,x,y,V,Vdot");
  EXPECT_EQ(rows[5], "grid,0,0,0,0");

  const CliRun at = run_cli({"levelsets", "--benchmark", "parrilo", "--certificate", cert, "--resolution", "1",
                             "--bounds", "10,10,2,2"});
  ASSERT_EQ(at.code, 0);
  EXPECT_EQ(lines(at.out)[1], "grid,10,2,104,192");
}

TEST(Cli, LevelsetCounterexampleLayer) {
  const fs::path dir = scratch("levelsets_cex");
  const std::string cert = write_file(dir / "cert.txt", "lnn-certificate 1\nvars: x, y\nV = x^2 + y^2\n");
  const std::string cex = write_file(dir / "cex.csv", "iteration,query,source,x,y\n1,phi1,smt,10,2\n");
  const CliRun r = run_cli({"levelsets", "--benchmark", "parrilo", "--certificate", cert, "--resolution", "2",
                            "--counterexamples", cex});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out).back(), "counterexample,10,2,104,192");
}

TEST(Cli, LevelsetErrors) {
  const fs::path dir = scratch("levelsets_err");
  const std::string cert = write_file(dir / "cert.txt", "lnn-certificate 1\nvars: x, y\nV = x^2 + y^2\n");
  EXPECT_EQ(run_cli({"levelsets", "--benchmark", "parrilo", "--certificate", cert, "--resolution", "0"}).code,
            cli::kError);
  const std::string cert3 = write_file(dir / "cert3.txt", "lnn-certificate 1\nvars: x, y, z\nV = x^2 + y^2 + z^2\n");
  EXPECT_EQ(run_cli({"levelsets", "--benchmark", "hard3d", "--certificate", cert3}).code, cli::kError);
  EXPECT_EQ(run_cli({"levelsets", "--benchmark", "parrilo", "--certificate", cert3}).code, cli::kError);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path dir = scratch("config");
  const std::string cfg = write_file(dir / "run.toml", "[synth]\nbenchmark = \"parrilo\"\nmax-iterations = 0\n");
  const CliRun bad = run_cli({"--config", cfg, "synth"});
  EXPECT_EQ(bad.code, cli::kError);
  EXPECT_NE(bad.err.find("max-iterations"), std::string::npos) << bad.err;
  if (test::solver_available()) {
    const CliRun good = run_cli({"--config", cfg, "synth", "--max-iterations", "50"});
    EXPECT_EQ(good.code, cli::kVerified) << good.err;
  }
}

TEST_F(CliSolverTest, CheckReportsFalsifiedCertificate) {
  const fs::path dir = scratch("check");
  const std::string cert = write_file(dir / "cert.txt", "lnn-certificate 1\nvars: x, y\nV = x^2 + y^2\n");
  const CliRun r = run_cli({"check", "--benchmark", "parrilo", "--certificate", cert});
  EXPECT_EQ(r.code, cli::kExhausted);
  EXPECT_NE(r.out.find("phi1: sat"), std::string::npos);
  EXPECT_NE(r.out.find("phi2: unsat"), std::string::npos);
  EXPECT_NE(r.out.find("verdict: falsified"), std::string::npos);
}

}  // namespace
}  // namespace lnn
