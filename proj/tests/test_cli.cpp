#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "pfml/io.hpp"
#include "pfml/models.hpp"
#include "pfml/simulate.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pfml_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Runs the pfml binary; returns its exit status.
int run_pfml(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string("\"") + PFML_BINARY + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST(Cli, SimulateExample1WritesDatasetAndIsReproducible) {
  const auto dir = scratch("sim1");
  ASSERT_EQ(run_pfml("simulate --model example1 --T 100 --seed 1 --out " + (dir / "a").string(), dir / "a.log"), 0);
  ASSERT_EQ(run_pfml("simulate --model example1 --T 100 --seed 1 --out " + (dir / "b").string(), dir / "b.log"), 0);
  const auto rows = lines(dir / "a" / "dataset.csv");
  EXPECT_EQ(rows.size(), 101u);
  EXPECT_EQ(slurp(dir / "a" / "dataset.csv"), slurp(dir / "b" / "dataset.csv"));
  EXPECT_NE(slurp(dir / "a.log").find("seed 1"), std::string::npos);
  const auto meta = read_json(dir / "a" / "dataset.json");
  EXPECT_EQ(meta["run"]["seed"], 1);
}

TEST(Cli, SimulateExample2HasInputColumn) {
  const auto dir = scratch("sim2");
  ASSERT_EQ(run_pfml("simulate --model example2 --T 1000 --seed 4 --out " + dir.string(), dir / "log"), 0);
  const auto rows = lines(dir / "dataset.csv");
  ASSERT_EQ(rows.size(), 1001u);
  EXPECT_EQ(rows[0], "t,y_1,x_1,u_1");
}

TEST(Cli, ConfigFileIsOverriddenByFlags) {
  const auto dir = scratch("config");
  std::ofstream(dir / "run.cfg") << "# example\nmodel = example1\nT = 40\nseed = 9\n";
  ASSERT_EQ(run_pfml("simulate --config " + (dir / "run.cfg").string() + " --T 25 --out " + dir.string(),
                 dir / "log"),
            0);
  EXPECT_EQ(lines(dir / "dataset.csv").size(), 26u);
  EXPECT_EQ(read_json(dir / "dataset.json")["run"]["seed"], 9);
}

TEST(Cli, SeedFallsBackToEnvironment) {
  const auto dir = scratch("envseed");
  ::setenv("PFML_SEED", "77", 1);
  const int code = run_pfml("simulate --T 5 --out " + dir.string(), dir / "log");
  ::unsetenv("PFML_SEED");
  ASSERT_EQ(code, 0);
  EXPECT_EQ(read_json(dir / "dataset.json")["run"]["seed"], 77);
}

TEST(Cli, ConfigErrorsExitWithTwo) {
  const auto dir = scratch("errors");
  std::ofstream(dir / "bad.cfg") << "nonsense = 1\n";
  EXPECT_EQ(run_pfml("simulate --config " + (dir / "bad.cfg").string(), dir / "log"), 2);
  EXPECT_EQ(run_pfml("identify --no-such-flag 1", dir / "log"), 2);
  EXPECT_EQ(run_pfml("identify --model nope --out " + dir.string(), dir / "log"), 2);
  // Bins exceeding the pooled sample count are rejected before any compute.
  EXPECT_EQ(run_pfml("identify --K 5 --burn-in 2 --bins 50 --out " + (dir / "bins").string(), dir / "log"), 2);
  EXPECT_FALSE(fs::exists(dir / "bins" / "traces.csv"));
  EXPECT_EQ(run_pfml("identify --model lgss --K 2 --bins 1 --out " + dir.string(), dir / "log"), 2);
}

TEST(Cli, IdentifySmokeIsFastAndDeterministic) {
  const auto dir = scratch("identify");
  const std::string args = "identify --model example1 --T 100 --N 100 --K 1 --repeats 1 --bins 1 --seed 5 ";
  const auto t0 = std::chrono::steady_clock::now();
  ASSERT_EQ(run_pfml(args + "--out " + (dir / "a").string(), dir / "a.log"), 0);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 10.0);
  ASSERT_EQ(run_pfml(args + "--workers 2 --out " + (dir / "b").string(), dir / "b.log"), 0);
  EXPECT_EQ(slurp(dir / "a" / "summary.json"), slurp(dir / "b" / "summary.json"));
  EXPECT_EQ(slurp(dir / "a" / "traces.csv"), slurp(dir / "b" / "traces.csv"));
  const auto summary = read_json(dir / "a" / "summary.json");
  EXPECT_TRUE(summary["estimate"]["theta_hat"].contains("b"));
  EXPECT_TRUE(summary["estimate"]["theta_hat"].contains("q"));
  const auto manifest = read_json(dir / "a" / "manifest.json");
  EXPECT_EQ(manifest["repeats"][0]["trace"]["system_seeds"].size(), 1u);
}

TEST(Cli, GridRowAtReferenceEqualsOnlineLoglik) {
  const auto dir = scratch("grid");
  ASSERT_EQ(run_pfml("grid --model example1 --T 50 --N 100 --seed 2 --theta-ref 25,0.5 --grid-param b "
                 "--grid-lo 20 --grid-hi 30 --grid-points 11 --repeats 2 --out " + dir.string(),
                 dir / "log"),
            0);
  const auto rows = lines(dir / "fig1_surfaces.csv");
  ASSERT_EQ(rows.size(), 2u + 22u);  // preamble, header, 2 x 11 rows
  EXPECT_EQ(rows[1], "repeat,online_loglik,b,q,loglik,degenerate");
  int matched = 0;
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const auto f = split(rows[i]);
    if (f[2] == "25") {
      EXPECT_NEAR(std::stod(f[4]), std::stod(f[1]), 1e-10);
      ++matched;
    }
  }
  EXPECT_EQ(matched, 2);
}

TEST(Cli, LgssGridHasKalmanColumn) {
  const auto dir = scratch("lgssgrid");
  ASSERT_EQ(run_pfml("grid --model lgss --unknowns a --theta-ref 0.8 --T 30 --N 500 --grid-points 5 --out " +
                     dir.string(),
                 dir / "log"),
            0);
  const auto rows = lines(dir / "surfaces.csv");
  EXPECT_EQ(rows[1], "repeat,online_loglik,a,loglik,degenerate,kalman");
  EXPECT_EQ(rows.size(), 7u);
}

TEST(Cli, DegenerateDataExitsWithThree) {
  const auto dir = scratch("degenerate");
  // Observations so large that every log-weight underflows to -inf at t = 1.
  pfml::Dataset data(1, std::vector<double>(10, 1e200));
  const auto model = pfml::make_example1();
  pfml::write_dataset(dir / "bad.csv", data, *model);
  EXPECT_EQ(run_pfml("identify --data " + (dir / "bad.csv").string() + " --theta0 25,1 --K 2 --bins 1 --out " +
                     (dir / "out").string(),
                 dir / "log"),
            3);
  EXPECT_NE(slurp(dir / "log").find("repeat 0 failed"), std::string::npos);
  const auto manifest = read_json(dir / "out" / "manifest.json");
  EXPECT_EQ(manifest["exit_code"], 3);
  EXPECT_EQ(run_pfml("grid --data " + (dir / "bad.csv").string() + " --theta-ref 25,1 --out " +
                     (dir / "grid").string(),
                 dir / "log"),
            3);
}

TEST(Cli, CompareSgdEmitsBothTracesAndFlagsDivergence) {
  const auto dir = scratch("sgd");
  ASSERT_EQ(run_pfml("compare-sgd --T 50 --K 5 --repeats 2 --seed 3 --gamma0 1000 --alpha 1 --out " + dir.string(),
                 dir / "log"),
            0);
  EXPECT_TRUE(fs::exists(dir / "compare_proposed.csv"));
  EXPECT_TRUE(fs::exists(dir / "compare_sgd.csv"));
  const auto summary = read_json(dir / "compare_summary.json");
  ASSERT_EQ(summary["repeats"].size(), 2u);
  for (const auto& r : summary["repeats"]) EXPECT_TRUE(r["sgd_diverged"].get<bool>());
}

TEST(Cli, CsvOutputsEmbedConfigAndSeed) {
  const auto dir = scratch("preamble");
  ASSERT_EQ(run_pfml("replicate-ex1 --T 30 --K 4 --repeats 2 --burn-in 1 --bins 2 --surfaces 2 --grid-points 5 "
                 "--seed 12 --out " + dir.string(),
                 dir / "log"),
            0);
  for (const auto* name : {"fig1_surfaces.csv", "fig2a_traces.csv"}) {
    const auto rows = lines(dir / name);
    ASSERT_FALSE(rows.empty()) << name;
    ASSERT_EQ(rows[0].rfind("# ", 0), 0u) << name;
    const auto head = nlohmann::json::parse(rows[0].substr(2));
    EXPECT_EQ(head["seed"], 12) << name;
    EXPECT_EQ(head["command"], "replicate-ex1") << name;
    EXPECT_EQ(head["config"]["K"], "4") << name;
  }
}
