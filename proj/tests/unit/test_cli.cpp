#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "mesocloud/kernels.hpp"

namespace mesocloud {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("mesocloud_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const json& j) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "mesocloud");
    log_.str({});
    return cli::run(args, log_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(is)), {});
  }

  static json read_json(const fs::path& p) { return json::parse(slurp(p)); }

  static std::size_t count_lines(const fs::path& p) {
    const std::string s = slurp(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
  }

  fs::path dir_;
  std::ostringstream log_;
};

json single_void_config() {
  return json::parse(R"({
    "cloud": {"voids": [{"center": [3, 0.5, -0.5], "radius": 0.4}]},
    "domain": {"type": "ball", "R": 7},
    "source": {"rho": 2, "amplitude": 6},
    "outputs": {"line": {"p0": [1, 0, 0], "p1": [5, 0, 0], "n": 50}}
  })");
}

TEST_F(CliTest, SolveTable1WritesConsistentSolution) {
  const fs::path cfg = write_config("t1.json", json::parse(R"({"cloud": {"table1": true}})"));
  ASSERT_EQ(run({"solve", cfg.string(), "--out", (dir_ / "out").string()}), cli::kSuccess) << log_.str();
  const json sol = read_json(dir_ / "out" / "solution.json");
  EXPECT_EQ(sol.at("coeffs").size(), 18u);
  EXPECT_LE(sol.at("residual_norm").get<double>(), 1e-10);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "cloud.json"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "diagnostics.json"));
  const json meta = read_json(dir_ / "out" / "run_metadata.json");
  EXPECT_EQ(meta.at("command"), "solve");
  EXPECT_EQ(meta.at("exit_code"), 0);
}

TEST_F(CliTest, SingleVoidCoefficientIsMinusBackgroundGradient) {
  const fs::path cfg = write_config("one.json", single_void_config());
  ASSERT_EQ(run({"solve", cfg.string(), "--out", dir_.string()}), cli::kSuccess) << log_.str();
  const json c = read_json(dir_ / "solution.json").at("coeffs").at(0);
  const Vec3 g = grad_v(Vec3(3, 0.5, -0.5), SourceSpec{2.0, 6.0}, DomainSpec::ball(7.0));
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(c[a].get<double>(), -g[a], 1e-15 * g.norm());
  EXPECT_EQ(count_lines(dir_ / "line.csv"), 51u);
}

TEST_F(CliTest, OutputsAreDeterministic) {
  const fs::path cfg = write_config("one.json", single_void_config());
  ASSERT_EQ(run({"solve", cfg.string(), "--out", (dir_ / "a").string()}), cli::kSuccess);
  ASSERT_EQ(run({"solve", cfg.string(), "--out", (dir_ / "b").string()}), cli::kSuccess);
  for (const char* f : {"solution.json", "cloud.json", "diagnostics.json", "line.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
}

TEST_F(CliTest, MalformedConfigIsAdmissibilityError) {
  const fs::path bad = dir_ / "bad.json";
  std::ofstream(bad) << "{\"cloud\": [";
  EXPECT_EQ(run({"solve", bad.string(), "--out", dir_.string()}), cli::kAdmissibilityError);
  json j = single_void_config();
  j["cloud"]["voids"][0]["radius"] = 0;
  EXPECT_EQ(run({"solve", write_config("r0.json", j).string(), "--out", dir_.string()}),
            cli::kAdmissibilityError);
  EXPECT_NE(log_.str().find("$.cloud.voids[0].radius"), std::string::npos) << log_.str();
  EXPECT_EQ(run({"solve", (dir_ / "missing.json").string(), "--out", dir_.string()}), cli::kAdmissibilityError);
}

TEST_F(CliTest, ValidateRejectsOverlappingVoids) {
  json j = single_void_config();
  j["cloud"]["voids"] = json::parse(R"([{"center": [3, 0, 0], "radius": 0.5}, {"center": [3.8, 0, 0], "radius": 0.5}])");
  const fs::path cfg = write_config("overlap.json", j);
  EXPECT_EQ(run({"validate", cfg.string(), "--out", dir_.string()}), cli::kAdmissibilityError);
  EXPECT_FALSE(read_json(dir_ / "validation.json").at("admissible").get<bool>());
  EXPECT_EQ(run({"solve", cfg.string(), "--out", dir_.string()}), cli::kAdmissibilityError);
  EXPECT_EQ(run({"validate", write_config("ok.json", single_void_config()).string(), "--out", dir_.string()}),
            cli::kSuccess);
}

TEST_F(CliTest, CompareOracleSingleVoidPasses) {
  const fs::path cfg = write_config("one.json", json::parse(R"({
    "cloud": {"voids": [{"center": [0.5, -0.25, 1.0], "radius": 0.75}]},
    "domain": {"type": "free_space"},
    "background": {"gradient": [1.0, -2.0, 0.5]},
    "compare": {
      "threshold": 1e-8,
      "plane": {"axis": 2, "value": 1.0, "lo": [-4, -4], "hi": [4, 4], "resolution": [21, 21]},
      "mfs": {"sources_per_void": 144, "source_depth": 0.2}
    }
  })"));
  ASSERT_EQ(run({"compare-oracle", cfg.string(), "--out", dir_.string()}), cli::kSuccess) << log_.str();
  const json r = read_json(dir_ / "error_report.json");
  EXPECT_LE(r.at("max_rel").get<double>(), 1e-8);
  EXPECT_GT(r.at("n_points").get<int>(), 300);
  EXPECT_EQ(count_lines(dir_ / "pointwise.csv"), r.at("n_points").get<std::size_t>() + 1);
}

TEST_F(CliTest, CompareOracleSweepWritesConvergenceTable) {
  const fs::path cfg = write_config("sweep.json", json::parse(R"({
    "cloud": {"voids": [{"center": [3, 0, 0], "radius": 0.4}, {"center": [3, 1.2, 0], "radius": 0.4}]},
    "domain": {"type": "ball", "R": 7},
    "source": {"rho": 1, "amplitude": 6},
    "compare": {
      "plane": {"axis": 2, "value": 0, "lo": [1.5, -1.5], "hi": [4.5, 2.7], "resolution": [21, 21]},
      "mfs": {"sources_per_void": 400, "source_depth": 0.3},
      "radius_scales": [1, 0.5]
    }
  })"));
  ASSERT_EQ(run({"compare-oracle", cfg.string(), "--out", dir_.string()}), cli::kSuccess) << log_.str();
  EXPECT_EQ(count_lines(dir_ / "convergence.csv"), 3u);
  const json conv = read_json(dir_ / "convergence.json");
  EXPECT_GE(conv.at("order").get<double>(), 2.0);
}

TEST_F(CliTest, ReproduceFig5SmallGrid) {
  ASSERT_EQ(run({"reproduce-fig5", "--m", "2", "--out", dir_.string()}), cli::kSuccess) << log_.str();
  EXPECT_EQ(count_lines(dir_ / "fig5_m2.csv"), 1001u);
  const std::string csv = slurp(dir_ / "fig5_m2.csv");
  EXPECT_EQ(csv.rfind("x1,correction\r\n", 0), 0u);
  EXPECT_EQ(run({"reproduce-fig5", "--m", "11", "--out", dir_.string()}), cli::kAdmissibilityError);
}

TEST_F(CliTest, ExhaustedFixedPointIsSolverFailure) {
  const fs::path cfg = write_config("fp.json", json::parse(R"({
    "cloud": {"table1": true},
    "solver": {"method": "fixed_point", "tol": 1e-14, "max_iter": 2}
  })"));
  EXPECT_EQ(run({"solve", cfg.string(), "--out", dir_.string()}), cli::kSolverFailure) << log_.str();
  EXPECT_EQ(read_json(dir_ / "run_metadata.json").at("exit_code"), 3);
}

TEST_F(CliTest, UnreachableOracleResidualIsOracleFailure) {
  const fs::path cfg = write_config("tight.json", json::parse(R"({
    "cloud": {"voids": [{"center": [3, 0, 0], "radius": 0.4}, {"center": [3, 1.2, 0], "radius": 0.4}]},
    "domain": {"type": "ball", "R": 7},
    "source": {"rho": 1, "amplitude": 6},
    "compare": {"mfs": {"sources_per_void": 16, "max_residual": 1e-15}}
  })"));
  EXPECT_EQ(run({"compare-oracle", cfg.string(), "--out", dir_.string()}), cli::kOracleFailure) << log_.str();
}

TEST_F(CliTest, UnknownCommandAndMissingConfig) {
  EXPECT_NE(run({"frobnicate"}), cli::kSuccess);
  EXPECT_NE(run({"solve"}), cli::kSuccess);
}

}  // namespace
}  // namespace mesocloud
