#include "plume/cli/cli.hpp"
#include "plume/core/cube_io.hpp"
#include "plume/estimate/estimators.hpp"
#include "plume/eval/config.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace plume;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> dir_contents(const fs::path& dir, const std::set<std::string>& skip = {}) {
  std::map<std::string, std::string> m;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (!skip.count(name)) m[name] = slurp(e.path());
  }
  return m;
}

/// A report small enough for a unit test: one gas, one strength, one scenario.
fs::path tiny_config(const fs::path& dir) {
  auto c = eval::ExperimentConfig::defaults();
  c.scene.height = 32;
  c.scene.width = 32;
  c.scene.bands = 24;
  c.gases = {"SF6"};
  c.strengths = {0.5};
  c.scene_seeds = 1;
  c.calibration.trials = 3;
  c.grids.kmeans = {2, 3};
  c.grids.pca = {1, 3};
  c.grids.knn = {1, 4};
  c.grids.annulus = {1};
  c.grids.kns_k = {4};
  c.grids.kns_bts = {false};
  const auto p = dir / "tiny.json";
  std::ofstream(p) << c.to_json().dump(2);
  return p;
}

}  // namespace

TEST(Cli, GlobalEstimateOfConstantCube) {
  const auto dir = test::scratch_dir("cli_constant");
  write_cube(test::constant_cube(12, 12, 5, 2.5), dir / "cube.hsi");
  write_mask(test::box_mask(12, 12, 5, 5, 7, 7), dir / "roi.mask");
  const auto r = run({"estimate", "--cube", (dir / "cube.hsi").string(), "--roi", (dir / "roi.mask").string(),
                      "--method", "Global", "--out-dir", (dir / "out").string(), "--quiet"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto e = bg::read_estimate(dir / "out" / "background.csv", 12);
  ASSERT_EQ(e.roi_pixels.size(), 4u);
  EXPECT_EQ(e.backgrounds.cwiseAbs().maxCoeff(), 2.5);
  EXPECT_EQ(e.backgrounds.minCoeff(), 2.5);
  EXPECT_TRUE(fs::exists(dir / "out" / "resolved_config.json"));
}

TEST(Cli, ExitCodes) {
  const auto dir = test::scratch_dir("cli_codes");
  write_cube(test::gaussian_cube(12, 12, 5, 4), dir / "cube.hsi");
  write_mask(test::box_mask(12, 12, 5, 5, 7, 7), dir / "roi.mask");
  const std::string cube = (dir / "cube.hsi").string(), roi = (dir / "roi.mask").string();
  const std::string out = (dir / "out").string();

  EXPECT_EQ(run({"estimate", "--cube", cube, "--roi", roi, "--method", "Bogus", "--out-dir", out}).code,
            cli::kConfigError);
  EXPECT_EQ(run({"scene", "--seed", "x"}).code, cli::kConfigError);
  EXPECT_EQ(run({"nonsense"}).code, cli::kConfigError);
  EXPECT_EQ(run({"scene", "--config", (dir / "absent.json").string()}).code, cli::kConfigError);

  std::ofstream(dir / "bad.json") << R"({"scene": {"colour": 3}})";
  const auto bad = run({"scene", "--config", (dir / "bad.json").string(), "--out-dir", out});
  EXPECT_EQ(bad.code, cli::kConfigError);
  const auto err = nlohmann::json::parse(bad.err);
  EXPECT_EQ(err["error"], "config");

  std::ofstream(dir / "junk.hsi") << "not a cube";
  EXPECT_EQ(run({"segment", "--cube", (dir / "junk.hsi").string(), "--out-dir", out}).code, cli::kIoError);

  // k larger than the pool is a domain error of the estimator.
  EXPECT_EQ(run({"estimate", "--cube", cube, "--roi", roi, "--method", "KNN", "--k", "5000", "--out-dir", out,
                 "--quiet"})
                .code,
            cli::kDomainError);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST(Cli, SceneDetectSegmentIdentifyChain) {
  const auto dir = test::scratch_dir("cli_chain");
  const auto cfg = tiny_config(dir).string();
  const std::string out = (dir / "out").string();
  auto ok = [&](std::vector<std::string> a) {
    a.insert(a.end(), {"--config", cfg, "--out-dir", out, "--quiet"});
    const auto r = run(a);
    EXPECT_EQ(r.code, cli::kOk) << a.front() << ": " << r.err;
    return r;
  };
  ok({"plume", "--gas", "SF6", "--n-c-max", "150"});
  const std::string cube = (dir / "out" / "cube.hsi").string();
  ok({"detect", "--cube", cube, "--gas", "SF6", "--exclude", (dir / "out" / "roi_truth.mask").string()});
  ASSERT_TRUE(fs::exists(dir / "out" / "roi.mask"));
  ok({"segment", "--cube", cube});
  EXPECT_TRUE(fs::exists(dir / "out" / "segments.lbl"));
  const std::string roi = (dir / "out" / "roi.mask").string();
  ok({"estimate", "--cube", cube, "--roi", roi, "--method", "KNS", "--k", "4", "--linkage", "average"});
  ok({"identify", "--cube", cube, "--roi", roi, "--background", (dir / "out" / "background.csv").string()});
  const auto id = nlohmann::json::parse(slurp(dir / "out" / "identification.json"));
  EXPECT_EQ(id["method"], "KNS");
  EXPECT_FALSE(id["confidences"].empty());
}

TEST(Cli, ReportIsCompleteAndReproducible) {
  const auto dir = test::scratch_dir("cli_report");
  const auto cfg = tiny_config(dir).string();
  const auto a = run({"report", "--config", cfg, "--out-dir", (dir / "a").string(), "--quiet"});
  ASSERT_EQ(a.code, cli::kOk) << a.err;
  for (const char* f : {"summary.csv", "per_gas.csv", "per_strength.csv", "hyperparams.csv", "sensitivity.csv",
                        "cases.csv", "calibration.csv", "resolved_config.json", "mse_distribution.svg",
                        "mse_improvement.svg", "confidence_distribution.svg"}) {
    EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  }

  // Same config, different worker count: identical bytes.
  const auto b = run({"report", "--config", cfg, "--out-dir", (dir / "b").string(), "--workers", "2", "--quiet"});
  ASSERT_EQ(b.code, cli::kOk) << b.err;
  EXPECT_EQ(dir_contents(dir / "a", {"command.json"}), dir_contents(dir / "b", {"command.json"}));

  // The resolved config reproduces the run on its own.
  const auto c = run({"report", "--config", (dir / "a" / "resolved_config.json").string(), "--out-dir",
                      (dir / "c").string(), "--quiet"});
  ASSERT_EQ(c.code, cli::kOk) << c.err;
  EXPECT_EQ(slurp(dir / "a" / "cases.csv"), slurp(dir / "c" / "cases.csv"));
  EXPECT_EQ(slurp(dir / "a" / "summary.csv"), slurp(dir / "c" / "summary.csv"));
}

TEST(Cli, SeedOverrideChangesResults) {
  const auto dir = test::scratch_dir("cli_seed");
  const auto cfg = tiny_config(dir).string();
  ASSERT_EQ(run({"scene", "--config", cfg, "--out-dir", (dir / "a").string(), "--quiet"}).code, cli::kOk);
  ASSERT_EQ(run({"scene", "--config", cfg, "--seed", "99", "--out-dir", (dir / "b").string(), "--quiet"}).code,
            cli::kOk);
  EXPECT_NE(slurp(dir / "a" / "scene.hsi"), slurp(dir / "b" / "scene.hsi"));
  const auto resolved = nlohmann::json::parse(slurp(dir / "b" / "resolved_config.json"));
  EXPECT_EQ(resolved["seed"], 99);
}
