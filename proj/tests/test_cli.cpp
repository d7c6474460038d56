#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "oba/binio.hpp"
#include "oba/cli.hpp"

namespace fs = std::filesystem;
using oba::binio::read_file;

namespace {

fs::path work_dir() {
  const char* env = std::getenv("OBA_TEST_TMP");
  fs::path p = env ? fs::path(env) : fs::temp_directory_path() / "oba_cli_test";
  fs::create_directories(p);
  return p;
}

int oba_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "oba");
  return oba::cli::run(args);
}

fs::path write_text(const std::string& name, const std::string& text) {
  const fs::path p = work_dir() / name;
  std::ofstream(p) << text;
  return p;
}

const std::string kTinyConfig =
    "[gen]\ngrid = 9\n[train]\narch = desk\nbatch = 32\nepochs_eda = 1\nepochs_ord = 1\nepochs_sel = 1\nepochs_sra = 1\n[ordinal]\neta = 2.5\n";

}  // namespace

TEST(Cli, GenIsByteIdenticalAcrossRuns) {
  const auto dir = work_dir();
  const auto cfg = write_text("tiny.cfg", kTinyConfig);
  ASSERT_EQ(oba_cli({"gen", "--config", cfg.string(), "--out", (dir / "a.obads").string(), "--seed", "7", "--n", "50"}), 0);
  ASSERT_EQ(oba_cli({"gen", "--config", cfg.string(), "--out", (dir / "b.obads").string(), "--seed", "7", "--n", "50"}), 0);
  ASSERT_EQ(oba_cli({"gen", "--config", cfg.string(), "--out", (dir / "c.obads").string(), "--seed", "8", "--n", "50"}), 0);
  EXPECT_EQ(read_file(dir / "a.obads"), read_file(dir / "b.obads"));
  EXPECT_NE(read_file(dir / "a.obads"), read_file(dir / "c.obads"));
  const std::string manifest = read_file(dir / "a.obads.run_manifest.txt");
  EXPECT_NE(manifest.find("seed = 7"), std::string::npos) << manifest;
  EXPECT_NE(manifest.find("grid = 9"), std::string::npos) << manifest;
}

TEST(Cli, TrainEvalPredictPlotEndToEnd) {
  const auto dir = work_dir();
  const auto cfg = write_text("tiny.cfg", kTinyConfig);
  const auto data = (dir / "e2e.obads").string(), model = (dir / "e2e_model").string();
  ASSERT_EQ(oba_cli({"gen", "--config", cfg.string(), "--out", data, "--seed", "3", "--n", "120"}), 0);
  ASSERT_EQ(oba_cli({"screen", "--config", cfg.string(), "--data", data, "--out", (dir / "sel.txt").string()}), 0);
  ASSERT_EQ(oba_cli({"train", "--config", cfg.string(), "--data", data, "--out", model, "--seed", "1", "--selection", (dir / "sel.txt").string()}), 0);
  EXPECT_TRUE(fs::exists(fs::path(model) / "losses_all.csv"));
  EXPECT_TRUE(fs::exists(fs::path(model) / "run_manifest.txt"));
  ASSERT_EQ(oba_cli({"eval", "--data", data, "--model", model, "--report", (dir / "report.csv").string()}), 0);
  const std::string report = read_file(dir / "report.csv");
  EXPECT_EQ(report.rfind("method,mae,mpae,ts_0.1,ts_1,ts_10\nBI,", 0), 0u) << report;
  EXPECT_NE(report.find("\nOBA,"), std::string::npos);
  ASSERT_EQ(oba_cli({"predict", "--data", data, "--model", model, "--out", (dir / "pred.csv").string()}), 0);
  EXPECT_EQ(read_file(dir / "pred.csv").rfind("sample_index,prediction_mm\n0,", 0), 0u);
  ASSERT_EQ(oba_cli({"plot", "--kind", "histogram", "--input", data, "--out", (dir / "hist.svg").string()}), 0);
  ASSERT_EQ(oba_cli({"plot", "--kind", "heatmap", "--input", data, "--model", model, "--samples", "0,1,2", "--out", (dir / "heat.svg").string()}), 0);
  EXPECT_NE(read_file(dir / "heat.svg").find("class=\"cell\""), std::string::npos);
}

TEST(Cli, UsageErrorsExitWithOne) {
  const auto dir = work_dir();
  EXPECT_EQ(oba_cli({}), oba::cli::kUsage);
  EXPECT_EQ(oba_cli({"frobnicate"}), oba::cli::kUsage);
  EXPECT_EQ(oba_cli({"gen", "--out", (dir / "x.obads").string()}), oba::cli::kUsage);
  EXPECT_EQ(oba_cli({"train", "--data", "d", "--out", "m", "--seed", "1", "--stage", "bogus"}), oba::cli::kUsage);
  const auto bad = write_text("bad.cfg", "[ordinal]\neta = abc\n");
  EXPECT_EQ(oba_cli({"gen", "--config", bad.string(), "--out", (dir / "x.obads").string(), "--seed", "1"}), oba::cli::kUsage);
  EXPECT_EQ(oba_cli({"--help"}), oba::cli::kOk);
}

TEST(Cli, DataErrorsExitWithTwo) {
  const auto dir = work_dir();
  EXPECT_EQ(oba_cli({"screen", "--data", (dir / "missing.obads").string(), "--out", (dir / "s.txt").string()}), oba::cli::kDataError);
  std::ofstream(dir / "garbage.obads") << "definitely not a dataset";
  EXPECT_EQ(oba_cli({"screen", "--data", (dir / "garbage.obads").string(), "--out", (dir / "s.txt").string()}), oba::cli::kDataError);
  const auto cfg = write_text("tiny.cfg", kTinyConfig);
  const auto data = (dir / "d2.obads").string();
  ASSERT_EQ(oba_cli({"gen", "--config", cfg.string(), "--out", data, "--seed", "2", "--n", "60"}), 0);
  EXPECT_EQ(oba_cli({"eval", "--data", data, "--model", (dir / "no_model").string(), "--report", (dir / "r.csv").string()}), oba::cli::kDataError);
  EXPECT_EQ(oba_cli({"train", "--config", cfg.string(), "--data", data, "--out", (dir / "fresh").string(), "--seed", "1", "--stage", "ordinal"}),
            oba::cli::kDataError);
}

TEST(Cli, DivergenceExitsWithThree) {
  const auto dir = work_dir();
  const auto cfg = write_text("diverge.cfg", kTinyConfig + "[train]\nlr_eda = 1e300\nwd_eda = 0\n");
  const auto data = (dir / "d3.obads").string();
  ASSERT_EQ(oba_cli({"gen", "--config", cfg.string(), "--out", data, "--seed", "2", "--n", "60"}), 0);
  EXPECT_EQ(oba_cli({"train", "--config", cfg.string(), "--data", data, "--out", (dir / "div").string(), "--seed", "1", "--stage", "eda"}),
            oba::cli::kNumericError);
}
