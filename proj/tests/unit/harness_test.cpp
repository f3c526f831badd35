#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ls/harness/charts.hpp"
#include "ls/harness/config.hpp"
#include "ls/harness/pipelines.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ls::harness;
using nlohmann::json;

json tiny_iou() {
  return {{"version", 1},
          {"task", "ls_iou"},
          {"seed", 3},
          {"dataset", {{"train_size", 200}, {"test_size", 50}, {"label_count", 100}}},
          {"generator", {{"pool_size", 1000}}},
          {"surrogate_steps", 20},
          {"log_window", 5},
          {"pretrain", {{"steps", 20}}},
          {"train", {{"epochs", 2}, {"surrogate_steps", 4}, {"model_steps", 4}, {"batch_size", 8}}}};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ls_harness_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Config, RequiresVersionAndTask) {
  json j = tiny_iou();
  j.erase("version");
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
  j = tiny_iou();
  j["version"] = 2;
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
  j = tiny_iou();
  j.erase("task");
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  json j = tiny_iou();
  j["lerning_rate"] = 1;
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
  j = tiny_iou();
  j["train"]["mode"] = "global";
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
  j = tiny_iou();
  j["mode"] = "sideways";
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
  j = tiny_iou();
  j["train"]["batch_size"] = 0;
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
  j = tiny_iou();
  j["model_checkpoint"] = "/nonexistent/model.ckpt";
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
}

TEST(Config, StringShapesMustAgree) {
  json j = {{"version", 1}, {"task", "ls_ed"}, {"surrogate", {{"max_length", 9}}}};
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  for (const json& j : {tiny_iou(), json{{"version", 1}, {"task", "ls_ed"}, {"mode", "global"}}}) {
    const auto a = ExperimentConfig::from_json(j);
    const auto b = ExperimentConfig::from_json(a.to_json());
    EXPECT_EQ(a.to_json(), b.to_json());
    EXPECT_EQ(b.train.mode, a.mode);
  }
}

TEST(Config, SeedsAreDerivedDeterministically) {
  const auto a = Seeds::derive(7), b = Seeds::derive(7), c = Seeds::derive(8);
  EXPECT_EQ(a.to_json(), b.to_json());
  EXPECT_NE(a.dataset, c.dataset);
  EXPECT_NE(a.model, a.surrogate);
  auto config = ExperimentConfig::from_json(tiny_iou());
  config.apply_seed(11);
  EXPECT_EQ(config.boxes.seed, Seeds::derive(11).dataset);
  EXPECT_EQ(config.train.seed, Seeds::derive(11).train);
}

TEST(Curves, StepsMustIncrease) {
  CurveSeries s{"x", {{1, 0.0}, {1, 1.0}}, 1};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.points = {{2, 0.0}, {1, 1.0}};
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Curves, TrailingMeanSmoothing) {
  const CurveSeries s{"x", {{1, 1.0}, {2, 3.0}, {3, 5.0}, {4, 7.0}}, 2};
  const auto m = s.smoothed();
  ASSERT_EQ(m.points.size(), 4u);
  EXPECT_DOUBLE_EQ(m.points[0].value, 1.0);
  EXPECT_DOUBLE_EQ(m.points[1].value, 2.0);
  EXPECT_DOUBLE_EQ(m.points[3].value, 6.0);
}

TEST(Charts, SvgIsDeterministicAndSelfContained) {
  ChartSpec chart{"Error <curve>", "step", "value", {{"a", {{1, 0.5}, {2, 0.25}, {3, 0.2}}, 1},
                                                    {"b", {{1, 1.0}, {3, 0.1}}, 1}}};
  const std::string svg = render_svg(chart);
  EXPECT_EQ(svg, render_svg(chart));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("Error &lt;curve&gt;"), std::string::npos);
  std::size_t paths = 0;
  for (std::size_t at = svg.find("<path"); at != std::string::npos; at = svg.find("<path", at + 1)) ++paths;
  EXPECT_EQ(paths, 2u);
  EXPECT_EQ(svg.find("href"), std::string::npos);
}

TEST(Charts, EmptyAndLogScaleCharts) {
  EXPECT_NO_THROW(render_svg(ChartSpec{"empty", "x", "y", {}}));
  ChartSpec log_chart{"log", "x", "y", {{"a", {{1, 1e-3}, {2, 1.0}, {3, 0.0}}, 1}}};
  log_chart.log_y = true;
  EXPECT_NE(render_svg(log_chart).find("<path"), std::string::npos);
}

TEST(Pipelines, BuildPoolIsByteIdenticalAcrossThreadCounts) {
  const fs::path dir = scratch("pool");
  auto config = ExperimentConfig::from_json(tiny_iou());
  run_build_pool(config, dir / "a.bin");
  config.threads = 3;
  run_build_pool(config, dir / "b.bin");
  EXPECT_EQ(fs::file_size(dir / "a.bin"), 16u + 1000u * 13u * 8u);
  EXPECT_EQ(slurp(dir / "a.bin"), slurp(dir / "b.bin"));
}

TEST(Pipelines, BuildPoolRejectsStringTask) {
  const auto config = ExperimentConfig::from_json({{"version", 1}, {"task", "ls_ed"}});
  EXPECT_THROW(run_build_pool(config, scratch("pool_ed") / "p.bin"), ConfigError);
}

TEST(Pipelines, TrainSurrogateThenReport) {
  const fs::path dir = scratch("train");
  const auto config = ExperimentConfig::from_json(tiny_iou());
  const auto summary = run_train_surrogate(config, dir);
  EXPECT_EQ(summary.steps, 20u);
  for (const char* f : {kManifestFile, kModelCheckpoint, kSurrogateCheckpoint, kSurrogateLog}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto outcome = run_report(dir, /*eval_local=*/true);
  EXPECT_EQ(outcome.csv_rows, 20u);
  ASSERT_EQ(outcome.charts.size(), 2u);
  for (const auto& chart : outcome.charts) EXPECT_TRUE(fs::exists(chart));
  ASSERT_TRUE(outcome.local_abs_err.has_value());
  EXPECT_NEAR(*outcome.local_abs_err, summary.local_abs_err, 1e-12);
}

TEST(Pipelines, ReportRefusesOtherCsvSchema) {
  const fs::path dir = scratch("schema");
  run_train_surrogate(ExperimentConfig::from_json(tiny_iou()), dir);
  auto manifest = read_manifest(dir);
  manifest["csv_schema_version"] = kCsvSchemaVersion + 1;
  std::ofstream(dir / kManifestFile) << manifest.dump();
  EXPECT_THROW(run_report(dir, false), ConfigError);
}

TEST(Pipelines, PostTuneNeedsCheckpointAndIsReproducible) {
  const fs::path pre = scratch("pretrain");
  auto config = ExperimentConfig::from_json(tiny_iou());
  EXPECT_THROW(run_post_tune(config, scratch("no_ckpt")), ConfigError);
  run_pretrain(config, pre);
  config.model_checkpoint = pre / kModelCheckpoint;

  const fs::path a = scratch("post_a"), b = scratch("post_b");
  run_post_tune(config, a);
  run_post_tune(config, b);
  EXPECT_EQ(slurp(a / kRunReport), slurp(b / kRunReport));
  EXPECT_EQ(slurp(a / kSurrogateLog), slurp(b / kSurrogateLog));
  EXPECT_EQ(slurp(a / kModelCheckpoint), slurp(b / kModelCheckpoint));

  const auto outcome = run_report(a, false);
  EXPECT_EQ(outcome.csv_rows, 8u);
  EXPECT_EQ(outcome.charts.size(), 3u);
}

}  // namespace
