#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ls/harness/config.hpp"
#include "ls/harness/pipelines.hpp"
#include "ls/metrics/edit_distance.hpp"
#include "ls/metrics/geometry.hpp"

namespace {

namespace fs = std::filesystem;
using ls::harness::ConfigError;
using ls::harness::ExperimentConfig;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct GlobalOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string model_checkpoint;
  std::string surrogate_checkpoint;
};

ExperimentConfig load_config(const GlobalOptions& g) {
  if (g.config.empty()) throw ConfigError("--config is required for this command");
  auto config = ExperimentConfig::load(g.config);
  if (g.seed) config.apply_seed(*g.seed);
  if (g.threads) config.threads = *g.threads;
  if (!g.out.empty()) config.out = g.out;
  if (!g.model_checkpoint.empty()) config.model_checkpoint = g.model_checkpoint;
  if (!g.surrogate_checkpoint.empty()) config.surrogate_checkpoint = g.surrogate_checkpoint;
  config.validate();
  return config;
}

ls::metrics::RotatedBox parse_box(const std::vector<double>& v, std::size_t offset) {
  std::array<double, 6> p{};
  std::copy(v.begin() + static_cast<std::ptrdiff_t>(offset), v.begin() + static_cast<std::ptrdiff_t>(offset + 6),
            p.begin());
  return ls::metrics::RotatedBox::from_params(p);
}

int eval_metric(const std::string& metric, const std::vector<std::string>& inputs,
                std::pair<double, double> image) {
  if (metric == "ed") {
    if (inputs.size() != 2) throw ConfigError("eval-metric ed: expected two strings");
    std::printf("%zu\n", ls::metrics::edit_distance(inputs[0], inputs[1]));
    return 0;
  }
  if (metric == "iou") {
    if (inputs.size() != 12) throw ConfigError("eval-metric iou: expected two boxes of 6 numbers (cx cy w h cos sin)");
    std::vector<double> v;
    for (const auto& s : inputs) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != s.size()) throw ConfigError("eval-metric iou: not a number: '" + s + "'");
      v.push_back(x);
    }
    const ls::metrics::ImageSize size{image.first, image.second};
    std::printf("%.6f\n", ls::metrics::rotated_iou(parse_box(v, 0), parse_box(v, 6), size));
    return 0;
  }
  throw ConfigError("eval-metric: unknown metric '" + metric + "' (expected ed or iou)");
}

void print_histogram(const std::vector<std::size_t>& counts) {
  const double width = 1.0 / static_cast<double>(counts.size());
  for (std::size_t b = 0; b < counts.size(); ++b) {
    std::printf("iou [%.2f, %.2f%c %zu\n", width * static_cast<double>(b), width * static_cast<double>(b + 1),
                b + 1 == counts.size() ? ']' : ')', counts[b]);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned surrogate losses for edit distance and rotated IoU"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config, "Experiment config (JSON)");
  app.add_option("--out", g.out, "Output or run directory");
  app.add_option("--seed", g.seed, "Experiment seed (overrides the config)");
  app.add_option("--threads", g.threads, "Worker threads for pool building")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval-metric", "Print ed(a, b) or the rotated IoU of two boxes");
  std::string metric;
  std::vector<std::string> inputs;
  std::pair<double, double> image{1.0, 1.0};
  eval->add_option("metric", metric, "ed or iou")->required();
  eval->add_option("inputs", inputs, "two strings, or two boxes as cx cy w h cos sin")->required();
  eval->add_option("--image", image, "image width and height");

  auto* pool = app.add_subcommand("build-pool", "Build the random box-pair pool");
  std::string pool_path;
  pool->add_option("--pool", pool_path, "Pool file (default <out>/pool.bin)");

  app.add_subcommand("pretrain", "Proxy-loss pre-training of the task model");

  auto* train = app.add_subcommand("train-surrogate", "Train the surrogate alone against a fixed model");
  train->add_option("--model-checkpoint", g.model_checkpoint, "Task model to generate local pairs");
  train->add_option("--surrogate-checkpoint", g.surrogate_checkpoint, "Warm-start surrogate");

  auto* post = app.add_subcommand("post-tune", "Alternating surrogate / model training");
  post->add_option("--model-checkpoint", g.model_checkpoint, "Proxy-pretrained task model");
  post->add_option("--surrogate-checkpoint", g.surrogate_checkpoint, "Warm-start surrogate");

  auto* report = app.add_subcommand("report", "Render charts for a run directory");
  std::string run_dir;
  std::string eval_on = "none";
  report->add_option("run_dir", run_dir, "Run directory (default --out)");
  report->add_option("--eval-on", eval_on, "Also measure |e_hat - e| on model predictions")
      ->check(CLI::IsMember({"none", "local"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (eval->parsed()) return eval_metric(metric, inputs, image);

    if (report->parsed()) {
      const fs::path dir = run_dir.empty() ? fs::path(g.out) : fs::path(run_dir);
      if (dir.empty()) throw ConfigError("report: give a run directory or --out");
      const auto outcome = ls::harness::run_report(dir, eval_on == "local");
      for (const auto& chart : outcome.charts) std::printf("chart %s\n", chart.string().c_str());
      std::printf("csv_rows %zu\n", outcome.csv_rows);
      if (outcome.local_abs_err) std::printf("local_abs_err %.6f\n", *outcome.local_abs_err);
      return 0;
    }

    const auto config = load_config(g);
    if (pool->parsed()) {
      const fs::path path = pool_path.empty() ? config.out / "pool.bin" : fs::path(pool_path);
      const auto built = ls::harness::run_build_pool(config, path);
      print_histogram(built.histogram(config.generator.bins));
      std::printf("wrote %zu pairs to %s\n", built.records.size(), path.string().c_str());
    } else if (app.got_subcommand("pretrain")) {
      const auto result = ls::harness::run_pretrain(config, config.out);
      std::printf("test proxy loss %.6f\n%s\n", result.test_loss, result.test.to_json().dump().c_str());
    } else if (train->parsed()) {
      const auto summary = ls::harness::run_train_surrogate(config, config.out);
      std::printf("%s\n", summary.to_json().dump().c_str());
    } else if (post->parsed()) {
      const auto result = ls::harness::run_post_tune(config, config.out);
      std::printf("baseline %s\nfinal    %s\n", result.baseline.to_json().dump().c_str(),
                  result.final_test.to_json().dump().c_str());
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
