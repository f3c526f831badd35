#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "ls/embed/embedding.hpp"
#include "ls/harness/config.hpp"
#include "ls/posttune/trainer.hpp"
#include "ls/surrogate/box_pool.hpp"
#include "ls/surrogate/string_gen.hpp"

namespace ls::harness {

/// Version of the surrogate-log CSV layout, recorded in every run manifest.
inline constexpr int kCsvSchemaVersion = 1;
inline constexpr int kManifestVersion = 1;

// File names inside a run directory.
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kModelCheckpoint = "model.ckpt";
inline constexpr const char* kSurrogateCheckpoint = "surrogate.ckpt";
inline constexpr const char* kSurrogateLog = "surrogate_log.csv";
inline constexpr const char* kRunReport = "run_report.json";

posttune::ToyDataset make_dataset(const ExperimentConfig& config);
std::unique_ptr<posttune::TaskModel> make_model(const ExperimentConfig& config);
std::unique_ptr<embed::EmbeddingNet> make_surrogate(const ExperimentConfig& config);

/// Pool settings for the box task; labels are the training boxes.
surrogate::BoxGenConfig pool_config(const ExperimentConfig& config, const posttune::ToyDataset& data);

/// Global-approximation pair source: the string generator, or a sampler over
/// a box pool (loaded from `generator.pool_path` or built in-process).
class RandomPairs {
 public:
  RandomPairs(const ExperimentConfig& config, const posttune::ToyDataset& data);
  surrogate::PairBatch next(std::size_t batch_size);
  std::size_t calls() const;

 private:
  std::optional<surrogate::StringPairGenerator> strings_;
  std::optional<surrogate::BoxPoolSampler> boxes_;
};

/// Writes the pool to `path` and returns it.
surrogate::BoxPool run_build_pool(const ExperimentConfig& config, const std::filesystem::path& path);

/// Proxy pre-training. Writes model.ckpt and pretrain.json into `out_dir`.
posttune::PretrainResult run_pretrain(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct SurrogateRunSummary {
  std::size_t steps = 0;
  double final_abs_err = 0.0;  // running mean over the log window
  double final_penalty = 0.0;
  double local_abs_err = 0.0;  // on model predictions for the test split

  nlohmann::json to_json() const;
};

/// Trains the surrogate alone for `config.surrogate_steps` steps against a
/// fixed task model (the configured checkpoint, or a model pre-trained
/// in-process). Writes model.ckpt, surrogate.ckpt, the step CSV and a summary.
SurrogateRunSummary run_train_surrogate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Alternating post-tuning from `config.model_checkpoint`, optionally with a
/// warm-started surrogate. Writes the tuned model.ckpt, surrogate.ckpt, the
/// step CSV and run_report.json (no wall clock; that goes to timing.json).
posttune::RunReport run_post_tune(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct ReportOutcome {
  std::vector<std::filesystem::path> charts;
  std::size_t csv_rows = 0;
  std::optional<double> local_abs_err;
};

/// Renders charts for a finished run directory. With `eval_local`, also
/// measures the surrogate's mean |e_hat - e| on the run model's test-split
/// predictions. Refuses a run whose CSV schema version differs.
ReportOutcome run_report(const std::filesystem::path& run_dir, bool eval_local);

nlohmann::json read_manifest(const std::filesystem::path& run_dir);

}  // namespace ls::harness
