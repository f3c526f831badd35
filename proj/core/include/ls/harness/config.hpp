#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ls/posttune/dataset.hpp"
#include "ls/posttune/task_model.hpp"
#include "ls/posttune/trainer.hpp"
#include "ls/surrogate/box_pool.hpp"

namespace ls::harness {

inline constexpr int kConfigVersion = 1;

/// Invalid or inconsistent experiment configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-component seeds derived from the experiment seed.
struct Seeds {
  std::uint64_t dataset = 0;
  std::uint64_t model = 0;
  std::uint64_t surrogate = 0;
  std::uint64_t generator = 0;
  std::uint64_t pool = 0;
  std::uint64_t pretrain = 0;
  std::uint64_t train = 0;

  static Seeds derive(std::uint64_t seed);
  nlohmann::json to_json() const;
};

/// Random-pair source for the global approximation.
struct GeneratorConfig {
  std::size_t max_edits = 4;  // strings
  surrogate::PerturbBounds bounds;  // boxes
  std::size_t pool_size = 100'000;
  std::size_t bins = 10;
  std::uint64_t max_attempts = 0;
  std::filesystem::path pool_path;  // prebuilt pool; empty builds one in-process
};

struct ExperimentConfig {
  int version = kConfigVersion;
  posttune::TaskKind task = posttune::TaskKind::kEditDistance;
  surrogate::DataSourceMode mode = surrogate::DataSourceMode::kLocalGlobal;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::filesystem::path out = "runs/default";

  posttune::StringDatasetConfig strings;
  posttune::BoxDatasetConfig boxes;
  GeneratorConfig generator;
  nlohmann::json model;      // task model hyper-parameters
  nlohmann::json surrogate;  // embedding hyper-parameters
  /// Steps of the standalone `train-surrogate` pipeline.
  std::size_t surrogate_steps = 10'000;
  std::size_t log_window = 100;
  posttune::PretrainConfig pretrain;
  posttune::TrainConfig train;

  std::filesystem::path model_checkpoint;
  std::filesystem::path surrogate_checkpoint;

  /// Defaults for a task, used when keys are absent.
  static ExperimentConfig defaults(posttune::TaskKind task);

  /// Parses and validates. Relative paths resolve against `base_dir`.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// Pushes the experiment seed and mode into the nested configs.
  void apply_seed(std::uint64_t new_seed);
  void validate() const;

  Seeds seeds() const { return Seeds::derive(seed); }
  std::string task_name() const;
};

nlohmann::json to_json(const posttune::StringDatasetConfig& c);
nlohmann::json to_json(const posttune::BoxDatasetConfig& c);

}  // namespace ls::harness
