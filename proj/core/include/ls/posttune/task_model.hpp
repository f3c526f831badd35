#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <json.hpp>

#include "ls/ad/graph.hpp"
#include "ls/ad/params.hpp"

namespace ls::posttune {

enum class TaskKind { kEditDistance, kIou };

TaskKind parse_task(const std::string& name);
std::string to_string(TaskKind task);

/// f_theta: maps a batch of inputs to predictions z in the representation the
/// surrogate consumes.
class TaskModel {
 public:
  virtual ~TaskModel() = default;

  virtual TaskKind task() const = 0;
  virtual ad::Var predict(const ad::Var& x) const = 0;
  /// Differentiable pre-training loss against label representations y.
  virtual ad::Var proxy_loss(const ad::Var& x, const ad::Tensor& y) const = 0;
  virtual nlohmann::json architecture() const = 0;

  ad::ParamSet& params() { return params_; }
  const ad::ParamSet& params() const { return params_; }

 protected:
  ad::ParamSet params_;
};

/// Two conv1d layers and one affine layer producing per-position logits over
/// the alphabet; predictions are column-wise softmax distributions.
struct StringRecognizerConfig {
  std::size_t alphabet_size = 12;
  std::size_t max_length = 8;
  std::size_t channels = 32;
  std::size_t kernel = 3;
  double slope = 0.01;

  nlohmann::json to_json() const;
  static StringRecognizerConfig from_json(const nlohmann::json& j);
};

class StringRecognizer final : public TaskModel {
 public:
  StringRecognizer(const StringRecognizerConfig& config, std::uint64_t seed);

  TaskKind task() const override { return TaskKind::kEditDistance; }
  /// [B, |A|, L] logits.
  ad::Var logits(const ad::Var& x) const;
  ad::Var predict(const ad::Var& x) const override;
  /// Mean per-position cross-entropy.
  ad::Var proxy_loss(const ad::Var& x, const ad::Tensor& y) const override;
  nlohmann::json architecture() const override;
  const StringRecognizerConfig& config() const { return config_; }

 private:
  StringRecognizerConfig config_;
};

/// Three affine layers with ReLU. Raw outputs are mapped to valid box
/// parameters: sigmoid for the center, a bounded exponential for the extents,
/// and a unit-length (cos, sin) pair.
struct BoxRegressorConfig {
  std::size_t input_dim = 6;
  std::size_t hidden = 64;
  double min_extent = 0.005;
  double max_extent = 1.0;

  nlohmann::json to_json() const;
  static BoxRegressorConfig from_json(const nlohmann::json& j);
};

class BoxRegressor final : public TaskModel {
 public:
  BoxRegressor(const BoxRegressorConfig& config, std::uint64_t seed);

  TaskKind task() const override { return TaskKind::kIou; }
  ad::Var raw(const ad::Var& x) const;
  ad::Var predict(const ad::Var& x) const override;
  /// Smooth-L1 on the transformed box parameters.
  ad::Var proxy_loss(const ad::Var& x, const ad::Tensor& y) const override;
  nlohmann::json architecture() const override;
  const BoxRegressorConfig& config() const { return config_; }

 private:
  BoxRegressorConfig config_;
};

/// Maps raw [B, 6] outputs to box parameters.
ad::Var box_output_transform(const ad::Var& raw, double min_extent, double max_extent);

std::unique_ptr<TaskModel> make_task_model(const nlohmann::json& architecture, std::uint64_t seed);

}  // namespace ls::posttune
