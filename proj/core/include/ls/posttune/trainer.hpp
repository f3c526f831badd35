#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "ls/ad/optim.hpp"
#include "ls/embed/embedding.hpp"
#include "ls/posttune/dataset.hpp"
#include "ls/posttune/evaluate.hpp"
#include "ls/posttune/task_model.hpp"
#include "ls/surrogate/trainer.hpp"

namespace ls::posttune {

struct PretrainConfig {
  std::size_t steps = 2000;
  double lr = 1e-3;
  ad::OptimizerKind optimizer = ad::OptimizerKind::kAdam;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  /// Held-out proxy loss the run is expected to reach.
  double target_test_loss = std::numeric_limits<double>::infinity();

  void validate() const;
  nlohmann::json to_json() const;
  static PretrainConfig from_json(const nlohmann::json& j);
};

struct PretrainResult {
  std::vector<double> train_loss;  // per step
  double test_loss = 0.0;
  bool reached_target = false;
  EvalReport test;
};

/// Minimizes the model's proxy loss. Throws surrogate::NumericError on a
/// non-finite loss or gradient.
PretrainResult pretrain_proxy(TaskModel& model, const ToyDataset& data, const PretrainConfig& config);

/// Mean proxy loss over a split, no graph.
double proxy_loss_on(const TaskModel& model, const ToySplit& split, std::size_t chunk = 256);

/// Hyper-parameters of the alternating schedule.
struct TrainConfig {
  std::size_t epochs = 20;           // E
  std::size_t surrogate_steps = 500;  // I_a
  std::size_t model_steps = 500;      // I_b
  double surrogate_lr = 1e-4;        // eta_a
  double model_lr = 1e-4;            // eta_b
  ad::OptimizerKind surrogate_optimizer = ad::OptimizerKind::kAdam;
  ad::OptimizerKind model_optimizer = ad::OptimizerKind::kAdam;
  std::size_t batch_size = 32;
  surrogate::SurrogateLossConfig loss;
  surrogate::DataSourceMode mode = surrogate::DataSourceMode::kLocalGlobal;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

/// Raised when a frozen parameter set changed during the other phase.
class FreezeViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double surrogate_abs_err = 0.0;  // mean over the surrogate phase
  double surrogate_penalty = 0.0;
  double model_loss = 0.0;         // mean e_hat over the model phase
  double local_abs_err = 0.0;      // |e_hat - e| on test-split predictions after the epoch
  EvalReport test;
};

struct RunReport {
  nlohmann::json config;
  EvalReport baseline;
  std::vector<EpochRecord> epochs;
  EvalReport final_test;
  std::vector<surrogate::SurrogateStepLog> surrogate_log;
  std::uint64_t theta_checksum = 0;
  std::uint64_t phi_checksum = 0;
  double wall_clock_seconds = 0.0;

  /// Per-epoch arrays, final metrics and seeds. The surrogate step log is
  /// written separately as CSV.
  nlohmann::json to_json(bool include_wall_clock = true) const;
};

/// Alternating training: every epoch runs I_a surrogate steps with theta frozen
/// (data per `config.mode`), then I_b model steps on mean e_hat with phi frozen.
/// Freezing is verified by checksums; NaNs abort with step diagnostics.
RunReport posttune_ls(TaskModel& model, embed::EmbeddingNet& surrogate_net, const ToyDataset& data,
                      const TrainConfig& config, const surrogate::BatchProducer& random);

/// Model-generated pairs from a split: z = f(x) on sampled rows, with oracle targets.
surrogate::PairBatch model_pairs(const TaskModel& model, const ToyDataset& data, const ToySplit& split,
                                 std::span<const std::size_t> rows);

/// Mean |e_hat - e| of the surrogate on model predictions for every row of a split.
double local_approximation_error(const TaskModel& model, const embed::EmbeddingNet& net,
                                 const ToyDataset& data, const ToySplit& split);

}  // namespace ls::posttune
