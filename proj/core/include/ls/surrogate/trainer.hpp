#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <vector>

#include "ls/ad/optim.hpp"
#include "ls/embed/embedding.hpp"
#include "ls/surrogate/data_source.hpp"
#include "ls/surrogate/loss.hpp"

namespace ls::surrogate {

/// A loss or gradient went non-finite. The message carries the diagnostics.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SurrogateTrainConfig {
  double lr = 1e-4;
  ad::OptimizerKind optimizer = ad::OptimizerKind::kAdam;
  DataSourceMode mode = DataSourceMode::kLocalGlobal;
  SurrogateLossConfig loss;
  /// Echoed into the metrics log.
  std::uint64_t seed = 0;

  void validate() const;
};

struct SurrogateStepLog {
  std::size_t step = 0;  // 1-based, counted across calls to train()
  double mean_abs_err = 0.0;
  double penalty_term = 0.0;
  double loss = 0.0;
};

/// Runs gradient steps on the surrogate loss. Optimizer state persists across
/// calls so alternating schedules continue where they left off.
class SurrogateTrainer {
 public:
  SurrogateTrainer(embed::EmbeddingNet& net, SurrogateTrainConfig config);

  /// `steps` updates; zero steps leave the network untouched.
  std::vector<SurrogateStepLog> train(std::size_t steps, const BatchProducer& model,
                                      const BatchProducer& random);

  const std::vector<SurrogateStepLog>& log() const { return log_; }
  const SurrogateTrainConfig& config() const { return config_; }
  std::size_t steps_done() const { return log_.size(); }

 private:
  embed::EmbeddingNet& net_;
  SurrogateTrainConfig config_;
  std::unique_ptr<ad::Optimizer> optimizer_;
  std::vector<SurrogateStepLog> log_;
};

/// Header of the surrogate metrics log.
inline constexpr const char* kSurrogateCsvHeader = "step,mean_abs_err,penalty_term,loss,mode,seed";

void write_surrogate_csv(const std::filesystem::path& path, const std::vector<SurrogateStepLog>& log,
                         DataSourceMode mode, std::uint64_t seed);

/// Throws std::runtime_error on a header mismatch or malformed row.
std::vector<SurrogateStepLog> read_surrogate_csv(const std::filesystem::path& path);

/// Trailing mean over `window` entries ending at each index.
std::vector<double> running_mean(const std::vector<double>& values, std::size_t window);

}  // namespace ls::surrogate
