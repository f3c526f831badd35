#include "ls/posttune/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ls::posttune {

using ad::Tensor;
using ad::Var;
using surrogate::NumericError;

void PretrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("pretrain: batch_size must be positive");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("pretrain: bad learning rate");
}

nlohmann::json PretrainConfig::to_json() const {
  nlohmann::json j = {{"steps", steps},
                      {"lr", lr},
                      {"optimizer", ad::to_string(optimizer)},
                      {"batch_size", batch_size},
                      {"seed", seed}};
  if (std::isfinite(target_test_loss)) j["target_test_loss"] = target_test_loss;
  return j;
}

PretrainConfig PretrainConfig::from_json(const nlohmann::json& j) {
  PretrainConfig c;
  c.steps = j.value("steps", c.steps);
  c.lr = j.value("lr", c.lr);
  c.optimizer = ad::parse_optimizer(j.value("optimizer", ad::to_string(c.optimizer)));
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.target_test_loss = j.value("target_test_loss", c.target_test_loss);
  c.validate();
  return c;
}

double proxy_loss_on(const TaskModel& model, const ToySplit& split, std::size_t chunk) {
  ad::NoGradGuard guard;
  double total = 0.0;
  for (std::size_t start = 0; start < split.size(); start += chunk) {
    std::vector<std::size_t> rows(std::min(chunk, split.size() - start));
    std::iota(rows.begin(), rows.end(), start);
    const ToySplit part = split.rows(rows);
    total += model.proxy_loss(ad::constant(part.x), part.y).item() * static_cast<double>(rows.size());
  }
  return total / static_cast<double>(split.size());
}

PretrainResult pretrain_proxy(TaskModel& model, const ToyDataset& data, const PretrainConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  auto optimizer = ad::make_optimizer(config.optimizer, config.lr);
  auto& params = model.params();
  PretrainResult result;
  for (std::size_t step = 0; step < config.steps; ++step) {
    const auto rows = sample_indices(data.train.size(), config.batch_size, rng);
    const ToySplit batch = data.train.rows(rows);
    const Var loss = model.proxy_loss(ad::constant(batch.x), batch.y);
    params.zero_grad();
    params.backward(loss);
    if (!std::isfinite(loss.item()) || !std::isfinite(params.grad_norm())) {
      std::ostringstream msg;
      msg << "pretraining diverged at step " << step + 1 << ": loss=" << loss.item()
          << " param_norm=" << params.value_norm() << " grad_norm=" << params.grad_norm();
      throw NumericError(msg.str());
    }
    optimizer->step(params);
    result.train_loss.push_back(loss.item());
  }
  result.test_loss = proxy_loss_on(model, data.test);
  result.reached_target = result.test_loss <= config.target_test_loss;
  result.test = evaluate(model, data.test, data.alphabet);
  return result;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("train config: batch_size must be positive");
  if (!(surrogate_lr >= 0.0) || !(model_lr >= 0.0) || !std::isfinite(surrogate_lr) ||
      !std::isfinite(model_lr)) {
    throw std::invalid_argument("train config: learning rates must be finite and >= 0");
  }
  loss.validate();
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"surrogate_steps", surrogate_steps},
          {"model_steps", model_steps},
          {"surrogate_lr", surrogate_lr},
          {"model_lr", model_lr},
          {"surrogate_optimizer", ad::to_string(surrogate_optimizer)},
          {"model_optimizer", ad::to_string(model_optimizer)},
          {"batch_size", batch_size},
          {"lambda", loss.lambda},
          {"penalty_target", loss.penalty_target},
          {"eps", loss.eps},
          {"mode", surrogate::to_string(mode)},
          {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.surrogate_steps = j.value("surrogate_steps", c.surrogate_steps);
  c.model_steps = j.value("model_steps", c.model_steps);
  c.surrogate_lr = j.value("surrogate_lr", c.surrogate_lr);
  c.model_lr = j.value("model_lr", c.model_lr);
  c.surrogate_optimizer = ad::parse_optimizer(j.value("surrogate_optimizer", ad::to_string(c.surrogate_optimizer)));
  c.model_optimizer = ad::parse_optimizer(j.value("model_optimizer", ad::to_string(c.model_optimizer)));
  c.batch_size = j.value("batch_size", c.batch_size);
  c.loss.lambda = j.value("lambda", c.loss.lambda);
  c.loss.penalty_target = j.value("penalty_target", c.loss.penalty_target);
  c.loss.eps = j.value("eps", c.loss.eps);
  c.mode = surrogate::parse_mode(j.value("mode", surrogate::to_string(c.mode)));
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

nlohmann::json RunReport::to_json(bool include_wall_clock) const {
  nlohmann::json epochs_j = {{"epoch", nlohmann::json::array()},
                             {"surrogate_abs_err", nlohmann::json::array()},
                             {"surrogate_penalty", nlohmann::json::array()},
                             {"model_loss", nlohmann::json::array()},
                             {"local_abs_err", nlohmann::json::array()},
                             {"test", nlohmann::json::array()}};
  for (const auto& e : epochs) {
    epochs_j["epoch"].push_back(e.epoch);
    epochs_j["surrogate_abs_err"].push_back(e.surrogate_abs_err);
    epochs_j["surrogate_penalty"].push_back(e.surrogate_penalty);
    epochs_j["model_loss"].push_back(e.model_loss);
    epochs_j["local_abs_err"].push_back(e.local_abs_err);
    epochs_j["test"].push_back(e.test.to_json());
  }
  nlohmann::json j = {{"config", config},
                      {"baseline", baseline.to_json()},
                      {"epochs", epochs_j},
                      {"final", final_test.to_json()},
                      {"surrogate_steps_logged", surrogate_log.size()},
                      {"theta_checksum", theta_checksum},
                      {"phi_checksum", phi_checksum}};
  if (include_wall_clock) j["wall_clock_seconds"] = wall_clock_seconds;
  return j;
}

surrogate::PairBatch model_pairs(const TaskModel& model, const ToyDataset& data, const ToySplit& split,
                                 std::span<const std::size_t> rows) {
  const ToySplit batch = split.rows(rows);
  Tensor z;
  {
    ad::NoGradGuard guard;
    z = model.predict(ad::constant(batch.x)).value();
  }
  auto e = oracle_targets(model.task(), z, batch, data.alphabet);
  return {std::move(z), batch.y, std::move(e)};
}

double local_approximation_error(const TaskModel& model, const embed::EmbeddingNet& net,
                                 const ToyDataset& data, const ToySplit& split) {
  double total = 0.0;
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < split.size(); start += kChunk) {
    std::vector<std::size_t> rows(std::min(kChunk, split.size() - start));
    std::iota(rows.begin(), rows.end(), start);
    const auto pairs = model_pairs(model, data, split, rows);
    total += surrogate::mean_abs_error(net, pairs) * static_cast<double>(rows.size());
  }
  return total / static_cast<double>(split.size());
}

namespace {

void check_frozen(std::uint64_t before, std::uint64_t after, const char* what, std::size_t epoch) {
  if (before != after) {
    throw FreezeViolation(std::string(what) + " changed while frozen in epoch " + std::to_string(epoch));
  }
}

}  // namespace

RunReport posttune_ls(TaskModel& model, embed::EmbeddingNet& surrogate_net, const ToyDataset& data,
                      const TrainConfig& config, const surrogate::BatchProducer& random) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(config.seed);

  surrogate::SurrogateTrainConfig sconf;
  sconf.lr = config.surrogate_lr;
  sconf.optimizer = config.surrogate_optimizer;
  sconf.mode = config.mode;
  sconf.loss = config.loss;
  sconf.seed = config.seed;
  surrogate::SurrogateTrainer surrogate_trainer(surrogate_net, sconf);
  auto model_optimizer = ad::make_optimizer(config.model_optimizer, config.model_lr);

  const surrogate::BatchProducer model_batch = [&] {
    const auto rows = sample_indices(data.train.size(), config.batch_size, rng);
    return model_pairs(model, data, data.train, rows);
  };

  RunReport report;
  report.config = config.to_json();
  report.baseline = evaluate(model, data.test, data.alphabet);
  auto& theta = model.params();
  auto& phi = surrogate_net.params();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochRecord record;
    record.epoch = epoch;

    const std::uint64_t theta_before = theta.checksum();
    const auto slog = surrogate_trainer.train(config.surrogate_steps, model_batch, random);
    check_frozen(theta_before, theta.checksum(), "model parameters", epoch);
    for (const auto& s : slog) {
      record.surrogate_abs_err += s.mean_abs_err / static_cast<double>(slog.size());
      record.surrogate_penalty += s.penalty_term / static_cast<double>(slog.size());
    }

    const std::uint64_t phi_before = phi.checksum();
    for (std::size_t step = 0; step < config.model_steps; ++step) {
      const auto rows = sample_indices(data.train.size(), config.batch_size, rng);
      const ToySplit batch = data.train.rows(rows);
      const Var z = model.predict(ad::constant(batch.x));
      const Var loss = ad::mean(embed::surrogate_value(surrogate_net, z, ad::constant(batch.y), config.loss.eps));
      theta.zero_grad();
      theta.backward(loss);
      if (!std::isfinite(loss.item()) || !std::isfinite(theta.grad_norm())) {
        std::ostringstream msg;
        msg << "post-tuning diverged in epoch " << epoch << ", model step " << step + 1
            << ": loss=" << loss.item() << " param_norm=" << theta.value_norm()
            << " grad_norm=" << theta.grad_norm();
        throw NumericError(msg.str());
      }
      model_optimizer->step(theta);
      record.model_loss += loss.item() / static_cast<double>(config.model_steps);
    }
    check_frozen(phi_before, phi.checksum(), "surrogate parameters", epoch);

    record.local_abs_err = local_approximation_error(model, surrogate_net, data, data.test);
    record.test = evaluate(model, data.test, data.alphabet);
    report.epochs.push_back(record);
  }

  report.final_test = evaluate(model, data.test, data.alphabet);
  report.surrogate_log = surrogate_trainer.log();
  report.theta_checksum = theta.checksum();
  report.phi_checksum = phi.checksum();
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace ls::posttune
