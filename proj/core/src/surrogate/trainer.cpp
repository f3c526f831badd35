#include "ls/surrogate/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ls::surrogate {

void SurrogateTrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("surrogate trainer: bad learning rate");
  loss.validate();
}

SurrogateTrainer::SurrogateTrainer(embed::EmbeddingNet& net, SurrogateTrainConfig config)
    : net_(net), config_(config) {
  config_.validate();
  optimizer_ = ad::make_optimizer(config_.optimizer, config_.lr);
}

std::vector<SurrogateStepLog> SurrogateTrainer::train(std::size_t steps, const BatchProducer& model,
                                                      const BatchProducer& random) {
  std::vector<SurrogateStepLog> out;
  auto& params = net_.params();
  for (std::size_t s = 0; s < steps; ++s) {
    const std::vector<PairBatch> parts = sample_pair(config_.mode, model, random);
    params.zero_grad();
    ad::Var total;
    double abs_err = 0.0, penalty = 0.0;
    std::size_t rows = 0;
    for (const auto& part : parts) {
      const LossTerms terms = surrogate_loss(net_, part, config_.loss);
      total = total.defined() ? ad::add(total, terms.loss) : terms.loss;
      abs_err += terms.mean_abs_err * static_cast<double>(part.size());
      penalty += terms.penalty_term * static_cast<double>(part.size());
      rows += part.size();
    }
    SurrogateStepLog entry{log_.size() + 1, abs_err / static_cast<double>(rows),
                           penalty / static_cast<double>(rows), total.item()};
    params.backward(total);
    if (!std::isfinite(entry.loss) || !params.all_finite() || !std::isfinite(params.grad_norm())) {
      std::ostringstream msg;
      msg << "surrogate training diverged at step " << entry.step << ": loss=" << entry.loss
          << " mean_abs_err=" << entry.mean_abs_err << " penalty=" << entry.penalty_term
          << " batch_rows=" << rows << " param_norm=" << params.value_norm()
          << " grad_norm=" << params.grad_norm();
      throw NumericError(msg.str());
    }
    optimizer_->step(params);
    log_.push_back(entry);
    out.push_back(entry);
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_surrogate_csv(const std::filesystem::path& path, const std::vector<SurrogateStepLog>& log,
                         DataSourceMode mode, std::uint64_t seed) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << kSurrogateCsvHeader << '\n';
  const std::string tail = "," + to_string(mode) + "," + std::to_string(seed) + "\n";
  for (const auto& e : log) {
    out << e.step << ',' << fmt(e.mean_abs_err) << ',' << fmt(e.penalty_term) << ',' << fmt(e.loss)
        << tail;
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<SurrogateStepLog> read_surrogate_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kSurrogateCsvHeader) {
    throw std::runtime_error(path.string() + ": unexpected header '" + line + "'");
  }
  std::vector<SurrogateStepLog> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell[6];
    for (auto& c : cell) std::getline(fields, c, ',');
    try {
      out.push_back({std::stoull(cell[0]), std::stod(cell[1]), std::stod(cell[2]), std::stod(cell[3])});
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ": malformed row " + std::to_string(row));
    }
  }
  return out;
}

std::vector<double> running_mean(const std::vector<double>& values, std::size_t window) {
  if (window == 0) throw std::invalid_argument("running_mean: window must be positive");
  std::vector<double> out(values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += values[i];
    if (i >= window) acc -= values[i - window];
    out[i] = acc / static_cast<double>(std::min(window, i + 1));
  }
  return out;
}

}  // namespace ls::surrogate
