#include "ls/surrogate/data_source.hpp"

namespace ls::surrogate {

DataSourceMode parse_mode(const std::string& name) {
  if (name == "global") return DataSourceMode::kGlobal;
  if (name == "local") return DataSourceMode::kLocal;
  if (name == "local_global" || name == "local-global") return DataSourceMode::kLocalGlobal;
  throw std::invalid_argument("unknown data-source mode '" + name +
                              "' (expected global, local or local_global)");
}

std::string to_string(DataSourceMode mode) {
  switch (mode) {
    case DataSourceMode::kGlobal: return "global";
    case DataSourceMode::kLocal: return "local";
    case DataSourceMode::kLocalGlobal: return "local_global";
  }
  return "unknown";
}

namespace {

PairBatch require(const BatchProducer& producer, const char* what, DataSourceMode mode) {
  if (!producer) {
    throw MissingBatchError(std::string("mode ") + to_string(mode) + " needs a " + what + " batch");
  }
  PairBatch batch = producer();
  if (batch.empty()) {
    throw MissingBatchError(std::string("mode ") + to_string(mode) + " got an empty " + what +
                            " batch");
  }
  batch.validate();
  return batch;
}

}  // namespace

std::vector<PairBatch> sample_pair(DataSourceMode mode, const BatchProducer& model,
                                   const BatchProducer& random) {
  std::vector<PairBatch> out;
  if (mode != DataSourceMode::kGlobal) out.push_back(require(model, "model", mode));
  if (mode != DataSourceMode::kLocal) out.push_back(require(random, "random", mode));
  return out;
}

}  // namespace ls::surrogate
