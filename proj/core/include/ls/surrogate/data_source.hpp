#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ls/surrogate/pair_batch.hpp"

namespace ls::surrogate {

/// Where surrogate training pairs come from: the random generator, the
/// frozen task model's predictions, or one batch of each per step.
enum class DataSourceMode { kGlobal, kLocal, kLocalGlobal };

DataSourceMode parse_mode(const std::string& name);
std::string to_string(DataSourceMode mode);

class MissingBatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Produces one batch per call. An empty function means "not available".
using BatchProducer = std::function<PairBatch()>;

/// Batches used for one surrogate step. Only the producers the mode needs are
/// invoked; the step loss is the sum of the per-batch losses.
std::vector<PairBatch> sample_pair(DataSourceMode mode, const BatchProducer& model,
                                   const BatchProducer& random);

}  // namespace ls::surrogate
