#pragma once

#include <vector>

#include "ls/ad/tensor.hpp"

namespace ls::surrogate {

/// Prediction/label pairs with the oracle metric value for each row.
/// z and y are [B, sample_shape...]; e has B entries.
struct PairBatch {
  ad::Tensor z;
  ad::Tensor y;
  std::vector<double> e;

  std::size_t size() const { return e.size(); }
  bool empty() const { return e.empty(); }
  /// Throws ad::ShapeError when z, y and e disagree on B or z and y on shape.
  void validate() const;
};

/// Concatenates along the batch axis.
PairBatch concat(const PairBatch& a, const PairBatch& b);

}  // namespace ls::surrogate
