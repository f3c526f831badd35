#pragma once

#include <span>

#include "ls/ad/graph.hpp"
#include "ls/embed/embedding.hpp"
#include "ls/surrogate/pair_batch.hpp"

namespace ls::surrogate {

struct SurrogateLossConfig {
  double lambda = 10.0;
  double penalty_target = 1.0;
  double eps = 1e-12;

  void validate() const;
};

struct LossTerms {
  ad::Var loss;               // scalar, differentiable w.r.t. the net's parameters
  double mean_abs_err = 0.0;  // mean |e_hat - e|
  double penalty_term = 0.0;  // mean (|d e_hat / d z| - target)^2, before lambda
  double mean_estimate = 0.0;
};

/// Batch mean of (e_hat(z, y) - e)^2 + lambda * (|d e_hat / d z|_2 - target)^2.
/// The penalty is differentiated w.r.t. z only; y is a constant.
LossTerms surrogate_loss(const embed::EmbeddingNet& net, const ad::Tensor& z, const ad::Tensor& y,
                         std::span<const double> e_true, const SurrogateLossConfig& config);

inline LossTerms surrogate_loss(const embed::EmbeddingNet& net, const PairBatch& batch,
                                const SurrogateLossConfig& config) {
  return surrogate_loss(net, batch.z, batch.y, batch.e, config);
}

/// e_hat for every row without recording a graph.
std::vector<double> surrogate_estimates(const embed::EmbeddingNet& net, const ad::Tensor& z,
                                        const ad::Tensor& y, double eps = 1e-12);

/// Mean |e_hat - e| over a batch, no graph.
double mean_abs_error(const embed::EmbeddingNet& net, const PairBatch& batch, double eps = 1e-12);

}  // namespace ls::surrogate
