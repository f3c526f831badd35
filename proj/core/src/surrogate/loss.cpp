#include "ls/surrogate/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace ls::surrogate {

using ad::Tensor;
using ad::Var;

void SurrogateLossConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("surrogate loss: lambda must be finite and >= 0");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("surrogate loss: eps must be > 0");
}

LossTerms surrogate_loss(const embed::EmbeddingNet& net, const Tensor& z, const Tensor& y,
                         std::span<const double> e_true, const SurrogateLossConfig& config) {
  config.validate();
  if (z.rank() < 1 || z.dim(0) != e_true.size()) {
    throw ad::ShapeError("surrogate_loss: " + std::to_string(e_true.size()) +
                         " targets for batch " + ad::shape_str(z.shape()));
  }
  const std::size_t rows = e_true.size();
  const Var zv = ad::leaf(z, true);
  const Var estimate = embed::surrogate_value(net, zv, ad::constant(y), config.eps);
  const Var target = ad::constant(Tensor(ad::Shape{rows}, std::vector<double>(e_true.begin(), e_true.end())));
  Var loss = ad::mse(estimate, target);

  // Rows are independent, so the gradient of the summed estimate holds every
  // per-row gradient.
  const Var targets[] = {zv};
  const bool penalize = config.lambda > 0.0;
  const Var g = ad::grad(ad::sum(estimate), targets, /*create_graph=*/penalize).front();
  Var gap = ad::add_scalar(ad::l2norm_rows(g, config.eps), -config.penalty_target);
  Var penalty = ad::mean(ad::square(gap));
  if (penalize) loss = ad::add(loss, ad::scale(penalty, config.lambda));

  LossTerms terms;
  terms.loss = loss;
  terms.penalty_term = penalty.item();
  double abs_err = 0.0, sum_est = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    abs_err += std::abs(estimate.value()[i] - e_true[i]);
    sum_est += estimate.value()[i];
  }
  terms.mean_abs_err = abs_err / static_cast<double>(rows);
  terms.mean_estimate = sum_est / static_cast<double>(rows);
  return terms;
}

std::vector<double> surrogate_estimates(const embed::EmbeddingNet& net, const Tensor& z,
                                        const Tensor& y, double eps) {
  ad::NoGradGuard guard;
  const Var estimate = embed::surrogate_value(net, ad::constant(z), ad::constant(y), eps);
  return estimate.value().values();
}

double mean_abs_error(const embed::EmbeddingNet& net, const PairBatch& batch, double eps) {
  batch.validate();
  const auto est = surrogate_estimates(net, batch.z, batch.y, eps);
  double s = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) s += std::abs(est[i] - batch.e[i]);
  return s / static_cast<double>(est.size());
}

}  // namespace ls::surrogate
