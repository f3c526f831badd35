#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ls/ad/params.hpp"

namespace ls::ad {

enum class OptimizerKind { kSgd, kAdam };

OptimizerKind parse_optimizer(const std::string& name);
std::string to_string(OptimizerKind kind);

/// Applies accumulated gradients of a ParamSet. State is bound to the set's
/// parameter layout on first use.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(ParamSet& params) = 0;
  virtual double learning_rate() const = 0;
};

class Sgd final : public Optimizer {
 public:
  explicit Sgd(double lr) : lr_(lr) {}
  void step(ParamSet& params) override;
  double learning_rate() const override { return lr_; }

 private:
  double lr_;
};

class Adam final : public Optimizer {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(ParamSet& params) override;
  double learning_rate() const override { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Tensor> m_, v_;
};

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double lr);

}  // namespace ls::ad
