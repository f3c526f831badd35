#include "ls/ad/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace ls::ad {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw std::invalid_argument("unknown optimizer '" + name + "' (expected sgd or adam)");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::kSgd ? "sgd" : "adam"; }

void Sgd::step(ParamSet& params) {
  for (auto& p : params.entries()) {
    auto w = p.var.mutable_leaf_value().data();
    auto g = p.grad.data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr_ * g[i];
  }
}

void Adam::step(ParamSet& params) {
  auto& entries = params.entries();
  if (m_.empty()) {
    for (const auto& p : entries) {
      m_.emplace_back(p.var.shape());
      v_.emplace_back(p.var.shape());
    }
  }
  if (m_.size() != entries.size()) throw std::logic_error("Adam: parameter layout changed");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < entries.size(); ++k) {
    auto w = entries[k].var.mutable_leaf_value().data();
    auto g = entries[k].grad.data();
    auto m = m_[k].data();
    auto v = v_[k].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      w[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double lr) {
  if (!(lr >= 0.0)) throw std::invalid_argument("learning rate must be non-negative");
  if (kind == OptimizerKind::kSgd) return std::make_unique<Sgd>(lr);
  return std::make_unique<Adam>(lr);
}

}  // namespace ls::ad
