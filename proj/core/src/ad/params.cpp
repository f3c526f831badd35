#include "ls/ad/params.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace ls::ad {

Var ParamSet::add(std::string name, Tensor init) {
  for (const auto& p : params_) {
    if (p.name == name) throw std::invalid_argument("ParamSet: duplicate parameter '" + name + "'");
  }
  Tensor grad(init.shape());
  params_.push_back(Parameter{std::move(name), leaf(std::move(init), true), std::move(grad)});
  return params_.back().var;
}

const Var& ParamSet::get(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.var;
  }
  throw std::out_of_range("ParamSet: no parameter '" + name + "'");
}

std::size_t ParamSet::numel() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.var.size();
  return n;
}

std::vector<Var> ParamSet::vars() const {
  std::vector<Var> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.var);
  return out;
}

void ParamSet::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.data().begin(), p.grad.data().end(), 0.0);
}

void ParamSet::backward(const Var& root) {
  const std::vector<Var> targets = vars();
  const std::vector<Var> grads = grad(root, targets, /*create_graph=*/false);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Tensor& g = grads[i].value();
    auto acc = params_[i].grad.data();
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += g[j];
  }
}

std::uint64_t ParamSet::checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& p : params_) {
    for (double v : p.var.value().data()) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

double ParamSet::value_norm() const {
  double s = 0.0;
  for (const auto& p : params_) {
    for (double v : p.var.value().data()) s += v * v;
  }
  return std::sqrt(s);
}

double ParamSet::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_) {
    for (double v : p.grad.data()) s += v * v;
  }
  return std::sqrt(s);
}

bool ParamSet::all_finite() const {
  for (const auto& p : params_) {
    if (!p.var.value().all_finite()) return false;
  }
  return true;
}

void ParamSet::copy_values_from(const ParamSet& other) {
  if (other.params_.size() != params_.size()) {
    throw std::invalid_argument("ParamSet: parameter count mismatch");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& src = other.params_[i];
    auto& dst = params_[i];
    if (src.name != dst.name || src.var.shape() != dst.var.shape()) {
      throw std::invalid_argument("ParamSet: layout mismatch at '" + dst.name + "'");
    }
    dst.var.mutable_leaf_value() = src.var.value();
  }
}

Tensor init_uniform_fan_in(const Shape& shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(shape);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

}  // namespace ls::ad
