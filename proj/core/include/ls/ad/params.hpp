#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ls/ad/graph.hpp"

namespace ls::ad {

struct Parameter {
  std::string name;
  Var var;     // requires-grad leaf
  Tensor grad;  // accumulator, same shape as var
};

/// Named trainable tensors with gradient accumulators.
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(const ParamSet&) = delete;
  ParamSet& operator=(const ParamSet&) = delete;
  ParamSet(ParamSet&&) = default;
  ParamSet& operator=(ParamSet&&) = default;

  /// Registers a parameter; names must be unique.
  Var add(std::string name, Tensor init);

  const Var& get(const std::string& name) const;
  std::size_t size() const { return params_.size(); }
  std::size_t numel() const;

  std::vector<Parameter>& entries() { return params_; }
  const std::vector<Parameter>& entries() const { return params_; }
  std::vector<Var> vars() const;

  void zero_grad();
  /// Adds d(root)/d(param) to every accumulator.
  void backward(const Var& root);

  /// FNV-1a over the raw bytes of all parameter values, in registration order.
  std::uint64_t checksum() const;
  double value_norm() const;
  double grad_norm() const;
  bool all_finite() const;

  /// Copies values from another set with identical names and shapes.
  void copy_values_from(const ParamSet& other);

 private:
  std::vector<Parameter> params_;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights.
Tensor init_uniform_fan_in(const Shape& shape, std::size_t fan_in, std::mt19937_64& rng);

}  // namespace ls::ad
