#pragma once

// Per-op cases shared by the gradient property tests and the acceptance suite.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ls/ad/graph.hpp"

namespace ls::testing {

using namespace ::ls::ad;

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(shape);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

// Values bounded away from the kink of piecewise-linear ops.
inline Tensor random_off_kink(const Shape& shape, std::mt19937_64& rng) {
  Tensor t = random_tensor(shape, rng);
  for (double& v : t.data()) {
    if (std::abs(v) < 1e-2) v = v < 0 ? -0.5 : 0.5;
  }
  return t;
}

struct OpCase {
  std::string name;
  std::vector<Shape> shapes;
  std::function<Var(const std::vector<Var>&)> apply;
  bool second_order = true;
  enum Domain { kAny, kPositive, kOffKink } domain = kAny;
};

inline std::vector<OpCase> op_cases() {
  using V = std::vector<Var>;
  std::vector<OpCase> cases = {
      {"add", {{3, 2}, {3, 2}}, [](const V& v) { return add(v[0], v[1]); }},
      {"sub", {{3, 2}, {3, 2}}, [](const V& v) { return sub(v[0], v[1]); }},
      {"mul", {{4}, {4}}, [](const V& v) { return mul(v[0], v[1]); }},
      {"scale", {{4}}, [](const V& v) { return scale(v[0], -2.5); }},
      {"add_scalar", {{4}}, [](const V& v) { return add_scalar(v[0], 0.7); }},
      {"square", {{5}}, [](const V& v) { return square(v[0]); }},
      {"sqrt", {{5}}, [](const V& v) { return sqrt(v[0]); }, true, OpCase::kPositive},
      {"reciprocal", {{5}}, [](const V& v) { return reciprocal(v[0]); }, true, OpCase::kPositive},
      {"div", {{3}, {3}}, [](const V& v) { return div(v[0], v[1]); }, true, OpCase::kPositive},
      {"exp", {{5}}, [](const V& v) { return exp(v[0]); }},
      {"log", {{5}}, [](const V& v) { return log(v[0]); }, true, OpCase::kPositive},
      {"sigmoid", {{5}}, [](const V& v) { return sigmoid(v[0]); }},
      {"relu", {{6}}, [](const V& v) { return relu(v[0]); }, true, OpCase::kOffKink},
      {"leaky_relu", {{6}}, [](const V& v) { return leaky_relu(v[0], 0.01); }, true,
       OpCase::kOffKink},
      {"sum", {{2, 3}}, [](const V& v) { return sum(v[0]); }},
      {"mean", {{2, 3}}, [](const V& v) { return mean(v[0]); }},
      {"matmul", {{3, 4}, {4, 2}}, [](const V& v) { return matmul(v[0], v[1]); }},
      {"matmul_ta", {{4, 3}, {4, 2}}, [](const V& v) { return matmul(v[0], v[1], true, false); }},
      {"matmul_tb", {{3, 4}, {2, 4}}, [](const V& v) { return matmul(v[0], v[1], false, true); }},
      {"matmul_tab", {{4, 3}, {2, 4}}, [](const V& v) { return matmul(v[0], v[1], true, true); }},
      {"affine", {{3, 4}, {2, 4}, {2}}, [](const V& v) { return affine(v[0], v[1], v[2]); }},
      {"conv1d", {{2, 3, 5}, {4, 3, 3}, {4}},
       [](const V& v) { return conv1d(v[0], v[1], v[2], 1, 1); }},
      {"conv1d_stride2_cl", {{2, 6, 3}, {2, 3, 2}, {2}},
       [](const V& v) {
         return conv1d(v[0], v[1], v[2], 2, 0, Layout::kChannelsLast, Layout::kChannelsLast);
       }},
      {"sum_rows", {{3, 4}}, [](const V& v) { return sum_rows(v[0]); }},
      {"sum_cols", {{3, 4}}, [](const V& v) { return sum_cols(v[0]); }},
      {"add_row_vector", {{3, 4}, {4}}, [](const V& v) { return add_row_vector(v[0], v[1]); }},
      {"l2norm", {{5}}, [](const V& v) { return l2norm(v[0]); }},
      {"l2norm_rows", {{3, 2, 2}}, [](const V& v) { return l2norm_rows(v[0]); }},
      {"mse", {{2, 3}, {2, 3}}, [](const V& v) { return mse(v[0], v[1]); }},
      {"slice_concat", {{3, 4}, {3, 2}},
       [](const V& v) {
         const Var parts[] = {slice_cols(v[0], 1, 3), v[1]};
         return concat_cols(parts);
       }},
      {"slice_concat_rows", {{3, 2, 2}, {1, 2, 2}},
       [](const V& v) {
         const Var parts[] = {v[1], slice_rows(v[0], 1, 3)};
         return concat_rows(parts);
       }},
      {"reshape", {{2, 6}}, [](const V& v) { return reshape(v[0], Shape{3, 4}); }},
      {"softmax", {{2, 3, 2}}, [](const V& v) { return softmax(v[0], 1); }, false},
      {"log_softmax", {{2, 3}}, [](const V& v) { return log_softmax(v[0], 1); }, false},
      {"smooth_l1", {{6}, {6}}, [](const V& v) { return smooth_l1(v[0], v[1]); }, false},
  };
  return cases;
}

inline std::vector<Tensor> sample_inputs(const OpCase& op, std::mt19937_64& rng) {
  std::vector<Tensor> inputs;
  for (const Shape& s : op.shapes) {
    switch (op.domain) {
      case OpCase::kPositive: inputs.push_back(random_tensor(s, rng, 0.5, 2.0)); break;
      case OpCase::kOffKink: inputs.push_back(random_off_kink(s, rng)); break;
      default: inputs.push_back(random_tensor(s, rng, -1.5, 1.5)); break;
    }
  }
  return inputs;
}

// Scalarizes an op by a fixed random projection of its output.
inline Var project(const Var& out, const Tensor& weights) {
  return sum(mul(reshape(out, weights.shape()), constant(weights)));
}

}  // namespace ls::testing
