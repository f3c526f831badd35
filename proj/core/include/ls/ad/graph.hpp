#pragma once

// Reverse-mode automatic differentiation over dense tensors.
//
// Values are computed eagerly when an op is applied; every op also records a
// backward rule written in terms of other ops, so a gradient computed with
// `create_graph` is itself a differentiable graph (double backward).

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ls/ad/tensor.hpp"

namespace ls::ad {

class Var;

/// An op on the differentiation path has no second-order rule.
class UnsupportedOpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps the gradient of the node output to gradients of each input. `self` is
/// the node being differentiated. An undefined Var in the result means "no
/// gradient for that input".
using BackwardRule = std::function<std::vector<Var>(const Var& grad_out, const Var& self)>;

struct Node {
  std::string op;
  std::vector<Var> inputs;
  Tensor value;
  bool requires_grad = false;
  bool is_leaf = true;
  bool second_order = true;
  BackwardRule backward;
};

/// Shared handle to a graph node. Copies alias the same node.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool is_leaf() const { return node_->is_leaf; }
  const std::string& op() const { return node_->op; }
  double item() const { return node_->value.item(); }

  /// Leaf values may be overwritten between tapes (parameter updates).
  Tensor& mutable_leaf_value();

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& shared() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

Var constant(Tensor value);
Var leaf(Tensor value, bool requires_grad = true);

/// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

/// Returns the root's value. Evaluation is eager, so every intermediate value
/// is already cached on its node.
const Tensor& forward(const Var& root);

/// d(root)/d(wrt[i]) for a scalar root. Inputs unreachable from root get a zero
/// tensor. With create_graph the returned Vars are differentiable graphs;
/// any op on the path without a second-order rule raises UnsupportedOpError.
std::vector<Var> grad(const Var& root, std::span<const Var> wrt, bool create_graph = false);

/// Differentiable gradient of a scalar root with respect to one input.
Var grad_graph(const Var& root, const Var& wrt);

// ---- op set -----------------------------------------------------------------

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double offset);
Var neg(const Var& a);
Var square(const Var& a);
Var sqrt(const Var& a);
Var reciprocal(const Var& a);
Var div(const Var& a, const Var& b);
Var exp(const Var& a);
Var log(const Var& a);
Var sigmoid(const Var& a);
Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope = 0.01);

/// Sum of all elements, as a scalar.
Var sum(const Var& a);
Var mean(const Var& a);
/// Broadcast a single-element tensor to `shape`.
Var expand(const Var& scalar, const Shape& shape);

Var reshape(const Var& a, const Shape& shape);

/// out[i] = in[index[i]], or 0 where index[i] < 0.
Var gather(const Var& a, std::vector<std::ptrdiff_t> index, const Shape& out_shape);
/// Adjoint of gather: out[index[i]] += in[i], entries with index < 0 dropped.
Var scatter_add(const Var& a, std::vector<std::ptrdiff_t> index, const Shape& out_shape);

/// 2-D product op(a) * op(b) where op transposes when the flag is set.
Var matmul(const Var& a, const Var& b, bool transpose_a = false, bool transpose_b = false);

/// Row sums of a [N, M] matrix -> [N].
Var sum_rows(const Var& a);
/// Column sums of a [N, M] matrix -> [M].
Var sum_cols(const Var& a);
/// [N] -> [N, M] with every column equal to v.
Var repeat_cols(const Var& v, std::size_t cols);
/// [M] -> [N, M] with every row equal to v.
Var repeat_rows(const Var& v, std::size_t rows);

/// x[N, M] + b[M] added to every row.
Var add_row_vector(const Var& x, const Var& b);

/// x[N, in] * w[out, in]^T + b[out].
Var affine(const Var& x, const Var& weight, const Var& bias);

enum class Layout { kChannelsFirst, kChannelsLast };

/// 1-D convolution (cross-correlation) of x with weight [C_out, C_in, K].
/// x is [B, C_in, L] (channels-first) or [B, L, C_in] (channels-last); the
/// result uses `output_layout`. Zero padding on both ends.
Var conv1d(const Var& x, const Var& weight, const Var& bias, std::size_t stride, std::size_t padding,
           Layout input_layout = Layout::kChannelsFirst,
           Layout output_layout = Layout::kChannelsFirst);

/// Softmax along `axis`. First-order only.
Var softmax(const Var& a, std::size_t axis);
/// Log-softmax along `axis`. First-order only.
Var log_softmax(const Var& a, std::size_t axis);

/// sqrt(sum(v^2) + eps) over all elements -> scalar.
Var l2norm(const Var& v, double eps = 1e-12);
/// Row-wise smoothed L2 norm of a [N, ...] tensor -> [N].
Var l2norm_rows(const Var& v, double eps = 1e-12);

/// mean((a - b)^2).
Var mse(const Var& a, const Var& b);
/// mean of elementwise smooth-L1 (Huber with unit threshold). First-order only.
Var smooth_l1(const Var& a, const Var& b);

/// Columns [begin, end) of a [N, M] matrix.
Var slice_cols(const Var& a, std::size_t begin, std::size_t end);
/// Concatenates [N, M_i] matrices along columns.
Var concat_cols(std::span<const Var> parts);

/// Rows [begin, end) along the leading axis.
Var slice_rows(const Var& a, std::size_t begin, std::size_t end);
/// Concatenates tensors along the leading axis; trailing shapes must agree.
Var concat_rows(std::span<const Var> parts);

}  // namespace ls::ad
