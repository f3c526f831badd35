#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

#include "ls/ad/graph.hpp"

namespace ls::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

Var make_result(std::string op, std::vector<Var> inputs, Tensor value, BackwardRule rule,
                bool second_order = true) {
  auto node = std::make_shared<Node>();
  node->op = std::move(op);
  node->value = std::move(value);
  node->is_leaf = false;
  bool needs = false;
  if (grad_mode_enabled()) {
    for (const Var& in : inputs) needs = needs || in.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    node->second_order = second_order;
    node->inputs = std::move(inputs);
    node->backward = std::move(rule);
  }
  return Var(std::move(node));
}

[[noreturn]] void shape_fail(const std::string& op, std::initializer_list<Shape> shapes,
                             const std::string& detail = {}) {
  std::string msg = op + ": shape mismatch";
  bool first = true;
  for (const Shape& s : shapes) {
    msg += first ? " " : " vs ";
    msg += shape_str(s);
    first = false;
  }
  if (!detail.empty()) msg += " (" + detail + ")";
  throw ShapeError(msg);
}

void require_same(const std::string& op, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) shape_fail(op, {a.shape(), b.shape()});
}

void require_rank(const std::string& op, const Var& a, std::size_t rank) {
  if (a.shape().size() != rank) {
    shape_fail(op, {a.shape()}, "expected rank " + std::to_string(rank));
  }
}

template <typename F>
Tensor map_unary(const Tensor& a, F f) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

template <typename F>
Tensor map_binary(const Tensor& a, const Tensor& b, F f) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same("add", a, b);
  return make_result("add", {a, b}, map_binary(a.value(), b.value(), std::plus<>{}),
                     [](const Var& g, const Var&) { return std::vector<Var>{g, g}; });
}

Var sub(const Var& a, const Var& b) {
  require_same("sub", a, b);
  return make_result("sub", {a, b}, map_binary(a.value(), b.value(), std::minus<>{}),
                     [](const Var& g, const Var&) { return std::vector<Var>{g, neg(g)}; });
}

Var mul(const Var& a, const Var& b) {
  require_same("mul", a, b);
  return make_result("mul", {a, b}, map_binary(a.value(), b.value(), std::multiplies<>{}),
                     [a, b](const Var& g, const Var&) {
                       return std::vector<Var>{mul(g, b), mul(g, a)};
                     });
}

Var scale(const Var& a, double factor) {
  return make_result("scale", {a}, map_unary(a.value(), [factor](double v) { return v * factor; }),
                     [factor](const Var& g, const Var&) {
                       return std::vector<Var>{scale(g, factor)};
                     });
}

Var add_scalar(const Var& a, double offset) {
  return make_result("add_scalar", {a},
                     map_unary(a.value(), [offset](double v) { return v + offset; }),
                     [](const Var& g, const Var&) { return std::vector<Var>{g}; });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var square(const Var& a) {
  return make_result("square", {a}, map_unary(a.value(), [](double v) { return v * v; }),
                     [a](const Var& g, const Var&) {
                       return std::vector<Var>{mul(g, scale(a, 2.0))};
                     });
}

Var sqrt(const Var& a) {
  return make_result("sqrt", {a}, map_unary(a.value(), [](double v) { return std::sqrt(v); }),
                     [](const Var& g, const Var& self) {
                       return std::vector<Var>{scale(mul(g, reciprocal(self)), 0.5)};
                     });
}

Var reciprocal(const Var& a) {
  return make_result("reciprocal", {a}, map_unary(a.value(), [](double v) { return 1.0 / v; }),
                     [](const Var& g, const Var& self) {
                       return std::vector<Var>{neg(mul(g, square(self)))};
                     });
}

Var div(const Var& a, const Var& b) {
  require_same("div", a, b);
  return mul(a, reciprocal(b));
}

Var exp(const Var& a) {
  return make_result("exp", {a}, map_unary(a.value(), [](double v) { return std::exp(v); }),
                     [](const Var& g, const Var& self) { return std::vector<Var>{mul(g, self)}; });
}

Var log(const Var& a) {
  return make_result("log", {a}, map_unary(a.value(), [](double v) { return std::log(v); }),
                     [a](const Var& g, const Var&) { return std::vector<Var>{div(g, a)}; });
}

Var sigmoid(const Var& a) {
  auto f = [](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  };
  return make_result("sigmoid", {a}, map_unary(a.value(), f), [](const Var& g, const Var& self) {
    return std::vector<Var>{mul(g, mul(self, add_scalar(neg(self), 1.0)))};
  });
}

// Piecewise-linear activations: the local slope is a constant mask, so their
// second derivative is zero everywhere.
Var relu(const Var& a) { return leaky_relu(a, 0.0); }

Var leaky_relu(const Var& a, double slope) {
  const std::string name = slope == 0.0 ? "relu" : "leaky_relu";
  Tensor out(a.shape());
  Tensor mask(a.shape());
  const Tensor& x = a.value();
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask[i] = x[i] > 0.0 ? 1.0 : slope;
    out[i] = x[i] * mask[i];
  }
  return make_result(name, {a}, std::move(out),
                     [mask = std::move(mask)](const Var& g, const Var&) {
                       return std::vector<Var>{mul(g, constant(mask))};
                     });
}

Var sum(const Var& a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  const Shape in_shape = a.shape();
  return make_result("sum", {a}, Tensor::scalar(total), [in_shape](const Var& g, const Var&) {
    return std::vector<Var>{expand(g, in_shape)};
  });
}

Var mean(const Var& a) {
  if (a.size() == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Var expand(const Var& scalar, const Shape& shape) {
  if (scalar.size() != 1) shape_fail("expand", {scalar.shape(), shape}, "source must be scalar");
  const Shape in_shape = scalar.shape();
  return make_result("expand", {scalar}, Tensor(shape, scalar.item()),
                     [in_shape](const Var& g, const Var&) {
                       return std::vector<Var>{reshape(sum(g), in_shape)};
                     });
}

Var reshape(const Var& a, const Shape& shape) {
  if (shape_numel(shape) != a.size()) shape_fail("reshape", {a.shape(), shape});
  const Shape in_shape = a.shape();
  return make_result("reshape", {a}, a.value().reshaped(shape),
                     [in_shape](const Var& g, const Var&) {
                       return std::vector<Var>{reshape(g, in_shape)};
                     });
}

Var gather(const Var& a, std::vector<std::ptrdiff_t> index, const Shape& out_shape) {
  if (index.size() != shape_numel(out_shape)) {
    shape_fail("gather", {a.shape(), out_shape}, "index length " + std::to_string(index.size()));
  }
  const auto n = static_cast<std::ptrdiff_t>(a.size());
  Tensor out(out_shape);
  const Tensor& x = a.value();
  for (std::size_t i = 0; i < index.size(); ++i) {
    const std::ptrdiff_t j = index[i];
    if (j >= n) throw ShapeError("gather: index out of range for shape " + shape_str(a.shape()));
    out[i] = j < 0 ? 0.0 : x[static_cast<std::size_t>(j)];
  }
  const Shape in_shape = a.shape();
  return make_result("gather", {a}, std::move(out),
                     [index = std::move(index), in_shape](const Var& g, const Var&) {
                       return std::vector<Var>{scatter_add(g, index, in_shape)};
                     });
}

Var scatter_add(const Var& a, std::vector<std::ptrdiff_t> index, const Shape& out_shape) {
  if (index.size() != a.size()) {
    shape_fail("scatter_add", {a.shape(), out_shape},
               "index length " + std::to_string(index.size()));
  }
  const auto n = static_cast<std::ptrdiff_t>(shape_numel(out_shape));
  Tensor out(out_shape);
  const Tensor& x = a.value();
  for (std::size_t i = 0; i < index.size(); ++i) {
    const std::ptrdiff_t j = index[i];
    if (j >= n) throw ShapeError("scatter_add: index out of range for " + shape_str(out_shape));
    if (j >= 0) out[static_cast<std::size_t>(j)] += x[i];
  }
  const Shape in_shape = a.shape();
  return make_result("scatter_add", {a}, std::move(out),
                     [index = std::move(index), in_shape](const Var& g, const Var&) {
                       return std::vector<Var>{gather(g, index, in_shape)};
                     });
}

Var matmul(const Var& a, const Var& b, bool ta, bool tb) {
  if (a.shape().size() != 2 || b.shape().size() != 2) {
    shape_fail("matmul", {a.shape(), b.shape()}, "operands must be 2-D");
  }
  const std::size_t ar = a.shape()[0], ac = a.shape()[1];
  const std::size_t br = b.shape()[0], bc = b.shape()[1];
  const std::size_t m = ta ? ac : ar, k = ta ? ar : ac;
  const std::size_t kb = tb ? bc : br, n = tb ? br : bc;
  if (k != kb) {
    shape_fail("matmul", {a.shape(), b.shape()},
               std::string("transpose_a=") + (ta ? "1" : "0") + " transpose_b=" + (tb ? "1" : "0"));
  }
  Tensor out(Shape{m, n});
  ConstMap am(a.value().data().data(), static_cast<Eigen::Index>(ar), static_cast<Eigen::Index>(ac));
  ConstMap bm(b.value().data().data(), static_cast<Eigen::Index>(br), static_cast<Eigen::Index>(bc));
  MutMap om(out.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  if (!ta && !tb) om.noalias() = am * bm;
  else if (ta && !tb) om.noalias() = am.transpose() * bm;
  else if (!ta && tb) om.noalias() = am * bm.transpose();
  else om.noalias() = am.transpose() * bm.transpose();

  return make_result("matmul", {a, b}, std::move(out), [a, b, ta, tb](const Var& g, const Var&) {
    // C = op(A) op(B); gradients expressed as further matmuls.
    Var ga = ta ? matmul(b, g, tb, true) : matmul(g, b, false, !tb);
    Var gb = tb ? matmul(g, a, true, ta) : matmul(a, g, !ta, false);
    return std::vector<Var>{ga, gb};
  });
}

Var sum_rows(const Var& a) {
  require_rank("sum_rows", a, 2);
  const std::size_t rows = a.shape()[0], cols = a.shape()[1];
  Tensor out(Shape{rows});
  const Tensor& x = a.value();
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += x[r * cols + c];
    out[r] = s;
  }
  return make_result("sum_rows", {a}, std::move(out), [cols](const Var& g, const Var&) {
    return std::vector<Var>{repeat_cols(g, cols)};
  });
}

Var sum_cols(const Var& a) {
  require_rank("sum_cols", a, 2);
  const std::size_t rows = a.shape()[0], cols = a.shape()[1];
  Tensor out(Shape{cols});
  const Tensor& x = a.value();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c] += x[r * cols + c];
  }
  return make_result("sum_cols", {a}, std::move(out), [rows](const Var& g, const Var&) {
    return std::vector<Var>{repeat_rows(g, rows)};
  });
}

Var repeat_cols(const Var& v, std::size_t cols) {
  require_rank("repeat_cols", v, 1);
  const std::size_t rows = v.shape()[0];
  Tensor out(Shape{rows, cols});
  for (std::size_t r = 0; r < rows; ++r) {
    std::fill_n(out.data().begin() + static_cast<std::ptrdiff_t>(r * cols), cols, v.value()[r]);
  }
  return make_result("repeat_cols", {v}, std::move(out), [](const Var& g, const Var&) {
    return std::vector<Var>{sum_rows(g)};
  });
}

Var repeat_rows(const Var& v, std::size_t rows) {
  require_rank("repeat_rows", v, 1);
  const std::size_t cols = v.shape()[0];
  Tensor out(Shape{rows, cols});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(v.value().data().begin(), v.value().data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(r * cols));
  }
  return make_result("repeat_rows", {v}, std::move(out), [](const Var& g, const Var&) {
    return std::vector<Var>{sum_cols(g)};
  });
}

Var add_row_vector(const Var& x, const Var& b) {
  require_rank("add_row_vector", x, 2);
  if (b.shape().size() != 1 || b.shape()[0] != x.shape()[1]) {
    shape_fail("add_row_vector", {x.shape(), b.shape()});
  }
  const std::size_t rows = x.shape()[0], cols = x.shape()[1];
  Tensor out = x.value();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += b.value()[c];
  }
  return make_result("add_row_vector", {x, b}, std::move(out), [](const Var& g, const Var&) {
    return std::vector<Var>{g, sum_cols(g)};
  });
}

Var affine(const Var& x, const Var& weight, const Var& bias) {
  if (x.shape().size() != 2 || weight.shape().size() != 2 || bias.shape().size() != 1 ||
      x.shape()[1] != weight.shape()[1] || bias.shape()[0] != weight.shape()[0]) {
    shape_fail("affine", {x.shape(), weight.shape(), bias.shape()});
  }
  return add_row_vector(matmul(x, weight, false, true), bias);
}

Var conv1d(const Var& x, const Var& weight, const Var& bias, std::size_t stride,
           std::size_t padding, Layout input_layout, Layout output_layout) {
  if (x.shape().size() != 3 || weight.shape().size() != 3 || bias.shape().size() != 1) {
    shape_fail("conv1d", {x.shape(), weight.shape(), bias.shape()},
               "expected x rank 3, weight [C_out, C_in, K], bias [C_out]");
  }
  if (stride == 0) throw ShapeError("conv1d: stride must be positive");
  const bool cl_in = input_layout == Layout::kChannelsLast;
  const std::size_t batch = x.shape()[0];
  const std::size_t channels = cl_in ? x.shape()[2] : x.shape()[1];
  const std::size_t length = cl_in ? x.shape()[1] : x.shape()[2];
  const std::size_t out_channels = weight.shape()[0];
  const std::size_t kernel = weight.shape()[2];
  if (weight.shape()[1] != channels || bias.shape()[0] != out_channels) {
    shape_fail("conv1d", {x.shape(), weight.shape(), bias.shape()}, "channel count mismatch");
  }
  const std::size_t padded = length + 2 * padding;
  if (kernel == 0 || kernel > padded) {
    shape_fail("conv1d", {x.shape(), weight.shape()},
               "kernel " + std::to_string(kernel) + " larger than padded input " +
                   std::to_string(padded));
  }
  const std::size_t out_len = (padded - kernel) / stride + 1;

  // im2col: rows are (b, position), columns are (c, k).
  const std::size_t patch = channels * kernel;
  std::vector<std::ptrdiff_t> cols_index(batch * out_len * patch);
  std::size_t i = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out_len; ++o) {
      for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t k = 0; k < kernel; ++k) {
          const auto pos = static_cast<std::ptrdiff_t>(o * stride + k) -
                           static_cast<std::ptrdiff_t>(padding);
          std::ptrdiff_t src = -1;
          if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(length)) {
            const auto p = static_cast<std::size_t>(pos);
            src = static_cast<std::ptrdiff_t>(cl_in ? (b * length + p) * channels + c
                                                    : (b * channels + c) * length + p);
          }
          cols_index[i++] = src;
        }
      }
    }
  }
  Var cols = gather(x, std::move(cols_index), Shape{batch * out_len, patch});
  Var w2 = reshape(weight, Shape{out_channels, patch});
  Var y = add_row_vector(matmul(cols, w2, false, true), bias);  // [B*L_out, C_out]
  if (output_layout == Layout::kChannelsLast) {
    return reshape(y, Shape{batch, out_len, out_channels});
  }
  std::vector<std::ptrdiff_t> to_cf(batch * out_channels * out_len);
  i = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < out_channels; ++c) {
      for (std::size_t o = 0; o < out_len; ++o) {
        to_cf[i++] = static_cast<std::ptrdiff_t>((b * out_len + o) * out_channels + c);
      }
    }
  }
  return gather(y, std::move(to_cf), Shape{batch, out_channels, out_len});
}

namespace {

struct AxisSplit {
  std::size_t outer, n, inner;
};

AxisSplit split_axis(const std::string& op, const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw ShapeError(op + ": axis " + std::to_string(axis) + " out of range for " +
                     shape_str(shape));
  }
  AxisSplit s{1, shape[axis], 1};
  for (std::size_t d = 0; d < axis; ++d) s.outer *= shape[d];
  for (std::size_t d = axis + 1; d < shape.size(); ++d) s.inner *= shape[d];
  return s;
}

template <typename F>
void for_each_lane(const AxisSplit& s, F f) {
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) f(o * s.n * s.inner + in, s.inner);
  }
}

Tensor softmax_values(const Tensor& x, const AxisSplit& s) {
  Tensor out(x.shape());
  for_each_lane(s, [&](std::size_t base, std::size_t step) {
    double mx = -INFINITY;
    for (std::size_t j = 0; j < s.n; ++j) mx = std::max(mx, x[base + j * step]);
    double z = 0.0;
    for (std::size_t j = 0; j < s.n; ++j) {
      const double e = std::exp(x[base + j * step] - mx);
      out[base + j * step] = e;
      z += e;
    }
    for (std::size_t j = 0; j < s.n; ++j) out[base + j * step] /= z;
  });
  return out;
}

}  // namespace

Var softmax(const Var& a, std::size_t axis) {
  const AxisSplit s = split_axis("softmax", a.shape(), axis);
  Tensor out = softmax_values(a.value(), s);
  return make_result(
      "softmax", {a}, out,
      [s, out](const Var& g, const Var&) {
        Tensor dx(out.shape());
        const Tensor& gv = g.value();
        for_each_lane(s, [&](std::size_t base, std::size_t step) {
          double dot = 0.0;
          for (std::size_t j = 0; j < s.n; ++j) dot += gv[base + j * step] * out[base + j * step];
          for (std::size_t j = 0; j < s.n; ++j) {
            const std::size_t k = base + j * step;
            dx[k] = out[k] * (gv[k] - dot);
          }
        });
        return std::vector<Var>{constant(std::move(dx))};
      },
      /*second_order=*/false);
}

Var log_softmax(const Var& a, std::size_t axis) {
  const AxisSplit s = split_axis("log_softmax", a.shape(), axis);
  Tensor probs = softmax_values(a.value(), s);
  Tensor out = map_unary(probs, [](double p) { return std::log(p); });
  // Recompute from logits where probabilities underflow.
  const Tensor& x = a.value();
  for_each_lane(s, [&](std::size_t base, std::size_t step) {
    double mx = -INFINITY;
    for (std::size_t j = 0; j < s.n; ++j) mx = std::max(mx, x[base + j * step]);
    double z = 0.0;
    for (std::size_t j = 0; j < s.n; ++j) z += std::exp(x[base + j * step] - mx);
    const double lz = mx + std::log(z);
    for (std::size_t j = 0; j < s.n; ++j) out[base + j * step] = x[base + j * step] - lz;
  });
  return make_result(
      "log_softmax", {a}, std::move(out),
      [s, probs = std::move(probs)](const Var& g, const Var&) {
        Tensor dx(probs.shape());
        const Tensor& gv = g.value();
        for_each_lane(s, [&](std::size_t base, std::size_t step) {
          double total = 0.0;
          for (std::size_t j = 0; j < s.n; ++j) total += gv[base + j * step];
          for (std::size_t j = 0; j < s.n; ++j) {
            const std::size_t k = base + j * step;
            dx[k] = gv[k] - probs[k] * total;
          }
        });
        return std::vector<Var>{constant(std::move(dx))};
      },
      /*second_order=*/false);
}

Var l2norm(const Var& v, double eps) { return sqrt(add_scalar(sum(square(v)), eps)); }

Var l2norm_rows(const Var& v, double eps) {
  if (v.shape().empty()) throw ShapeError("l2norm_rows: needs rank >= 1");
  const std::size_t rows = v.shape()[0];
  const std::size_t cols = rows == 0 ? 0 : v.size() / rows;
  Var flat = v.shape().size() == 2 ? v : reshape(v, Shape{rows, cols});
  return sqrt(add_scalar(sum_rows(square(flat)), eps));
}

Var mse(const Var& a, const Var& b) {
  require_same("mse", a, b);
  return mean(square(sub(a, b)));
}

Var smooth_l1(const Var& a, const Var& b) {
  require_same("smooth_l1", a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  const double n = static_cast<double>(x.size());
  double total = 0.0;
  Tensor slope(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    const double ad = std::abs(d);
    total += ad < 1.0 ? 0.5 * d * d : ad - 0.5;
    slope[i] = std::clamp(d, -1.0, 1.0) / n;
  }
  return make_result(
      "smooth_l1", {a, b}, Tensor::scalar(total / n),
      [slope = std::move(slope)](const Var& g, const Var&) {
        Tensor ga = slope;
        const double gs = g.item();
        for (double& v : ga.data()) v *= gs;
        Tensor gb = ga;
        for (double& v : gb.data()) v = -v;
        return std::vector<Var>{constant(std::move(ga)), constant(std::move(gb))};
      },
      /*second_order=*/false);
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t end) {
  require_rank("slice_cols", a, 2);
  const std::size_t rows = a.shape()[0], cols = a.shape()[1];
  if (begin > end || end > cols) {
    shape_fail("slice_cols", {a.shape()},
               "range [" + std::to_string(begin) + "," + std::to_string(end) + ")");
  }
  const std::size_t width = end - begin;
  std::vector<std::ptrdiff_t> index(rows * width);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      index[r * width + c] = static_cast<std::ptrdiff_t>(r * cols + begin + c);
    }
  }
  return gather(a, std::move(index), Shape{rows, width});
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = parts.front().shape().at(0);
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.shape().size() != 2 || p.shape()[0] != rows) {
      shape_fail("concat_cols", {parts.front().shape(), p.shape()});
    }
    total += p.shape()[1];
  }
  Tensor out(Shape{rows, total});
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Var& p : parts) {
    const std::size_t w = p.shape()[1];
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < w; ++c) out[r * total + off + c] = p.value()[r * w + c];
    }
    offsets.push_back(off);
    off += w;
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  std::vector<std::size_t> widths;
  for (const Var& p : parts) widths.push_back(p.shape()[1]);
  return make_result("concat_cols", inputs, std::move(out),
                     [offsets, widths](const Var& g, const Var&) {
                       std::vector<Var> grads;
                       for (std::size_t i = 0; i < offsets.size(); ++i) {
                         grads.push_back(slice_cols(g, offsets[i], offsets[i] + widths[i]));
                       }
                       return grads;
                     });
}

Var slice_rows(const Var& a, std::size_t begin, std::size_t end) {
  if (a.shape().empty() || begin > end || end > a.shape()[0]) {
    shape_fail("slice_rows", {a.shape()},
               "range [" + std::to_string(begin) + "," + std::to_string(end) + ")");
  }
  const std::size_t row = a.size() / std::max<std::size_t>(a.shape()[0], 1);
  Shape out_shape = a.shape();
  out_shape[0] = end - begin;
  std::vector<std::ptrdiff_t> index((end - begin) * row);
  for (std::size_t i = 0; i < index.size(); ++i) {
    index[i] = static_cast<std::ptrdiff_t>(begin * row + i);
  }
  return gather(a, std::move(index), out_shape);
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const Shape& first = parts.front().shape();
  if (first.empty()) throw ShapeError("concat_rows: inputs need rank >= 1");
  std::size_t rows = 0;
  for (const Var& p : parts) {
    if (p.shape().size() != first.size() ||
        !std::equal(first.begin() + 1, first.end(), p.shape().begin() + 1)) {
      shape_fail("concat_rows", {first, p.shape()});
    }
    rows += p.shape()[0];
  }
  Shape out_shape = first;
  out_shape[0] = rows;
  Tensor out(out_shape);
  std::vector<std::size_t> bounds;
  std::size_t off = 0, row_off = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data().begin(), p.value().data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(off));
    off += p.size();
    bounds.push_back(row_off);
    row_off += p.shape()[0];
  }
  bounds.push_back(row_off);
  std::vector<Var> inputs(parts.begin(), parts.end());
  return make_result("concat_rows", inputs, std::move(out), [bounds](const Var& g, const Var&) {
    std::vector<Var> grads;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
      grads.push_back(slice_rows(g, bounds[i], bounds[i + 1]));
    }
    return grads;
  });
}

}  // namespace ls::ad
