#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "finite_diff.hpp"
#include "op_cases.hpp"
#include "ls/ad/graph.hpp"
#include "ls/ad/optim.hpp"
#include "ls/ad/params.hpp"

namespace ls::ad {
namespace {

using ls::testing::max_relative_error;
using ls::testing::numeric_gradient;
using ls::testing::op_cases;
using ls::testing::OpCase;
using ls::testing::project;
using ls::testing::random_off_kink;
using ls::testing::random_tensor;
using ls::testing::sample_inputs;

TEST(Forward, ElementwiseAdd) {
  Var r = add(constant(Tensor::vector({1, 2})), constant(Tensor::vector({3, 4})));
  EXPECT_EQ(forward(r).values(), (std::vector<double>{4, 6}));
}

TEST(Forward, IdentityMatmul) {
  std::mt19937_64 rng(1);
  Tensor eye(Shape{3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0;
  Tensor v = random_tensor(Shape{3, 1}, rng);
  EXPECT_EQ(forward(matmul(constant(eye), constant(v))).values(), v.values());
}

TEST(Forward, L2NormOfThreeFour) {
  EXPECT_NEAR(l2norm(constant(Tensor::vector({3, 4}))).item(), 5.0, 1e-12);
}

TEST(Forward, ShapeMismatchNamesOpAndShapes) {
  try {
    add(constant(Tensor::vector({1, 2})), constant(Tensor::vector({1, 2, 3})));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("add"), std::string::npos);
    EXPECT_NE(msg.find("[2]"), std::string::npos);
    EXPECT_NE(msg.find("[3]"), std::string::npos);
  }
  EXPECT_THROW(matmul(constant(Tensor(Shape{2, 3})), constant(Tensor(Shape{2, 3}))), ShapeError);
}

TEST(Ops, SoftmaxOfZeros) {
  Var s = softmax(constant(Tensor::vector({0, 0})), 0);
  EXPECT_DOUBLE_EQ(s.value()[0], 0.5);
  EXPECT_DOUBLE_EQ(s.value()[1], 0.5);
}

TEST(Ops, Conv1dSlidingSum) {
  Var x = constant(Tensor(Shape{1, 1, 3}, {1, 2, 3}));
  Var w = constant(Tensor(Shape{1, 1, 2}, {1, 1}));
  Var b = constant(Tensor(Shape{1}));
  Var y = conv1d(x, w, b, 1, 0);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 2}));
  EXPECT_EQ(y.value().values(), (std::vector<double>{3, 5}));
}

TEST(Ops, Conv1dStrideAndPadding) {
  Var x = constant(Tensor(Shape{1, 1, 4}, {1, 2, 3, 4}));
  Var w = constant(Tensor(Shape{1, 1, 3}, {1, 0, -1}));
  Var y = conv1d(x, w, constant(Tensor::vector({0.5})), 2, 1);
  // padded: 0 1 2 3 4 0 -> windows at 0, 2: (0-2)+.5, (2-4)+.5
  EXPECT_EQ(y.value().values(), (std::vector<double>{-1.5, -1.5}));
}

TEST(Ops, Conv1dRejectsOversizedKernel) {
  Var x = constant(Tensor(Shape{1, 1, 2}));
  Var w = constant(Tensor(Shape{1, 1, 5}));
  EXPECT_THROW(conv1d(x, w, constant(Tensor(Shape{1})), 1, 1), ShapeError);
  EXPECT_NO_THROW(conv1d(x, constant(Tensor(Shape{1, 1, 4})), constant(Tensor(Shape{1})), 1, 1));
}

TEST(Ops, Conv1dLayoutsAgree) {
  std::mt19937_64 rng(5);
  Tensor xcf = random_tensor(Shape{2, 3, 5}, rng);
  Tensor xcl(Shape{2, 5, 3});
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t l = 0; l < 5; ++l) xcl[(b * 5 + l) * 3 + c] = xcf[(b * 3 + c) * 5 + l];
  Var w = constant(random_tensor(Shape{4, 3, 3}, rng));
  Var bias = constant(random_tensor(Shape{4}, rng));
  Var a = conv1d(constant(xcf), w, bias, 1, 1, Layout::kChannelsFirst, Layout::kChannelsFirst);
  Var b = conv1d(constant(xcl), w, bias, 1, 1, Layout::kChannelsLast, Layout::kChannelsFirst);
  EXPECT_EQ(a.value(), b.value());
}

TEST(Ops, L2NormMatchesDirectFormula) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor v = random_tensor(Shape{7}, rng, -3, 3);
    double s = 0.0;
    for (double x : v.data()) s += x * x;
    EXPECT_NEAR(l2norm(constant(v), 1e-12).item(), std::sqrt(s + 1e-12), 1e-12);
  }
}

TEST(Backward, SumOfSquares) {
  ParamSet params;
  Var w = params.add("w", Tensor::vector({1, 2, 3}));
  params.zero_grad();
  params.backward(sum(square(w)));
  EXPECT_EQ(params.entries()[0].grad.values(), (std::vector<double>{2, 4, 6}));
}

TEST(Backward, SmoothedNormIsZeroGradAtOrigin) {
  Var w = leaf(Tensor::vector({0.3, -0.2}));
  Var c = constant(Tensor::vector({0.3, -0.2}));
  const Var targets[] = {w};
  Tensor g = grad(l2norm(sub(w, c)), targets).front().value();
  for (double v : g.data()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, NonScalarRootRejected) {
  Var w = leaf(Tensor::vector({1, 2}));
  const Var targets[] = {w};
  EXPECT_THROW(grad(square(w), targets), ShapeError);
}

TEST(Backward, DisconnectedParameterGetsZero) {
  ParamSet params;
  Var used = params.add("used", Tensor::vector({1, 2}));
  params.add("unused", Tensor::vector({5, 6, 7}));
  params.zero_grad();
  params.backward(sum(used));
  EXPECT_EQ(params.entries()[1].grad.values(), (std::vector<double>{0, 0, 0}));
}

// Random 3-layer affine + leaky-relu network with scalar output.
TEST(Backward, ThreeLayerNetworkMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  const std::size_t widths[] = {5, 7, 6, 1};
  ParamSet params;
  for (std::size_t l = 0; l < 3; ++l) {
    params.add("w" + std::to_string(l), random_tensor(Shape{widths[l + 1], widths[l]}, rng));
    params.add("b" + std::to_string(l), random_tensor(Shape{widths[l + 1]}, rng));
  }
  const Tensor input = random_tensor(Shape{4, 5}, rng);
  auto net = [&](const ParamSet& p) {
    Var h = constant(input);
    for (std::size_t l = 0; l < 3; ++l) {
      h = affine(h, p.get("w" + std::to_string(l)), p.get("b" + std::to_string(l)));
      if (l < 2) h = leaky_relu(h, 0.01);
    }
    return sum(h);
  };
  params.zero_grad();
  params.backward(net(params));
  for (auto& entry : params.entries()) {
    Tensor original = entry.var.value();
    auto f = [&](const Tensor& t) {
      entry.var.mutable_leaf_value() = t;
      NoGradGuard guard;
      return net(params).item();
    };
    Tensor numeric = numeric_gradient(f, original, 1e-6);
    entry.var.mutable_leaf_value() = original;
    EXPECT_LT(max_relative_error(entry.grad, numeric), 1e-5) << entry.name;
  }
}

TEST(GradGraph, SumOfSquaresGivesTwoZ) {
  Var z = leaf(Tensor::vector({1.5, -2.0, 0.25}));
  Var g = grad_graph(sum(square(z)), z);
  EXPECT_EQ(g.value().values(), (std::vector<double>{3.0, -4.0, 0.5}));
  EXPECT_TRUE(g.requires_grad());
}

TEST(GradGraph, SecondOrderThroughScalarProduct) {
  const double a_value = 1.75;
  Var a = leaf(Tensor::scalar(a_value));
  Var z = leaf(Tensor::vector({0.4}));
  Var root = sum(mul(expand(a, z.shape()), z));
  Var g = grad_graph(root, z);
  EXPECT_DOUBLE_EQ(g.value()[0], a_value);
  const Var targets[] = {a};
  Tensor d2 = grad(sum(square(g)), targets).front().value();
  EXPECT_DOUBLE_EQ(d2.item(), 2.0 * a_value);
}

TEST(GradGraph, SoftmaxOnPathIsUnsupported) {
  Var z = leaf(Tensor::vector({0.1, 0.2}));
  try {
    grad_graph(sum(square(softmax(z, 0))), z);
    FAIL() << "expected UnsupportedOpError";
  } catch (const UnsupportedOpError& e) {
    EXPECT_NE(std::string(e.what()).find("softmax"), std::string::npos);
  }
  // First-order use is fine.
  const Var targets[] = {z};
  EXPECT_NO_THROW(grad(sum(square(softmax(z, 0))), targets));
}

// Penalty (||d e/d z|| - 1)^2 for a 2-layer affine surrogate e = ||h(z) - h(y)||.
TEST(GradGraph, PenaltyGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(13);
  ParamSet phi;
  phi.add("w0", random_tensor(Shape{6, 4}, rng));
  phi.add("b0", random_tensor(Shape{6}, rng));
  phi.add("w1", random_tensor(Shape{3, 6}, rng));
  phi.add("b1", random_tensor(Shape{3}, rng));
  const Tensor zt = random_tensor(Shape{2, 4}, rng);
  const Tensor yt = random_tensor(Shape{2, 4}, rng);
  auto penalty_graph = [&](const ParamSet& p) {
    auto h = [&](const Var& x) {
      Var a = leaky_relu(affine(x, p.get("w0"), p.get("b0")), 0.01);
      return affine(a, p.get("w1"), p.get("b1"));
    };
    Var z = leaf(zt);
    Var e = l2norm_rows(sub(h(z), h(constant(yt))));
    Var g = grad_graph(sum(e), z);
    return mean(square(add_scalar(l2norm_rows(g), -1.0)));
  };
  phi.zero_grad();
  phi.backward(penalty_graph(phi));
  for (auto& entry : phi.entries()) {
    Tensor original = entry.var.value();
    auto f = [&](const Tensor& t) {
      entry.var.mutable_leaf_value() = t;
      return penalty_graph(phi).item();
    };
    Tensor numeric = numeric_gradient(f, original, 1e-6);
    entry.var.mutable_leaf_value() = original;
    EXPECT_LT(max_relative_error(entry.grad, numeric), 1e-4) << entry.name;
  }
}

TEST(OpProperties, FirstOrderMatchesFiniteDifferences) {
  std::mt19937_64 rng(2024);
  for (const OpCase& op : op_cases()) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Tensor> inputs = sample_inputs(op, rng);
      std::vector<Var> vars;
      for (const Tensor& t : inputs) vars.push_back(leaf(t));
      const Var out = op.apply(vars);
      const Tensor w = random_tensor(Shape{out.size()}, rng);
      const std::vector<Var> analytic = grad(project(out, w), vars);
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        auto f = [&](const Tensor& t) {
          std::vector<Var> probe;
          for (std::size_t j = 0; j < inputs.size(); ++j) probe.push_back(constant(j == k ? t : inputs[j]));
          return project(op.apply(probe), w).item();
        };
        const double err = max_relative_error(analytic[k].value(), numeric_gradient(f, inputs[k]));
        ASSERT_LT(err, 1e-5) << op.name << " input " << k << " trial " << trial;
      }
    }
  }
}

TEST(OpProperties, SecondOrderMatchesFiniteDifferencesOfFirstGradients) {
  std::mt19937_64 rng(4048);
  for (const OpCase& op : op_cases()) {
    if (!op.second_order) continue;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Tensor> inputs = sample_inputs(op, rng);
      std::vector<Var> vars;
      for (const Tensor& t : inputs) vars.push_back(leaf(t));
      const Var out = op.apply(vars);
      const Tensor w = random_tensor(Shape{out.size()}, rng);
      // Second-order quantity: s = <d f / d x0, w2> differentiated w.r.t. every input.
      const Tensor w2 = random_tensor(inputs[0].shape(), rng);
      const Var g0 = grad_graph(project(out, w), vars[0]);
      const Var s = sum(mul(g0, constant(w2)));
      const std::vector<Var> analytic = grad(s, vars);
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        auto f = [&](const Tensor& t) {
          std::vector<Var> probe;
          for (std::size_t j = 0; j < inputs.size(); ++j) probe.push_back(leaf(j == k ? t : inputs[j]));
          const Var targets[] = {probe[0]};
          const Var g = grad(project(op.apply(probe), w), targets).front();
          double acc = 0.0;
          for (std::size_t i = 0; i < w2.size(); ++i) acc += g.value()[i] * w2[i];
          return acc;
        };
        const double err = max_relative_error(analytic[k].value(), numeric_gradient(f, inputs[k]));
        ASSERT_LT(err, 1e-4) << op.name << " input " << k << " trial " << trial;
      }
    }
  }
}

TEST(OpProperties, Linearity) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    Var x = leaf(random_tensor(Shape{3, 4}, rng));
    Var w = constant(random_tensor(Shape{2, 4}, rng));
    const double a = 1.3, b = -0.4;
    Var f = sum(square(affine(x, w, constant(Tensor(Shape{2})))));
    Var g = sum(sigmoid(x));
    const Var targets[] = {x};
    Tensor lhs = grad(add(scale(f, a), scale(g, b)), targets).front().value();
    Tensor gf = grad(f, targets).front().value();
    Tensor gg = grad(g, targets).front().value();
    for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_NEAR(lhs[i], a * gf[i] + b * gg[i], 1e-12);
  }
}

TEST(OpProperties, DeterministicAcrossRepeats) {
  auto run = [] {
    std::mt19937_64 rng(321);
    ParamSet p;
    p.add("w", init_uniform_fan_in(Shape{3, 4, 3}, 12, rng));
    p.add("b", Tensor(Shape{3}));
    Var x = constant(random_tensor(Shape{2, 4, 6}, rng));
    Var y = conv1d(x, p.get("w"), p.get("b"), 1, 1);
    p.zero_grad();
    p.backward(sum(square(leaky_relu(y, 0.01))));
    return std::make_pair(y.value(), p.entries()[0].grad);
  };
  auto a = run();
  auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(ParamSetTest, ZeroGradAndChecksum) {
  std::mt19937_64 rng(3);
  ParamSet p;
  Var w = p.add("w", random_tensor(Shape{4}, rng));
  p.backward(sum(square(w)));
  EXPECT_GT(p.grad_norm(), 0.0);
  p.zero_grad();
  for (double g : p.entries()[0].grad.data()) EXPECT_EQ(g, 0.0);
  EXPECT_EQ(p.entries()[0].grad.shape(), w.shape());
  const auto before = p.checksum();
  Sgd sgd(0.0);
  p.backward(sum(square(w)));
  sgd.step(p);
  EXPECT_EQ(before, p.checksum());
  EXPECT_THROW(p.add("w", Tensor(Shape{1})), std::invalid_argument);
}

TEST(Optimizers, AdamAndSgdDescend) {
  for (OptimizerKind kind : {OptimizerKind::kSgd, OptimizerKind::kAdam}) {
    ParamSet p;
    Var w = p.add("w", Tensor::vector({2.0, -3.0}));
    auto opt = make_optimizer(kind, 0.1);
    double first = 0.0, last = 0.0;
    for (int i = 0; i < 50; ++i) {
      p.zero_grad();
      Var loss = sum(square(w));
      if (i == 0) first = loss.item();
      last = loss.item();
      p.backward(loss);
      opt->step(p);
    }
    EXPECT_LT(last, 0.1 * first) << to_string(kind);
  }
}

}  // namespace
}  // namespace ls::ad
