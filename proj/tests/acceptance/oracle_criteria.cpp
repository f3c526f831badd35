#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "criteria.hpp"
#include "finite_diff.hpp"
#include "op_cases.hpp"
#include "oracles.hpp"
#include "ls/embed/embedding.hpp"
#include "ls/metrics/edit_distance.hpp"
#include "ls/metrics/geometry.hpp"
#include "ls/surrogate/box_pool.hpp"
#include "ls/surrogate/string_gen.hpp"
#include "ls/surrogate/trainer.hpp"

namespace ls::acceptance {

namespace {

using ad::Shape;
using ad::Tensor;
using ad::Var;
using testing::max_relative_error;
using testing::numeric_gradient;
using testing::random_tensor;

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// Worst first-order error over one random 3-layer affine + leaky-relu network,
// checked for every parameter and the input.
double random_mlp_first_order(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> width(2, 7);
  const std::size_t widths[] = {width(rng), width(rng), width(rng), 1};
  ad::ParamSet params;
  for (std::size_t l = 0; l < 3; ++l) {
    params.add("w" + std::to_string(l), random_tensor(Shape{widths[l + 1], widths[l]}, rng));
    params.add("b" + std::to_string(l), random_tensor(Shape{widths[l + 1]}, rng));
  }
  params.add("x", testing::random_off_kink(Shape{3, widths[0]}, rng));
  auto net = [&] {
    Var h = params.get("x");
    for (std::size_t l = 0; l < 3; ++l) {
      h = ad::affine(h, params.get("w" + std::to_string(l)), params.get("b" + std::to_string(l)));
      if (l < 2) h = ad::leaky_relu(h, 0.01);
    }
    return ad::sum(h);
  };
  params.zero_grad();
  params.backward(net());
  double worst = 0.0;
  for (auto& entry : params.entries()) {
    const Tensor original = entry.var.value();
    auto f = [&](const Tensor& t) {
      entry.var.mutable_leaf_value() = t;
      ad::NoGradGuard guard;
      return net().item();
    };
    const Tensor numeric = numeric_gradient(f, original);
    entry.var.mutable_leaf_value() = original;
    worst = std::max(worst, max_relative_error(entry.grad, numeric));
  }
  return worst;
}

// Worst error of dP/dPhi for the gradient penalty of a random 2-layer affine surrogate.
double random_penalty_second_order(std::mt19937_64& rng) {
  ad::ParamSet phi;
  phi.add("w0", random_tensor(Shape{6, 4}, rng));
  phi.add("b0", random_tensor(Shape{6}, rng));
  phi.add("w1", random_tensor(Shape{3, 6}, rng));
  phi.add("b1", random_tensor(Shape{3}, rng));
  const Tensor zt = random_tensor(Shape{2, 4}, rng);
  const Tensor yt = random_tensor(Shape{2, 4}, rng);
  auto penalty = [&] {
    auto h = [&](const Var& x) {
      return ad::affine(ad::sigmoid(ad::affine(x, phi.get("w0"), phi.get("b0"))), phi.get("w1"), phi.get("b1"));
    };
    const Var z = ad::leaf(zt);
    const Var g = ad::grad_graph(ad::sum(ad::l2norm_rows(ad::sub(h(z), h(ad::constant(yt))))), z);
    return ad::mean(ad::square(ad::add_scalar(ad::l2norm_rows(g), -1.0)));
  };
  phi.zero_grad();
  phi.backward(penalty());
  double worst = 0.0;
  for (auto& entry : phi.entries()) {
    const Tensor original = entry.var.value();
    auto f = [&](const Tensor& t) {
      entry.var.mutable_leaf_value() = t;
      return penalty().item();
    };
    const Tensor numeric = numeric_gradient(f, original);
    entry.var.mutable_leaf_value() = original;
    worst = std::max(worst, max_relative_error(entry.grad, numeric));
  }
  return worst;
}

}  // namespace

Outcome autodiff_correctness(const Context&) {
  std::mt19937_64 rng(1);
  double first = 0.0, second = 0.0;
  std::size_t checks = 0;
  for (const auto& op : testing::op_cases()) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto inputs = testing::sample_inputs(op, rng);
      std::vector<Var> vars;
      for (const Tensor& t : inputs) vars.push_back(ad::leaf(t));
      const Var out = op.apply(vars);
      const Tensor w = random_tensor(Shape{out.size()}, rng);
      const auto analytic = ad::grad(testing::project(out, w), vars);
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        auto f = [&](const Tensor& t) {
          std::vector<Var> probe;
          for (std::size_t j = 0; j < inputs.size(); ++j) probe.push_back(ad::constant(j == k ? t : inputs[j]));
          return testing::project(op.apply(probe), w).item();
        };
        first = std::max(first, max_relative_error(analytic[k].value(), numeric_gradient(f, inputs[k])));
        ++checks;
      }
      if (!op.second_order) continue;
      const Tensor w2 = random_tensor(inputs[0].shape(), rng);
      const Var s = ad::sum(ad::mul(ad::grad_graph(testing::project(out, w), vars[0]), ad::constant(w2)));
      const auto hessian_vector = ad::grad(s, vars);
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        auto f = [&](const Tensor& t) {
          std::vector<Var> probe;
          for (std::size_t j = 0; j < inputs.size(); ++j) probe.push_back(ad::leaf(j == k ? t : inputs[j]));
          const Var targets[] = {probe[0]};
          const Tensor g = ad::grad(testing::project(op.apply(probe), w), targets).front().value();
          double acc = 0.0;
          for (std::size_t i = 0; i < w2.size(); ++i) acc += g[i] * w2[i];
          return acc;
        };
        second = std::max(second, max_relative_error(hessian_vector[k].value(), numeric_gradient(f, inputs[k])));
        ++checks;
      }
    }
  }
  for (int trial = 0; trial < 100; ++trial) {
    first = std::max(first, random_mlp_first_order(rng));
    second = std::max(second, random_penalty_second_order(rng));
    checks += 2;
  }
  return {first < 1e-5 && second < 1e-4,
          format("%zu checks; worst first-order rel. err %.2e (< 1e-5), second-order %.2e (< 1e-4)", checks, first,
                 second)};
}

Outcome edit_distance_oracle(const Context&) {
  const auto strings = testing::all_strings("abc", 5);
  std::size_t mismatches = 0;
  for (const auto& a : strings) {
    for (const auto& b : strings) {
      mismatches += metrics::edit_distance(a, b) != testing::brute_edit_distance(a, b);
    }
  }
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> pick(0, strings.size() - 1);
  std::size_t asymmetric = 0, triangle = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto& a = strings[pick(rng)];
    const auto& b = strings[pick(rng)];
    const auto& c = strings[pick(rng)];
    asymmetric += metrics::edit_distance(a, b) != metrics::edit_distance(b, a);
    triangle += metrics::edit_distance(a, c) > metrics::edit_distance(a, b) + metrics::edit_distance(b, c);
  }
  return {mismatches == 0 && asymmetric == 0 && triangle == 0,
          format("%zu pairs, %zu mismatches; symmetry violations %zu/1000, triangle violations %zu/1000",
                 strings.size() * strings.size(), mismatches, asymmetric, triangle)};
}

Outcome rotated_iou_oracle(const Context&) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> center(0.3, 0.7), extent(0.05, 0.4),
      angle(-std::numbers::pi, std::numbers::pi), shift(-0.1, 0.1);
  double mc_worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto a = metrics::RotatedBox::from_angle(center(rng), center(rng), extent(rng), extent(rng), angle(rng));
    // Overlapping partners keep the comparison informative.
    const auto b = metrics::RotatedBox::from_angle(a.cx + shift(rng), a.cy + shift(rng), extent(rng), extent(rng),
                                                   angle(rng));
    const double exact = metrics::rotated_iou(a, b);
    const double mc = metrics::mc_iou(a, b, 1'000'000, 1000 + static_cast<std::uint64_t>(i));
    mc_worst = std::max(mc_worst, std::abs(exact - mc));
  }
  double axis_worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const metrics::RotatedBox a{center(rng), center(rng), extent(rng), extent(rng), 1.0, 0.0};
    const metrics::RotatedBox b{a.cx + shift(rng), a.cy + shift(rng), extent(rng), extent(rng), 1.0, 0.0};
    axis_worst = std::max(axis_worst, std::abs(metrics::rotated_iou(a, b) - testing::axis_aligned_iou(a, b)));
  }
  const double r = std::numbers::sqrt2 / 2.0;
  const double diamond = metrics::rotated_iou({0.5, 0.5, 1, 1, 1, 0}, {0.5, 0.5, 1, 1, r, r});
  const bool pass = mc_worst < 2e-3 && axis_worst < 1e-9 && std::abs(diamond - 0.70711) <= 1e-5;
  return {pass, format("max |iou - mc_iou(1e6)| %.2e (< 2e-3); axis-aligned max err %.1e (< 1e-9); "
                       "45-degree square %.6f",
                       mc_worst, axis_worst, diamond)};
}

namespace {

struct PseudometricStats {
  double asymmetry = 0.0;     // max |e(a,b) - e(b,a)|
  double self_distance = 0.0;  // max e(a,a)
  std::size_t triangle_violations = 0;
};

PseudometricStats check_pseudometric(const embed::EmbeddingNet& net, const std::function<Tensor()>& sample) {
  ad::NoGradGuard guard;
  PseudometricStats stats;
  auto e = [&](const Tensor& x, const Tensor& y) {
    return embed::surrogate_value(net, ad::constant(x), ad::constant(y)).value();
  };
  for (int round = 0; round < 10; ++round) {
    const Tensor a = sample(), b = sample(), c = sample();
    const Tensor ab = e(a, b), ba = e(b, a), bc = e(b, c), ac = e(a, c), aa = e(a, a);
    for (std::size_t i = 0; i < ab.size(); ++i) {
      stats.asymmetry = std::max(stats.asymmetry, std::abs(ab[i] - ba[i]));
      stats.self_distance = std::max(stats.self_distance, aa[i]);
      stats.triangle_violations += ac[i] > ab[i] + bc[i] + 1e-12;
    }
  }
  return stats;
}

Tensor random_charseq_batch(std::mt19937_64& rng) {
  Tensor t = random_tensor(Shape{100, 12, 8}, rng, -3.0, 3.0);
  for (std::size_t b = 0; b < 100; ++b) {
    for (std::size_t pos = 0; pos < 8; ++pos) {
      double total = 0.0;
      for (std::size_t k = 0; k < 12; ++k) total += (t[(b * 12 + k) * 8 + pos] = std::exp(t[(b * 12 + k) * 8 + pos]));
      for (std::size_t k = 0; k < 12; ++k) t[(b * 12 + k) * 8 + pos] /= total;
    }
  }
  return t;
}

}  // namespace

Outcome pseudometric_properties(const Context&) {
  std::mt19937_64 rng(10);
  embed::CharCnnEmbedding text(embed::CharCnnConfig::toy(), 1);
  embed::BoxMlpEmbedding box(embed::BoxMlpConfig{}, 2);
  const auto label_config = surrogate::BoxLabelConfig{};
  auto text_sample = [&] { return random_charseq_batch(rng); };
  auto box_sample = [&] {
    std::vector<metrics::RotatedBox> boxes;
    for (int i = 0; i < 100; ++i) boxes.push_back(surrogate::random_label_box(label_config, rng));
    return surrogate::boxes_to_tensor(boxes);
  };

  std::vector<PseudometricStats> all;
  all.push_back(check_pseudometric(text, text_sample));
  all.push_back(check_pseudometric(box, box_sample));

  // Briefly trained copies.
  surrogate::StringPairGenerator strings(surrogate::StringGenConfig{});
  surrogate::SurrogateTrainConfig train;
  train.lr = 1e-3;
  train.mode = surrogate::DataSourceMode::kGlobal;
  const surrogate::BatchProducer none = [] { return surrogate::PairBatch{}; };
  surrogate::SurrogateTrainer(text, train).train(200, none, [&] { return strings.next(32); });
  surrogate::BoxGenConfig pool_config;
  pool_config.labels = surrogate::random_label_boxes(label_config);
  pool_config.pool_size = 10'000;
  surrogate::BoxPoolSampler pool(std::make_shared<surrogate::BoxPool>(surrogate::build_box_pool(pool_config)), 4);
  surrogate::SurrogateTrainer(box, train).train(500, none, [&] { return pool.next(32); });
  all.push_back(check_pseudometric(text, text_sample));
  all.push_back(check_pseudometric(box, box_sample));

  double asym = 0.0, self = 0.0;
  std::size_t violations = 0;
  for (const auto& s : all) {
    asym = std::max(asym, s.asymmetry);
    self = std::max(self, s.self_distance);
    violations += s.triangle_violations;
  }
  return {asym == 0.0 && self <= 1e-6 && violations == 0,
          format("untrained + trained char-cnn and box-mlp, 1000 triples each: max asymmetry %.1e, "
                 "max e(z,z) %.1e, triangle violations %zu",
                 asym, self, violations)};
}

}  // namespace ls::acceptance
