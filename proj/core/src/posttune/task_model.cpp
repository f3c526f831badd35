#include "ls/posttune/task_model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ls::posttune {

using ad::Shape;
using ad::Tensor;
using ad::Var;

TaskKind parse_task(const std::string& name) {
  if (name == "ls_ed" || name == "LS_ED") return TaskKind::kEditDistance;
  if (name == "ls_iou" || name == "LS_IOU") return TaskKind::kIou;
  throw std::invalid_argument("unknown task '" + name + "' (expected ls_ed or ls_iou)");
}

std::string to_string(TaskKind task) {
  return task == TaskKind::kEditDistance ? "ls_ed" : "ls_iou";
}

nlohmann::json StringRecognizerConfig::to_json() const {
  return {{"alphabet_size", alphabet_size}, {"max_length", max_length}, {"channels", channels},
          {"kernel", kernel},               {"slope", slope}};
}

StringRecognizerConfig StringRecognizerConfig::from_json(const nlohmann::json& j) {
  StringRecognizerConfig c;
  c.alphabet_size = j.value("alphabet_size", c.alphabet_size);
  c.max_length = j.value("max_length", c.max_length);
  c.channels = j.value("channels", c.channels);
  c.kernel = j.value("kernel", c.kernel);
  c.slope = j.value("slope", c.slope);
  if (c.alphabet_size < 2 || c.max_length == 0 || c.channels == 0 || c.kernel % 2 == 0) {
    throw std::invalid_argument("string recognizer config: bad sizes (kernel must be odd)");
  }
  return c;
}

StringRecognizer::StringRecognizer(const StringRecognizerConfig& config, std::uint64_t seed)
    : config_(config) {
  std::mt19937_64 rng(seed);
  const std::size_t a = config_.alphabet_size, c = config_.channels, k = config_.kernel;
  params_.add("conv0.weight", ad::init_uniform_fan_in(Shape{c, a, k}, a * k, rng));
  params_.add("conv0.bias", Tensor(Shape{c}));
  params_.add("conv1.weight", ad::init_uniform_fan_in(Shape{c, c, k}, c * k, rng));
  params_.add("conv1.bias", Tensor(Shape{c}));
  const std::size_t flat = c * config_.max_length;
  params_.add("fc.weight", ad::init_uniform_fan_in(Shape{a * config_.max_length, flat}, flat, rng));
  params_.add("fc.bias", Tensor(Shape{a * config_.max_length}));
}

Var StringRecognizer::logits(const Var& x) const {
  const Shape& s = x.shape();
  if (s.size() != 3 || s[1] != config_.alphabet_size || s[2] != config_.max_length) {
    throw ad::ShapeError("string recognizer: expected [B, " + std::to_string(config_.alphabet_size) +
                         ", " + std::to_string(config_.max_length) + "], got " + ad::shape_str(s));
  }
  const std::size_t pad = config_.kernel / 2;
  Var h = ad::conv1d(x, params_.get("conv0.weight"), params_.get("conv0.bias"), 1, pad,
                     ad::Layout::kChannelsFirst, ad::Layout::kChannelsLast);
  h = ad::leaky_relu(h, config_.slope);
  h = ad::conv1d(h, params_.get("conv1.weight"), params_.get("conv1.bias"), 1, pad,
                 ad::Layout::kChannelsLast, ad::Layout::kChannelsLast);
  h = ad::leaky_relu(h, config_.slope);
  h = ad::reshape(h, Shape{s[0], config_.channels * config_.max_length});
  h = ad::affine(h, params_.get("fc.weight"), params_.get("fc.bias"));
  return ad::reshape(h, Shape{s[0], config_.alphabet_size, config_.max_length});
}

Var StringRecognizer::predict(const Var& x) const { return ad::softmax(logits(x), 1); }

Var StringRecognizer::proxy_loss(const Var& x, const Tensor& y) const {
  const Var logp = ad::log_softmax(logits(x), 1);
  if (logp.shape() != y.shape()) {
    throw ad::ShapeError("string recognizer proxy loss: labels " + ad::shape_str(y.shape()) +
                         " vs predictions " + ad::shape_str(logp.shape()));
  }
  const double positions = static_cast<double>(y.dim(0) * y.dim(2));
  return ad::scale(ad::sum(ad::mul(logp, ad::constant(y))), -1.0 / positions);
}

nlohmann::json StringRecognizer::architecture() const {
  return {{"kind", "string_recognizer"}, {"config", config_.to_json()}};
}

nlohmann::json BoxRegressorConfig::to_json() const {
  return {{"input_dim", input_dim},
          {"hidden", hidden},
          {"min_extent", min_extent},
          {"max_extent", max_extent}};
}

BoxRegressorConfig BoxRegressorConfig::from_json(const nlohmann::json& j) {
  BoxRegressorConfig c;
  c.input_dim = j.value("input_dim", c.input_dim);
  c.hidden = j.value("hidden", c.hidden);
  c.min_extent = j.value("min_extent", c.min_extent);
  c.max_extent = j.value("max_extent", c.max_extent);
  if (c.input_dim == 0 || c.hidden == 0 || !(c.min_extent > 0.0) || !(c.min_extent < c.max_extent)) {
    throw std::invalid_argument("box regressor config: bad sizes or extent bounds");
  }
  return c;
}

BoxRegressor::BoxRegressor(const BoxRegressorConfig& config, std::uint64_t seed) : config_(config) {
  std::mt19937_64 rng(seed);
  const std::size_t widths[] = {config_.hidden, config_.hidden, 6};
  std::size_t in = config_.input_dim;
  for (std::size_t l = 0; l < 3; ++l) {
    const std::string id = std::to_string(l);
    params_.add("fc" + id + ".weight", ad::init_uniform_fan_in(Shape{widths[l], in}, in, rng));
    params_.add("fc" + id + ".bias", Tensor(Shape{widths[l]}));
    in = widths[l];
  }
}

Var BoxRegressor::raw(const Var& x) const {
  if (x.shape().size() != 2 || x.shape()[1] != config_.input_dim) {
    throw ad::ShapeError("box regressor: expected [B, " + std::to_string(config_.input_dim) +
                         "], got " + ad::shape_str(x.shape()));
  }
  Var h = ad::relu(ad::affine(x, params_.get("fc0.weight"), params_.get("fc0.bias")));
  h = ad::relu(ad::affine(h, params_.get("fc1.weight"), params_.get("fc1.bias")));
  return ad::affine(h, params_.get("fc2.weight"), params_.get("fc2.bias"));
}

Var box_output_transform(const Var& raw, double min_extent, double max_extent) {
  const Var center = ad::sigmoid(ad::slice_cols(raw, 0, 2));
  const double lo = std::log(min_extent), hi = std::log(max_extent);
  const Var extent = ad::exp(ad::add_scalar(ad::scale(ad::sigmoid(ad::slice_cols(raw, 2, 4)), hi - lo), lo));
  const Var rot = ad::slice_cols(raw, 4, 6);
  const Var norm = ad::repeat_cols(ad::l2norm_rows(rot, 1e-12), 2);
  const Var parts[] = {center, extent, ad::div(rot, norm)};
  return ad::concat_cols(parts);
}

Var BoxRegressor::predict(const Var& x) const {
  return box_output_transform(raw(x), config_.min_extent, config_.max_extent);
}

Var BoxRegressor::proxy_loss(const Var& x, const Tensor& y) const {
  return ad::smooth_l1(predict(x), ad::constant(y));
}

nlohmann::json BoxRegressor::architecture() const {
  return {{"kind", "box_regressor"}, {"config", config_.to_json()}};
}

std::unique_ptr<TaskModel> make_task_model(const nlohmann::json& architecture, std::uint64_t seed) {
  const std::string kind = architecture.at("kind").get<std::string>();
  const nlohmann::json& cfg = architecture.at("config");
  if (kind == "string_recognizer") {
    return std::make_unique<StringRecognizer>(StringRecognizerConfig::from_json(cfg), seed);
  }
  if (kind == "box_regressor") {
    return std::make_unique<BoxRegressor>(BoxRegressorConfig::from_json(cfg), seed);
  }
  throw std::invalid_argument("unknown task model kind '" + kind + "'");
}

}  // namespace ls::posttune
