#include "ls/embed/embedding.hpp"

#include <random>
#include <stdexcept>

namespace ls::embed {

using ad::Shape;
using ad::Tensor;
using ad::Var;

void EmbeddingNet::check_input(const Var& batch) const {
  const Shape expected = sample_shape();
  const Shape& got = batch.shape();
  bool ok = got.size() == expected.size() + 1;
  for (std::size_t i = 0; ok && i < expected.size(); ++i) ok = got[i + 1] == expected[i];
  if (!ok) {
    throw ad::ShapeError(kind() + " embed: shape mismatch, expected [B]" + ad::shape_str(expected) +
                         " got " + ad::shape_str(got));
  }
}

CharCnnConfig CharCnnConfig::toy() {
  CharCnnConfig c;
  c.alphabet_size = 12;
  c.max_length = 8;
  c.channels = 32;
  c.hidden = 128;
  c.embed_dim = 128;
  return c;
}

nlohmann::json CharCnnConfig::to_json() const {
  return {{"alphabet_size", alphabet_size}, {"max_length", max_length},
          {"conv_layers", conv_layers},     {"channels", channels},
          {"kernel", kernel},               {"hidden", hidden},
          {"embed_dim", embed_dim},         {"slope", slope}};
}

CharCnnConfig CharCnnConfig::from_json(const nlohmann::json& j) {
  CharCnnConfig c;
  c.alphabet_size = j.value("alphabet_size", c.alphabet_size);
  c.max_length = j.value("max_length", c.max_length);
  c.conv_layers = j.value("conv_layers", c.conv_layers);
  c.channels = j.value("channels", c.channels);
  c.kernel = j.value("kernel", c.kernel);
  c.hidden = j.value("hidden", c.hidden);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.slope = j.value("slope", c.slope);
  if (c.alphabet_size == 0 || c.max_length == 0 || c.conv_layers == 0 || c.channels == 0 ||
      c.kernel == 0 || c.kernel % 2 == 0 || c.hidden == 0 || c.embed_dim == 0) {
    throw std::invalid_argument("char_cnn config: sizes must be positive and kernel odd");
  }
  return c;
}

CharCnnEmbedding::CharCnnEmbedding(const CharCnnConfig& config, std::uint64_t seed)
    : config_(config) {
  std::mt19937_64 rng(seed);
  std::size_t in = config_.alphabet_size;
  for (std::size_t l = 0; l < config_.conv_layers; ++l) {
    const std::string id = std::to_string(l);
    params_.add("conv" + id + ".weight",
                ad::init_uniform_fan_in(Shape{config_.channels, in, config_.kernel},
                                        in * config_.kernel, rng));
    params_.add("conv" + id + ".bias", Tensor(Shape{config_.channels}));
    in = config_.channels;
  }
  const std::size_t flat = config_.channels * config_.max_length;
  params_.add("fc0.weight", ad::init_uniform_fan_in(Shape{config_.hidden, flat}, flat, rng));
  params_.add("fc0.bias", Tensor(Shape{config_.hidden}));
  params_.add("fc1.weight",
              ad::init_uniform_fan_in(Shape{config_.embed_dim, config_.hidden}, config_.hidden, rng));
  params_.add("fc1.bias", Tensor(Shape{config_.embed_dim}));
}

Var CharCnnEmbedding::embed(const Var& batch) const {
  check_input(batch);
  const std::size_t pad = config_.kernel / 2;
  Var h = batch;
  auto layout = ad::Layout::kChannelsFirst;
  for (std::size_t l = 0; l < config_.conv_layers; ++l) {
    const std::string id = std::to_string(l);
    // Hidden activations stay channels-last, which the im2col product yields directly.
    h = ad::conv1d(h, params_.get("conv" + id + ".weight"), params_.get("conv" + id + ".bias"), 1,
                   pad, layout, ad::Layout::kChannelsLast);
    h = ad::leaky_relu(h, config_.slope);
    layout = ad::Layout::kChannelsLast;
  }
  const std::size_t rows = batch.shape()[0];
  h = ad::reshape(h, Shape{rows, config_.channels * config_.max_length});
  h = ad::leaky_relu(ad::affine(h, params_.get("fc0.weight"), params_.get("fc0.bias")),
                     config_.slope);
  return ad::affine(h, params_.get("fc1.weight"), params_.get("fc1.bias"));
}

nlohmann::json CharCnnEmbedding::architecture() const {
  return {{"kind", kind()}, {"config", config_.to_json()}};
}

nlohmann::json BoxMlpConfig::to_json() const {
  return {{"input_dim", input_dim}, {"hidden", hidden}, {"embed_dim", embed_dim}};
}

BoxMlpConfig BoxMlpConfig::from_json(const nlohmann::json& j) {
  BoxMlpConfig c;
  c.input_dim = j.value("input_dim", c.input_dim);
  c.hidden = j.value("hidden", c.hidden);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  if (c.input_dim == 0 || c.embed_dim == 0) {
    throw std::invalid_argument("box_mlp config: sizes must be positive");
  }
  for (std::size_t h : c.hidden) {
    if (h == 0) throw std::invalid_argument("box_mlp config: hidden widths must be positive");
  }
  return c;
}

BoxMlpEmbedding::BoxMlpEmbedding(const BoxMlpConfig& config, std::uint64_t seed)
    : config_(config) {
  std::mt19937_64 rng(seed);
  std::size_t in = config_.input_dim;
  std::vector<std::size_t> widths = config_.hidden;
  widths.push_back(config_.embed_dim);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    const std::string id = std::to_string(l);
    params_.add("fc" + id + ".weight", ad::init_uniform_fan_in(Shape{widths[l], in}, in, rng));
    params_.add("fc" + id + ".bias", Tensor(Shape{widths[l]}));
    in = widths[l];
  }
}

Var BoxMlpEmbedding::embed(const Var& batch) const {
  check_input(batch);
  Var h = batch;
  const std::size_t layers = config_.hidden.size() + 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string id = std::to_string(l);
    h = ad::affine(h, params_.get("fc" + id + ".weight"), params_.get("fc" + id + ".bias"));
    if (l + 1 < layers) h = ad::relu(h);
  }
  return h;
}

nlohmann::json BoxMlpEmbedding::architecture() const {
  return {{"kind", kind()}, {"config", config_.to_json()}};
}

std::unique_ptr<EmbeddingNet> make_embedding(const nlohmann::json& architecture,
                                             std::uint64_t seed) {
  const std::string kind = architecture.at("kind").get<std::string>();
  const nlohmann::json& cfg = architecture.at("config");
  if (kind == "char_cnn") {
    return std::make_unique<CharCnnEmbedding>(CharCnnConfig::from_json(cfg), seed);
  }
  if (kind == "box_mlp") {
    return std::make_unique<BoxMlpEmbedding>(BoxMlpConfig::from_json(cfg), seed);
  }
  throw std::invalid_argument("unknown embedding kind '" + kind + "'");
}

Var surrogate_value(const EmbeddingNet& net, const Var& z, const Var& y, double eps) {
  if (z.shape() != y.shape()) {
    throw ad::ShapeError("surrogate_value: shape mismatch " + ad::shape_str(z.shape()) + " vs " +
                         ad::shape_str(y.shape()));
  }
  // Separate passes keep h(z) independent of which argument slot z occupies,
  // so the distance is exactly symmetric.
  return ad::l2norm_rows(ad::sub(net.embed(z), net.embed(y)), eps);
}

}  // namespace ls::embed
