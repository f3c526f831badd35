#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <json.hpp>

#include "ls/ad/graph.hpp"
#include "ls/ad/params.hpp"

namespace ls::embed {

/// A learned map h from a prediction/label representation to R^d. Inputs are
/// batched along the leading axis: [B, sample_shape...] -> [B, d].
class EmbeddingNet {
 public:
  virtual ~EmbeddingNet() = default;

  virtual ad::Var embed(const ad::Var& batch) const = 0;
  virtual ad::Shape sample_shape() const = 0;
  virtual std::size_t output_dim() const = 0;
  virtual std::string kind() const = 0;
  virtual nlohmann::json architecture() const = 0;

  ad::ParamSet& params() { return params_; }
  const ad::ParamSet& params() const { return params_; }

 protected:
  void check_input(const ad::Var& batch) const;

  ad::ParamSet params_;
};

/// Character-level CNN over [B, |A|, L] per-position distributions: stacked
/// conv1d + leaky-relu, then two fully connected layers.
struct CharCnnConfig {
  std::size_t alphabet_size = 12;
  std::size_t max_length = 8;
  std::size_t conv_layers = 5;
  std::size_t channels = 128;
  std::size_t kernel = 3;
  std::size_t hidden = 1024;
  std::size_t embed_dim = 1024;
  double slope = 0.01;

  /// Desk-scale sizes used by tests and default experiments.
  static CharCnnConfig toy();
  nlohmann::json to_json() const;
  static CharCnnConfig from_json(const nlohmann::json& j);
};

class CharCnnEmbedding final : public EmbeddingNet {
 public:
  CharCnnEmbedding(const CharCnnConfig& config, std::uint64_t seed);

  ad::Var embed(const ad::Var& batch) const override;
  ad::Shape sample_shape() const override { return {config_.alphabet_size, config_.max_length}; }
  std::size_t output_dim() const override { return config_.embed_dim; }
  std::string kind() const override { return "char_cnn"; }
  nlohmann::json architecture() const override;
  const CharCnnConfig& config() const { return config_; }

 private:
  CharCnnConfig config_;
};

/// Fully connected ReLU network over 6-parameter rotated boxes.
struct BoxMlpConfig {
  std::size_t input_dim = 6;
  std::vector<std::size_t> hidden{64, 64, 64, 64};
  std::size_t embed_dim = 16;

  nlohmann::json to_json() const;
  static BoxMlpConfig from_json(const nlohmann::json& j);
};

class BoxMlpEmbedding final : public EmbeddingNet {
 public:
  BoxMlpEmbedding(const BoxMlpConfig& config, std::uint64_t seed);

  ad::Var embed(const ad::Var& batch) const override;
  ad::Shape sample_shape() const override { return {config_.input_dim}; }
  std::size_t output_dim() const override { return config_.embed_dim; }
  std::string kind() const override { return "box_mlp"; }
  nlohmann::json architecture() const override;
  const BoxMlpConfig& config() const { return config_; }

 private:
  BoxMlpConfig config_;
};

/// Rebuilds a network from `architecture()` output.
std::unique_ptr<EmbeddingNet> make_embedding(const nlohmann::json& architecture,
                                             std::uint64_t seed);

/// Smoothed Euclidean distance between embeddings, one value per batch row:
/// sqrt(|h(z) - h(y)|^2 + eps) -> [B].
ad::Var surrogate_value(const EmbeddingNet& net, const ad::Var& z, const ad::Var& y,
                        double eps = 1e-12);

}  // namespace ls::embed
