#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ls/ad/tensor.hpp"
#include "ls/metrics/geometry.hpp"
#include "ls/metrics/text.hpp"
#include "ls/posttune/task_model.hpp"
#include "ls/surrogate/box_pool.hpp"

namespace ls::posttune {

/// Inputs and labels, row-aligned. Exactly one of texts/boxes is filled.
struct ToySplit {
  ad::Tensor x;  // [N, ...]
  ad::Tensor y;  // [N, ...] label representation (one-hot text or box params)
  std::vector<std::string> texts;
  std::vector<metrics::RotatedBox> boxes;

  std::size_t size() const { return x.rank() ? x.dim(0) : 0; }
  ToySplit rows(std::span<const std::size_t> index) const;
};

struct ToyDataset {
  TaskKind task = TaskKind::kEditDistance;
  ToySplit train;
  ToySplit test;
  metrics::Alphabet alphabet = metrics::Alphabet::toy();
  std::size_t max_length = 8;
  /// Words that may appear in the training split (LS-ED only).
  std::vector<std::string> train_words;
};

/// Noisy |A| x L renderings of corpus words. Each letter is replaced by a
/// random other letter with probability swap_prob, then Gaussian noise is
/// added to every entry. With disjoint_words the test split uses words never
/// seen in training; otherwise both splits share the vocabulary and differ in
/// their renderings.
struct StringDatasetConfig {
  std::vector<std::string> corpus;  // empty -> toy corpus
  metrics::Alphabet alphabet = metrics::Alphabet::toy();
  std::size_t max_length = 8;
  std::size_t train_size = 4000;
  std::size_t test_size = 1000;
  bool disjoint_words = false;
  double test_word_fraction = 0.2;
  double swap_prob = 0.15;
  double noise = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

ToyDataset make_string_dataset(const StringDatasetConfig& config);

/// Feature vectors are jittered copies of the clean label box, expressed with
/// the angle folded into a half turn.
struct BoxDatasetConfig {
  surrogate::BoxLabelConfig labels;
  std::size_t train_size = 4000;
  std::size_t test_size = 1000;
  double center_jitter = 0.15;  // std. dev. in units of min(w, h)
  double log_size_jitter = 0.15;
  double angle_jitter = 0.15;  // radians
  std::uint64_t seed = 0;

  void validate() const;
};

ToyDataset make_box_dataset(const BoxDatasetConfig& config);

/// Folds a box's angle into (-pi/2, pi/2]; the rectangle is unchanged.
metrics::RotatedBox canonical_half_turn(const metrics::RotatedBox& box);

/// Samples batch indices from a split.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t batch, std::mt19937_64& rng);

}  // namespace ls::posttune
