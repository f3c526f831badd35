#include "ls/posttune/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ls/embed/charseq.hpp"
#include "ls/surrogate/string_gen.hpp"

namespace ls::posttune {

using ad::Shape;
using ad::Tensor;
using metrics::RotatedBox;

ToySplit ToySplit::rows(std::span<const std::size_t> index) const {
  auto pick = [&](const Tensor& t) {
    Shape shape = t.shape();
    const std::size_t per = t.size() / shape[0];
    shape[0] = index.size();
    Tensor out(shape);
    for (std::size_t i = 0; i < index.size(); ++i) {
      const auto src = t.data().subspan(index[i] * per, per);
      std::copy(src.begin(), src.end(), out.data().begin() + i * per);
    }
    return out;
  };
  ToySplit out{pick(x), pick(y), {}, {}};
  for (std::size_t i : index) {
    if (!texts.empty()) out.texts.push_back(texts[i]);
    if (!boxes.empty()) out.boxes.push_back(boxes[i]);
  }
  return out;
}

void StringDatasetConfig::validate() const {
  if (train_size == 0 || test_size == 0) throw std::invalid_argument("string dataset: empty split");
  if (!(test_word_fraction > 0.0 && test_word_fraction < 1.0)) {
    throw std::invalid_argument("string dataset: test_word_fraction must be in (0, 1)");
  }
  if (!(swap_prob >= 0.0 && swap_prob <= 1.0) || !(noise >= 0.0)) {
    throw std::invalid_argument("string dataset: bad noise settings");
  }
}

namespace {

Tensor render(const std::string& word, const StringDatasetConfig& config, std::mt19937_64& rng) {
  const auto& letters = config.alphabet.letters();
  std::bernoulli_distribution swap(config.swap_prob);
  std::uniform_int_distribution<std::size_t> letter(0, letters.size() - 1);
  std::normal_distribution<double> noise(0.0, config.noise);
  std::string shown = word;
  for (char& c : shown) {
    if (!swap(rng)) continue;
    char other = letters[letter(rng)];
    while (other == c) other = letters[letter(rng)];
    c = other;
  }
  Tensor x = embed::encode_text(shown, config.alphabet, config.max_length);
  for (double& v : x.data()) v += noise(rng);
  return x;
}

ToySplit render_split(const std::vector<std::string>& words, std::size_t n,
                      const StringDatasetConfig& config, std::mt19937_64& rng) {
  const std::size_t a = config.alphabet.size(), l = config.max_length;
  ToySplit split{Tensor(Shape{n, a, l}), Tensor(Shape{n, a, l}), {}, {}};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& word = words[pick(rng)];
    const Tensor x = render(word, config, rng);
    const Tensor y = embed::encode_text(word, config.alphabet, l);
    std::copy(x.data().begin(), x.data().end(), split.x.data().begin() + i * a * l);
    std::copy(y.data().begin(), y.data().end(), split.y.data().begin() + i * a * l);
    split.texts.push_back(word);
  }
  return split;
}

}  // namespace

ToyDataset make_string_dataset(const StringDatasetConfig& config) {
  config.validate();
  std::vector<std::string> words = config.corpus.empty() ? surrogate::toy_corpus() : config.corpus;
  for (const auto& w : words) metrics::validate_text(w, config.alphabet, config.max_length);
  std::mt19937_64 rng(config.seed);
  ToyDataset ds;
  ds.task = TaskKind::kEditDistance;
  ds.alphabet = config.alphabet;
  ds.max_length = config.max_length;
  if (!config.disjoint_words) {
    ds.train = render_split(words, config.train_size, config, rng);
    ds.test = render_split(words, config.test_size, config, rng);
    std::sort(words.begin(), words.end());
    ds.train_words = std::move(words);
    return ds;
  }
  std::shuffle(words.begin(), words.end(), rng);
  const auto n_test = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::round(config.test_word_fraction * static_cast<double>(words.size()))));
  if (n_test >= words.size()) throw std::invalid_argument("string dataset: corpus too small to split");
  const std::vector<std::string> test_words(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::string> train_words(words.begin() + static_cast<std::ptrdiff_t>(n_test), words.end());
  ds.train = render_split(train_words, config.train_size, config, rng);
  ds.test = render_split(test_words, config.test_size, config, rng);
  std::sort(train_words.begin(), train_words.end());
  ds.train_words = std::move(train_words);
  return ds;
}

void BoxDatasetConfig::validate() const {
  labels.validate();
  if (train_size == 0 || test_size == 0) throw std::invalid_argument("box dataset: empty split");
  if (!(center_jitter >= 0.0) || !(log_size_jitter >= 0.0) || !(angle_jitter >= 0.0)) {
    throw std::invalid_argument("box dataset: jitter must be non-negative");
  }
}

RotatedBox canonical_half_turn(const RotatedBox& box) {
  RotatedBox out = box;
  // (cos, sin) and (-cos, -sin) describe the same rectangle.
  if (out.cos_t < 0.0 || (out.cos_t == 0.0 && out.sin_t < 0.0)) {
    out.cos_t = -out.cos_t;
    out.sin_t = -out.sin_t;
  }
  return out;
}

namespace {

ToySplit box_split(std::size_t n, const BoxDatasetConfig& config, std::mt19937_64& rng) {
  ToySplit split{Tensor(Shape{n, 6}), Tensor(Shape{n, 6}), {}, {}};
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const RotatedBox y = canonical_half_turn(surrogate::random_label_box(config.labels, rng));
    const double m = std::min(y.w, y.h);
    const RotatedBox jittered = canonical_half_turn(RotatedBox::from_angle(
        y.cx + config.center_jitter * m * gauss(rng), y.cy + config.center_jitter * m * gauss(rng),
        y.w * std::exp(config.log_size_jitter * gauss(rng)),
        y.h * std::exp(config.log_size_jitter * gauss(rng)), y.angle() + config.angle_jitter * gauss(rng)));
    const auto xp = jittered.params();
    const auto yp = y.params();
    std::copy(xp.begin(), xp.end(), split.x.data().begin() + 6 * i);
    std::copy(yp.begin(), yp.end(), split.y.data().begin() + 6 * i);
    split.boxes.push_back(y);
  }
  return split;
}

}  // namespace

ToyDataset make_box_dataset(const BoxDatasetConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  ToyDataset ds;
  ds.task = TaskKind::kIou;
  ds.train = box_split(config.train_size, config, rng);
  ds.test = box_split(config.test_size, config, rng);
  return ds;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t batch, std::mt19937_64& rng) {
  if (n == 0) throw std::invalid_argument("sample_indices: empty split");
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> out(batch);
  for (auto& i : out) i = pick(rng);
  return out;
}

}  // namespace ls::posttune
