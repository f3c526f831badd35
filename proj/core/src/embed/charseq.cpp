#include "ls/embed/charseq.hpp"

#include <cmath>
#include <stdexcept>

namespace ls::embed {

ad::Tensor encode_text(std::string_view text, const metrics::Alphabet& alphabet,
                       std::size_t max_length) {
  metrics::validate_text(text, alphabet, max_length);
  ad::Tensor out(ad::Shape{alphabet.size(), max_length});
  for (std::size_t pos = 0; pos < max_length; ++pos) {
    const std::size_t symbol = pos < text.size() ? alphabet.index_of(text[pos]) : 0;
    out[symbol * max_length + pos] = 1.0;
  }
  return out;
}

ad::Tensor encode_batch(std::span<const std::string> texts, const metrics::Alphabet& alphabet,
                        std::size_t max_length) {
  const std::size_t per = alphabet.size() * max_length;
  ad::Tensor out(ad::Shape{texts.size(), alphabet.size(), max_length});
  for (std::size_t b = 0; b < texts.size(); ++b) {
    const ad::Tensor one = encode_text(texts[b], alphabet, max_length);
    std::copy(one.data().begin(), one.data().end(), out.data().begin() + b * per);
  }
  return out;
}

std::string decode_argmax(std::span<const double> columns, const metrics::Alphabet& alphabet,
                          std::size_t max_length) {
  if (columns.size() != alphabet.size() * max_length) {
    throw ad::ShapeError("decode_argmax: expected " + std::to_string(alphabet.size()) + "x" +
                         std::to_string(max_length) + " values, got " +
                         std::to_string(columns.size()));
  }
  std::string out;
  for (std::size_t pos = 0; pos < max_length; ++pos) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < alphabet.size(); ++s) {
      if (columns[s * max_length + pos] > columns[best * max_length + pos]) best = s;
    }
    if (best != 0) out.push_back(alphabet.symbol(best));
  }
  return out;
}

std::vector<std::string> decode_batch(const ad::Tensor& batch, const metrics::Alphabet& alphabet) {
  if (batch.rank() != 3 || batch.dim(1) != alphabet.size()) {
    throw ad::ShapeError("decode_batch: expected [B, " + std::to_string(alphabet.size()) +
                         ", L], got " + ad::shape_str(batch.shape()));
  }
  const std::size_t length = batch.dim(2);
  const std::size_t per = alphabet.size() * length;
  std::vector<std::string> out;
  out.reserve(batch.dim(0));
  for (std::size_t b = 0; b < batch.dim(0); ++b) {
    out.push_back(decode_argmax(batch.data().subspan(b * per, per), alphabet, length));
  }
  return out;
}

bool columns_are_distributions(std::span<const double> columns, std::size_t alphabet_size,
                               std::size_t max_length, double tol) {
  if (columns.size() != alphabet_size * max_length) return false;
  for (std::size_t pos = 0; pos < max_length; ++pos) {
    double s = 0.0;
    for (std::size_t a = 0; a < alphabet_size; ++a) {
      const double v = columns[a * max_length + pos];
      if (!(v >= 0.0)) return false;
      s += v;
    }
    if (std::abs(s - 1.0) > tol) return false;
  }
  return true;
}

}  // namespace ls::embed
