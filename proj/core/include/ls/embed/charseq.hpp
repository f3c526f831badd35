#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ls/ad/tensor.hpp"
#include "ls/metrics/text.hpp"

namespace ls::embed {

/// One-hot |A| x L encoding of a text. Positions past the end hold the blank.
ad::Tensor encode_text(std::string_view text, const metrics::Alphabet& alphabet,
                       std::size_t max_length);

/// Stacks encodings into [B, |A|, L].
ad::Tensor encode_batch(std::span<const std::string> texts, const metrics::Alphabet& alphabet,
                        std::size_t max_length);

/// Argmax per column of an |A| x L distribution; blank columns are dropped.
/// Ties resolve to the lowest index.
std::string decode_argmax(std::span<const double> columns, const metrics::Alphabet& alphabet,
                          std::size_t max_length);

/// Decodes every sample of a [B, |A|, L] tensor.
std::vector<std::string> decode_batch(const ad::Tensor& batch, const metrics::Alphabet& alphabet);

/// True when every column sums to 1 within `tol`.
bool columns_are_distributions(std::span<const double> columns, std::size_t alphabet_size,
                               std::size_t max_length, double tol = 1e-6);

}  // namespace ls::embed
