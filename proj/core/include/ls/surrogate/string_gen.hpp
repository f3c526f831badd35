#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ls/metrics/text.hpp"
#include "ls/surrogate/pair_batch.hpp"

namespace ls::surrogate {

/// Short English words spelled with the toy alphabet's letters.
const std::vector<std::string>& toy_corpus();

struct StringGenConfig {
  std::vector<std::string> corpus = toy_corpus();
  /// Largest number of random edits applied to a word (b).
  std::size_t max_edits = 4;
  metrics::Alphabet alphabet = metrics::Alphabet::toy();
  std::size_t max_length = 8;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class EditOp { kInsert, kDelete, kSubstitute };

/// Applies one unit edit. Insert places `symbol` before `pos` (pos <= size);
/// delete removes `pos`; substitute overwrites `pos` with `symbol`.
std::string apply_edit(const std::string& text, EditOp op, std::size_t pos, char symbol);

struct StringPair {
  std::string z;
  std::string y;
  std::size_t requested_edits = 0;
  /// edit_distance(z, y); at most requested_edits since edits may cancel.
  std::size_t e = 0;
};

/// Draws d uniformly from {0..b}, a corpus word y, and applies d random edits.
/// Substitutions always change the symbol; inserts never exceed max_length.
StringPair gen_string_pair(const StringGenConfig& config, std::mt19937_64& rng);

/// Batched one-hot pairs from gen_string_pair, with a call counter.
class StringPairGenerator {
 public:
  explicit StringPairGenerator(StringGenConfig config);

  PairBatch next(std::size_t batch_size);
  std::size_t calls() const { return calls_; }
  const StringGenConfig& config() const { return config_; }

 private:
  StringGenConfig config_;
  std::mt19937_64 rng_;
  std::size_t calls_ = 0;
};

}  // namespace ls::surrogate
