#include "ls/surrogate/string_gen.hpp"

#include <stdexcept>

#include "ls/embed/charseq.hpp"
#include "ls/metrics/edit_distance.hpp"

namespace ls::surrogate {

const std::vector<std::string>& toy_corpus() {
  static const std::vector<std::string> words = {
    "a", "an", "and", "ant", "ants", "arc", "arcs", "are", "area", "art", "arts", "as", "at", "ate",
    "cad", "can", "cane", "canoe", "cans", "car", "card", "care", "cared", "cart", "case", "cast",
    "cat", "cats", "cedar", "cider", "cite", "cited", "cites", "coal", "coast", "coat", "coats",
    "cod", "code", "coder", "codes", "coil", "coin", "cold", "cole", "colt", "cone", "cord", "core",
    "corn", "cost", "cot", "creed", "crest", "cried", "dare", "dart", "darts", "data", "date",
    "dates", "deal", "dealt", "dear", "decor", "den", "dent", "dials", "diet", "dine", "diner",
    "dirt", "disc", "dose", "dot", "dots", "drone", "east", "eat", "edit", "editor", "elastic",
    "end", "ends", "era", "ear", "earn", "earns", "eats", "icon", "idea", "ideal", "ideas", "idle",
    "idol", "inert", "inlet", "insert", "into", "iron", "irons", "island", "isle", "lace", "laced",
    "laces", "lad", "laid", "lance", "land", "lane", "lard", "last", "late", "later", "lead",
    "lean", "lend", "lens", "lent", "lid", "lied", "lies", "line", "liner", "lines", "lint", "lion",
    "lions", "list", "listen", "lit", "load", "loan", "loans", "lode", "lone", "lord", "lore",
    "lose", "lost", "lot", "lots", "nail", "near", "neat", "nerd", "nest", "net", "nice", "nod",
    "node", "nose", "not", "note", "noted", "notes", "oar", "oat", "odd", "old", "olden", "once",
    "one", "onset", "oral", "orders", "ore", "rail", "rain", "raise", "ran", "rat", "rate", "rated",
    "rates", "read", "real", "rest", "rice", "ride", "rind", "riot", "rise", "road", "roast", "rod",
    "rode", "role", "rose", "rot", "sad", "sail", "saint", "salt", "sand", "sane", "sat", "scan",
    "scar", "scare", "scent", "sea", "seal", "seat", "sect", "send", "sent", "side", "silo", "sir",
    "sit", "site", "slate", "sled", "slid", "slot", "snare", "snore", "soar", "sod", "soda", "soil",
    "sold", "sole", "son", "sore", "sort", "stair", "star", "stare", "state", "steal", "steer",
    "stone", "store", "strand", "tar", "tea", "teal", "tear", "ten", "tend", "tenor", "test",
    "tide", "tie", "tied", "tile", "tin", "tire", "toad", "toast", "toe", "told", "tone", "toni",
    "tonic", "tore", "torn", "trace", "trade", "trail", "train", "trend", "triad", "trio", "tread",
  };
  return words;
}

void StringGenConfig::validate() const {
  if (corpus.empty()) throw std::invalid_argument("string generator: empty corpus");
  if (max_edits == 0 || max_edits > max_length) {
    throw std::invalid_argument("string generator: need 0 < b <= L, got b=" +
                                std::to_string(max_edits) + " L=" + std::to_string(max_length));
  }
  for (const auto& word : corpus) metrics::validate_text(word, alphabet, max_length);
}

std::string apply_edit(const std::string& text, EditOp op, std::size_t pos, char symbol) {
  std::string out = text;
  switch (op) {
    case EditOp::kInsert:
      if (pos > out.size()) throw std::out_of_range("apply_edit: insert position past end");
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), symbol);
      break;
    case EditOp::kDelete:
      if (pos >= out.size()) throw std::out_of_range("apply_edit: delete position past end");
      out.erase(pos, 1);
      break;
    case EditOp::kSubstitute:
      if (pos >= out.size()) throw std::out_of_range("apply_edit: substitute position past end");
      out[pos] = symbol;
      break;
  }
  return out;
}

StringPair gen_string_pair(const StringGenConfig& config, std::mt19937_64& rng) {
  const auto& letters = config.alphabet.letters();
  std::uniform_int_distribution<std::size_t> pick_d(0, config.max_edits);
  std::uniform_int_distribution<std::size_t> pick_word(0, config.corpus.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_letter(0, letters.size() - 1);

  StringPair pair;
  pair.requested_edits = pick_d(rng);
  pair.y = config.corpus[pick_word(rng)];
  pair.z = pair.y;
  for (std::size_t k = 0; k < pair.requested_edits; ++k) {
    std::vector<EditOp> allowed;
    if (pair.z.size() < config.max_length) allowed.push_back(EditOp::kInsert);
    if (!pair.z.empty()) {
      allowed.push_back(EditOp::kDelete);
      if (letters.size() > 1) allowed.push_back(EditOp::kSubstitute);
    }
    const EditOp op = allowed[std::uniform_int_distribution<std::size_t>(0, allowed.size() - 1)(rng)];
    const std::size_t span = op == EditOp::kInsert ? pair.z.size() : pair.z.size() - 1;
    const std::size_t pos = std::uniform_int_distribution<std::size_t>(0, span)(rng);
    char symbol = letters[pick_letter(rng)];
    if (op == EditOp::kSubstitute) {
      while (symbol == pair.z[pos]) symbol = letters[pick_letter(rng)];
    }
    pair.z = apply_edit(pair.z, op, pos, symbol);
  }
  pair.e = metrics::edit_distance(pair.z, pair.y);
  return pair;
}

StringPairGenerator::StringPairGenerator(StringGenConfig config)
    : config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
}

PairBatch StringPairGenerator::next(std::size_t batch_size) {
  ++calls_;
  std::vector<std::string> zs, ys;
  PairBatch batch;
  for (std::size_t i = 0; i < batch_size; ++i) {
    StringPair p = gen_string_pair(config_, rng_);
    zs.push_back(std::move(p.z));
    ys.push_back(std::move(p.y));
    batch.e.push_back(static_cast<double>(p.e));
  }
  batch.z = embed::encode_batch(zs, config_.alphabet, config_.max_length);
  batch.y = embed::encode_batch(ys, config_.alphabet, config_.max_length);
  return batch;
}

}  // namespace ls::surrogate
