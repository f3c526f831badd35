#include "ls/metrics/text.hpp"

#include <stdexcept>

namespace ls::metrics {

Alphabet::Alphabet(std::string letters, char blank) : letters_(std::move(letters)), blank_(blank) {
  if (letters_.empty()) throw std::invalid_argument("alphabet: no letters");
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (letters_[i] == blank_) throw std::invalid_argument("alphabet: blank symbol among letters");
    if (letters_.find(letters_[i], i + 1) != std::string::npos) {
      throw std::invalid_argument(std::string("alphabet: duplicate letter '") + letters_[i] + "'");
    }
  }
}

Alphabet Alphabet::toy() { return Alphabet("acdeilnorst"); }

std::size_t Alphabet::index_of(char c) const {
  const auto pos = letters_.find(c);
  if (pos == std::string::npos) {
    throw std::invalid_argument(std::string("alphabet: symbol '") + c + "' not in alphabet");
  }
  return pos + 1;
}

char Alphabet::symbol(std::size_t index) const {
  if (index == 0) return blank_;
  if (index > letters_.size()) throw std::out_of_range("alphabet: index out of range");
  return letters_[index - 1];
}

void validate_text(std::string_view text, const Alphabet& alphabet, std::size_t max_length) {
  if (text.size() > max_length) {
    throw std::invalid_argument("text '" + std::string(text) + "' longer than max length " +
                                std::to_string(max_length));
  }
  for (char c : text) {
    if (!alphabet.contains(c)) {
      throw std::invalid_argument("text '" + std::string(text) + "' has symbol outside alphabet");
    }
  }
}

}  // namespace ls::metrics
