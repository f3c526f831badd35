#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace ls::metrics {

/// Symbol set A. Index 0 is the padding/blank symbol; the remaining symbols
/// are the characters a Text may contain.
class Alphabet {
 public:
  /// `letters` must be non-empty, unique, and exclude `blank`.
  explicit Alphabet(std::string letters, char blank = '_');

  /// 11 letters plus blank: |A| = 12.
  static Alphabet toy();

  std::size_t size() const { return letters_.size() + 1; }
  char blank() const { return blank_; }
  const std::string& letters() const { return letters_; }

  /// Index in [1, size()) of a letter; throws for unknown symbols.
  std::size_t index_of(char c) const;
  /// Character for an index; index 0 maps to the blank.
  char symbol(std::size_t index) const;
  bool contains(char c) const { return letters_.find(c) != std::string::npos; }

 private:
  std::string letters_;
  char blank_;
};

/// Throws std::invalid_argument unless every symbol is in A and length <= L.
void validate_text(std::string_view text, const Alphabet& alphabet, std::size_t max_length);

}  // namespace ls::metrics
