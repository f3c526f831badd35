#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string_view>
#include <vector>

namespace ls::metrics {

/// Levenshtein distance with unit insertion, deletion and substitution costs.
template <typename Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
  const std::size_t n = std::size(a), m = std::size(b);
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  return edit_distance<std::string_view>(a, b);
}

}  // namespace ls::metrics
