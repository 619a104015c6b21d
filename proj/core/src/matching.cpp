#include "floweval/matching.hpp"

#include <algorithm>
#include <numeric>

namespace floweval::matching {

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() > b.size()) std::swap(a, b);  // keep the row short
  if (a.empty()) return b.size();
  std::vector<std::size_t> row(a.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t j = 1; j <= b.size(); ++j) {
    std::size_t diagonal = row[0];
    row[0] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
      std::size_t substitute = diagonal + (a[i - 1] == b[j - 1] ? 0 : 1);
      diagonal = row[i];
      row[i] = std::min({row[i] + 1, row[i - 1] + 1, substitute});
    }
  }
  return row[a.size()];
}

double similarity(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t longest = std::max(a.size(), b.size());
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

MatchResult intersect(const std::vector<std::string>& left,
                      const std::vector<std::string>& right, double threshold) {
  std::vector<Match> candidates;
  for (std::size_t i = 0; i < left.size(); ++i) {
    for (std::size_t j = 0; j < right.size(); ++j) {
      // A pair needs sim >= threshold, which bounds how far the lengths may
      // drift; skipping the DP for hopeless pairs keeps large sets cheap.
      std::size_t longest = std::max(left[i].size(), right[j].size());
      std::size_t shortest = std::min(left[i].size(), right[j].size());
      if (longest > 0 &&
          static_cast<double>(longest - shortest) > (1.0 - threshold) * static_cast<double>(longest))
        continue;
      double sim = similarity(left[i], right[j]);
      if (sim >= threshold) candidates.push_back({i, j, sim});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Match& a, const Match& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.left != b.left) return a.left < b.left;
    return a.right < b.right;
  });

  MatchResult result;
  std::vector<char> left_used(left.size(), 0), right_used(right.size(), 0);
  for (const Match& m : candidates) {
    if (left_used[m.left] || right_used[m.right]) continue;
    left_used[m.left] = 1;
    right_used[m.right] = 1;
    result.pairs.push_back(m);
  }
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const Match& a, const Match& b) { return a.left < b.left; });
  for (std::size_t i = 0; i < left.size(); ++i)
    if (!left_used[i]) result.unmatched_left.push_back(i);
  for (std::size_t j = 0; j < right.size(); ++j)
    if (!right_used[j]) result.unmatched_right.push_back(j);
  return result;
}

}  // namespace floweval::matching
