#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace floweval::matching {

/// Similarity at or above this counts as a match everywhere in the toolkit.
inline constexpr double kDefaultThreshold = 0.9;

/// Plain byte-level edit distance (insert, delete, substitute, unit cost).
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Normalized similarity: 1 - lev(a, b) / max(|a|, |b|).
/// Two empty strings are identical, so their similarity is 1.
double similarity(std::string_view a, std::string_view b);

struct Match {
  std::size_t left = 0;   // index into the left list
  std::size_t right = 0;  // index into the right list
  double similarity = 0.0;

  bool operator==(const Match&) const = default;
};

struct MatchResult {
  std::vector<Match> pairs;
  std::vector<std::size_t> unmatched_left;
  std::vector<std::size_t> unmatched_right;

  std::size_t size() const { return pairs.size(); }
};

/// Injective fuzzy intersection of two string multisets. Candidate pairs with
/// similarity >= threshold are taken greedily, best similarity first, ties
/// broken by left index then right index, so each element matches at most
/// once and the result is deterministic.
MatchResult intersect(const std::vector<std::string>& left,
                      const std::vector<std::string>& right,
                      double threshold = kDefaultThreshold);

}  // namespace floweval::matching
