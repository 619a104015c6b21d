#pragma once

#include <floweval/element_set.hpp>
#include <floweval/matching.hpp>
#include <floweval/mermaid.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace fixtures {

/// Synthetic flowchart with analytically known element content. Labels are
/// built from a pool of unique words so that any two distinct strings in the
/// chart (and in charts derived from it) sit far below the fuzzy-match
/// threshold; `check_separation` enforces that invariant and derivation
/// helpers call it. That turns fuzzy multiset intersection into exact set
/// intersection, which is what makes expected metric values computable in
/// closed form.
struct Chart {
  struct NodeSpec {
    std::string id;
    std::string label;
    std::size_t shape = 0;
  };
  struct EdgeSpec {
    std::size_t src = 0;
    std::size_t dst = 0;
    std::string label;  // empty = unlabeled
  };

  std::string source;
  floweval::mermaid::FlowchartGraph graph;
  floweval::ElementSet elements;

  std::vector<NodeSpec> nodes;
  std::vector<EdgeSpec> edges;
  std::vector<std::size_t> word_order;  // exhausted front to back
  std::size_t words_used = 0;
};

/// Builds a chart with exactly `target_elements` elements (nodes + edges),
/// valid for targets in [5, 60]. Deterministic in `seed`.
Chart make_chart(std::uint64_t seed, std::size_t target_elements);

/// Copy of `gt` with `k` nodes (and their incident edges) removed; the pick
/// is deterministic in `seed`. Requires k <= nodes - 2.
Chart delete_nodes(const Chart& gt, std::size_t k, std::uint64_t seed);

/// Copy of `gt` with `k` extra isolated nodes whose labels are fresh words,
/// so each fabricated element is far from all ground truth.
Chart fabricate_elements(const Chart& gt, std::size_t k);

/// Verifies that within the union of the given sets, canonical element
/// strings (and, separately, text-pool strings) are pairwise either equal or
/// below the similarity threshold. Throws std::logic_error on violation.
void check_separation(const std::vector<const floweval::ElementSet*>& sets,
                      double threshold = floweval::matching::kDefaultThreshold);

}  // namespace fixtures
