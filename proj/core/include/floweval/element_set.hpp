#pragma once

#include "floweval/mermaid.hpp"

#include <string>
#include <vector>

namespace floweval {

enum class ElementKind { node, edge };

/// Canonical (src, label, dst) view of an edge; label is empty when the edge
/// is unlabeled.
struct EdgeTriple {
  std::string src;
  std::string label;
  std::string dst;

  bool operator==(const EdgeTriple&) const = default;
};

/// One atomic unit of chart content. `rendered` is the human-readable form a
/// verifier is asked about ("Load data" or "Start --> Load data"); `canonical`
/// is canonicalize_label(rendered) and is what matching operates on.
struct Element {
  ElementKind kind = ElementKind::node;
  std::string rendered;
  std::string canonical;

  bool operator==(const Element&) const = default;
};

/// Flat decomposition of a flowchart, order-preserving and duplicate-keeping.
/// Multiplicity matters: two nodes that share a label contribute two entries,
/// and matching consumes them injectively.
struct ElementSet {
  std::vector<Element> elements;

  /// Canonical node labels, one per node, in declaration order.
  std::vector<std::string> node_labels;

  /// Canonical edge triples, one per edge, in declaration order.
  std::vector<EdgeTriple> edge_triples;

  /// Every text run visible on the chart: node labels then edge labels.
  /// `text_pool` is canonical, `text_pool_display` the matching display form.
  std::vector<std::string> text_pool;
  std::vector<std::string> text_pool_display;

  std::size_t size() const { return elements.size(); }
  bool empty() const { return elements.empty(); }

  std::vector<std::string> rendered() const;
  std::vector<std::string> canonical() const;
};

/// Breaks a parsed graph into its element set. Implicit nodes (ids that only
/// ever appear at the end of an arrow) count as elements too, with the id
/// standing in for the label.
ElementSet decompose(const mermaid::FlowchartGraph& graph);

std::string_view to_string(ElementKind kind);

}  // namespace floweval
