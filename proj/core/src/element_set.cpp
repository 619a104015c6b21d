#include "floweval/element_set.hpp"

#include "floweval/canonical.hpp"

namespace floweval {

namespace {

std::string edge_rendered(const mermaid::FlowchartGraph& graph, const mermaid::Edge& edge) {
  auto display = [&](const std::string& id) {
    const mermaid::Node* node = graph.find_node(id);
    return node ? node->label : id;
  };
  std::string out = display(edge.src_id);
  if (edge.label) {
    out += " -->|";
    out += *edge.label;
    out += "| ";
  } else {
    out += " --> ";
  }
  out += display(edge.dst_id);
  return out;
}

}  // namespace

std::vector<std::string> ElementSet::rendered() const {
  std::vector<std::string> out;
  out.reserve(elements.size());
  for (const Element& e : elements) out.push_back(e.rendered);
  return out;
}

std::vector<std::string> ElementSet::canonical() const {
  std::vector<std::string> out;
  out.reserve(elements.size());
  for (const Element& e : elements) out.push_back(e.canonical);
  return out;
}

ElementSet decompose(const mermaid::FlowchartGraph& graph) {
  ElementSet set;
  set.elements.reserve(graph.nodes.size() + graph.edges.size());
  for (const mermaid::Node& node : graph.nodes) {
    Element e;
    e.kind = ElementKind::node;
    e.rendered = node.label;
    e.canonical = canonicalize_label(e.rendered);
    set.node_labels.push_back(e.canonical);
    set.text_pool.push_back(e.canonical);
    set.text_pool_display.push_back(node.label);
    set.elements.push_back(std::move(e));
  }
  for (const mermaid::Edge& edge : graph.edges) {
    Element e;
    e.kind = ElementKind::edge;
    e.rendered = edge_rendered(graph, edge);
    e.canonical = canonicalize_label(e.rendered);

    EdgeTriple triple;
    triple.src = canonicalize_label(graph.find_node(edge.src_id)
                                        ? graph.find_node(edge.src_id)->label
                                        : edge.src_id);
    triple.dst = canonicalize_label(graph.find_node(edge.dst_id)
                                        ? graph.find_node(edge.dst_id)->label
                                        : edge.dst_id);
    if (edge.label) {
      triple.label = canonicalize_label(*edge.label);
      set.text_pool.push_back(triple.label);
      set.text_pool_display.push_back(*edge.label);
    }
    set.edge_triples.push_back(std::move(triple));
    set.elements.push_back(std::move(e));
  }
  return set;
}

std::string_view to_string(ElementKind kind) {
  return kind == ElementKind::node ? "node" : "edge";
}

}  // namespace floweval
