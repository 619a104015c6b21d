#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace floweval::mermaid {

enum class Direction { td, tb, lr, rl, bt };

enum class NodeShape {
  rectangle,         // A["x"]
  rounded,           // A("x")
  stadium,           // A(["x"])
  diamond,           // A{"x"}
  parallelogram,     // A[/"x"/]
  parallelogram_alt, // A[\"x"\]
  circle,            // A(("x"))
  subroutine,        // A[["x"]]
  unknown            // any other bracket pair
};

enum class EdgeStyle { arrow, open, dotted, thick };

enum class ParseMode { strict, lenient };

struct Node {
  std::string id;
  std::string label;  // display form; equals id when no bracket label was given
  NodeShape shape = NodeShape::unknown;
  bool implicit = false;  // auto-registered because an edge referenced it

  bool operator==(const Node&) const = default;
};

struct Edge {
  std::string src_id;
  std::string dst_id;
  std::optional<std::string> label;  // display form
  EdgeStyle style = EdgeStyle::arrow;

  bool operator==(const Edge&) const = default;
};

struct ParseWarning {
  int line = 0;
  std::string message;
};

struct FlowchartGraph {
  Direction direction = Direction::td;
  std::vector<Node> nodes;  // first-appearance order
  std::vector<Edge> edges;  // source order
  std::vector<ParseWarning> warnings;

  const Node* find_node(std::string_view id) const;

  // Structural identity: direction, nodes and edges; warnings are advisory
  // and intentionally excluded.
  bool same_structure(const FlowchartGraph& other) const;
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind { empty_input, no_flowchart_header, syntax };

  ParseError(Kind kind, int line, const std::string& reason);

  Kind kind() const { return kind_; }
  int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

// Parses a practical subset of Mermaid flowchart syntax. Code fences and
// surrounding prose are stripped first. Lenient mode turns anything it does
// not understand into warnings and never throws on text input; strict mode
// throws ParseError. Chained edges (A --> B --> C) expand pairwise.
FlowchartGraph parse_mermaid(std::string_view source, ParseMode mode = ParseMode::lenient);

// Canonical text form. parse(render(parse(x))) has the same structure as
// parse(x); shapes outside the supported set come back as rectangles, so the
// composition is idempotent rather than the identity.
std::string render_mermaid(const FlowchartGraph& graph);

// {direction, nodes:[{id,label,shape,implicit}], edges:[{src,dst,label,style}],
//  warnings:[...]}; indent < 0 produces a single line.
std::string graph_to_json(const FlowchartGraph& graph, int indent = 2);

std::string_view to_string(Direction d);
std::string_view to_string(NodeShape s);
std::string_view to_string(EdgeStyle s);

}  // namespace floweval::mermaid
