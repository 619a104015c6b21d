#include "floweval/mermaid.hpp"

#include "floweval/canonical.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>
#include <sstream>
#include <unordered_map>

namespace floweval::mermaid {

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_id_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool starts_with_word(std::string_view s, std::string_view word) {
  if (s.substr(0, word.size()) != word) return false;
  return s.size() == word.size() || !is_id_char(s[word.size()]);
}

struct SourceLine {
  int number = 0;  // 1-based line in the original input
  std::string text;
};

bool is_fence(std::string_view line) { return trim(line).substr(0, 3) == "```"; }

bool is_header(std::string_view line) {
  std::string_view t = trim(line);
  return starts_with_word(t, "flowchart") || starts_with_word(t, "graph");
}

// VLM output rarely arrives as bare Mermaid: it is wrapped in ``` fences or
// preceded by prose. Cut down to the most plausible chart region.
std::vector<SourceLine> select_chart_lines(std::string_view source,
                                           std::vector<ParseWarning>& warnings) {
  std::vector<SourceLine> lines;
  {
    int number = 1;
    std::size_t start = 0;
    while (start <= source.size()) {
      std::size_t end = source.find('\n', start);
      std::string_view line = end == std::string_view::npos
                                  ? source.substr(start)
                                  : source.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back({number++, std::string(line)});
      if (end == std::string_view::npos) break;
      start = end + 1;
    }
  }

  // Prefer the first fenced block that contains a flowchart header, then any
  // first fenced block, then the raw text.
  std::vector<std::pair<std::size_t, std::size_t>> blocks;  // [first, last) line index
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_fence(lines[i].text)) continue;
    std::size_t j = i + 1;
    while (j < lines.size() && !is_fence(lines[j].text)) ++j;
    blocks.emplace_back(i + 1, j);
    i = j;  // skip the closing fence
  }
  std::vector<SourceLine> selected;
  if (!blocks.empty()) {
    auto chart_block = std::find_if(blocks.begin(), blocks.end(), [&](auto b) {
      for (std::size_t k = b.first; k < b.second; ++k)
        if (is_header(lines[k].text)) return true;
      return false;
    });
    auto chosen = chart_block != blocks.end() ? *chart_block : blocks.front();
    selected.assign(lines.begin() + static_cast<std::ptrdiff_t>(chosen.first),
                    lines.begin() + static_cast<std::ptrdiff_t>(chosen.second));
  } else {
    selected = std::move(lines);
  }

  // Drop leading prose before the header, if there is a header at all.
  auto header_it = std::find_if(selected.begin(), selected.end(),
                                [](const SourceLine& l) { return is_header(l.text); });
  if (header_it != selected.end()) {
    bool dropped = std::any_of(selected.begin(), header_it, [](const SourceLine& l) {
      return !trim(l.text).empty();
    });
    if (dropped)
      warnings.push_back({selected.front().number, "ignored leading text before flowchart header"});
    selected.erase(selected.begin(), header_it);
  }
  return selected;
}

struct Connector {
  EdgeStyle style = EdgeStyle::arrow;
  std::optional<std::string> label;  // raw label text, not yet canonicalized
};

// Connector grammar, tried in order at a scan position. Inline-label forms
// (-- text -->) come before their plain spellings so the label is not eaten.
const std::array<std::pair<std::regex, EdgeStyle>, 8>& connector_patterns() {
  static const std::array<std::pair<std::regex, EdgeStyle>, 8> patterns = {{
      {std::regex(R"(^-\.\s+([^.]*?)\s+\.->)"), EdgeStyle::dotted},
      {std::regex(R"(^-\.+->)"), EdgeStyle::dotted},
      {std::regex(R"(^==\s+([^=]*?)\s+==>)"), EdgeStyle::thick},
      {std::regex(R"(^==+>)"), EdgeStyle::thick},
      // Inline labels must not contain "--", so the first run of dashes after
      // the text is the closer; this keeps chained edges from being swallowed.
      {std::regex(R"(^--\s+((?:[^-]|-(?!-))*?)\s+--+>)"), EdgeStyle::arrow},
      {std::regex(R"(^--\s+((?:[^-]|-(?!-))*?)\s+---+)"), EdgeStyle::open},
      {std::regex(R"(^--+>)"), EdgeStyle::arrow},
      {std::regex(R"(^---+)"), EdgeStyle::open},
  }};
  return patterns;
}

// Splits one statement into node segments joined by connectors, honoring
// quotes and bracket nesting so arrows inside labels do not split the line.
bool scan_segments(std::string_view stmt, std::vector<std::string>& segments,
                   std::vector<Connector>& connectors, std::string& error) {
  segments.clear();
  connectors.clear();
  std::string current;
  bool in_quote = false;
  int depth = 0;
  std::size_t i = 0;
  const std::string text(stmt);
  while (i < text.size()) {
    char c = text[i];
    if (in_quote) {
      current.push_back(c);
      if (c == '"') in_quote = false;
      ++i;
      continue;
    }
    if (c == '"') {
      in_quote = true;
      current.push_back(c);
      ++i;
      continue;
    }
    if (c == '[' || c == '(' || c == '{') ++depth;
    if ((c == ']' || c == ')' || c == '}') && depth > 0) --depth;
    if (depth == 0 && (c == '-' || c == '=')) {
      std::smatch m;
      const std::string rest = text.substr(i);
      bool matched = false;
      for (const auto& [pattern, style] : connector_patterns()) {
        if (!std::regex_search(rest, m, pattern, std::regex_constants::match_continuous))
          continue;
        Connector conn;
        conn.style = style;
        if (m.size() > 1 && m[1].matched) conn.label = m[1].str();
        i += static_cast<std::size_t>(m[0].length());
        // Pipe label applies to any connector spelling: -->|"Yes"|
        std::size_t j = i;
        while (j < text.size() && is_space(text[j])) ++j;
        if (j < text.size() && text[j] == '|') {
          std::size_t close = text.find('|', j + 1);
          if (close == std::string::npos) {
            error = "unterminated edge label";
            return false;
          }
          conn.label = text.substr(j + 1, close - j - 1);
          i = close + 1;
        }
        segments.push_back(current);
        current.clear();
        connectors.push_back(std::move(conn));
        matched = true;
        break;
      }
      if (matched) continue;
    }
    current.push_back(c);
    ++i;
  }
  if (in_quote) {
    error = "unterminated quote";
    return false;
  }
  segments.push_back(current);
  return true;
}

struct ShapeDelims {
  std::string_view open;
  std::string_view close;
  NodeShape shape;
};

// Longest openers first. The seven supported shapes plus common Mermaid
// bracket pairs that parse fine but map to `unknown`.
constexpr std::array<ShapeDelims, 13> kShapeTable = {{
    {"([", "])", NodeShape::stadium},
    {"[[", "]]", NodeShape::subroutine},
    {"[/", "/]", NodeShape::parallelogram},
    {"[\\", "\\]", NodeShape::parallelogram_alt},
    {"[/", "\\]", NodeShape::unknown},   // trapezoid
    {"[\\", "/]", NodeShape::unknown},   // trapezoid_alt
    {"[(", ")]", NodeShape::unknown},    // cylinder
    {"((", "))", NodeShape::circle},
    {"{{", "}}", NodeShape::unknown},    // hexagon
    {"{", "}", NodeShape::diamond},
    {"[", "]", NodeShape::rectangle},
    {"(", ")", NodeShape::rounded},
    {">", "]", NodeShape::unknown},      // asymmetric
}};

struct NodeToken {
  std::string id;
  bool has_label = false;
  std::string raw_label;
  NodeShape shape = NodeShape::unknown;
};

bool parse_node_token(std::string_view raw, NodeToken& out, std::string& error) {
  std::string_view s = trim(raw);
  // Style suffixes (A["x"]:::hot) are out of scope; drop them quietly.
  if (auto pos = s.rfind(":::"); pos != std::string_view::npos) s = trim(s.substr(0, pos));
  if (s.empty()) {
    error = "missing node before or after connector";
    return false;
  }
  std::size_t id_len = 0;
  while (id_len < s.size() && is_id_char(s[id_len])) ++id_len;
  if (id_len == 0) {
    error = "expected node id";
    return false;
  }
  out.id = std::string(s.substr(0, id_len));
  std::string_view rest = trim(s.substr(id_len));
  if (rest.empty()) {
    out.has_label = false;
    return true;
  }
  for (const auto& delim : kShapeTable) {
    if (rest.substr(0, delim.open.size()) != delim.open) continue;
    if (rest.size() < delim.open.size() + delim.close.size()) continue;
    if (rest.substr(rest.size() - delim.close.size()) != delim.close) continue;
    out.has_label = true;
    out.raw_label = std::string(
        rest.substr(delim.open.size(), rest.size() - delim.open.size() - delim.close.size()));
    out.shape = delim.shape;
    return true;
  }
  error = "malformed node brackets: " + std::string(rest);
  return false;
}

const std::array<std::string_view, 12> kSkippedKeywords = {
    "subgraph", "end",      "classDef", "class",    "style",    "linkStyle",
    "click",    "direction", "accTitle", "accDescr", "linkstyle", "title"};

class GraphBuilder {
 public:
  explicit GraphBuilder(ParseMode mode) : mode_(mode) {}

  FlowchartGraph finish() && { return std::move(graph_); }

  void warn(int line, std::string message) {
    graph_.warnings.push_back({line, std::move(message)});
  }

  [[noreturn]] void fail(ParseError::Kind kind, int line, const std::string& reason) {
    throw ParseError(kind, line, reason);
  }

  void problem(int line, const std::string& reason) {
    if (mode_ == ParseMode::strict) fail(ParseError::Kind::syntax, line, reason);
    warn(line, reason);
  }

  void set_direction(Direction d) { graph_.direction = d; }

  void declare_node(int line, const NodeToken& token) {
    std::string label = token.has_label ? display_label(token.raw_label) : token.id;
    if (token.has_label && canonicalize_label(token.raw_label).empty()) {
      warn(line, "node '" + token.id + "' has an empty label; using its id");
      label = token.id;
    }
    NodeShape shape = token.has_label ? token.shape : NodeShape::unknown;
    auto it = index_.find(token.id);
    if (it == index_.end()) {
      index_.emplace(token.id, graph_.nodes.size());
      graph_.nodes.push_back({token.id, std::move(label), shape, !token.has_label});
      return;
    }
    Node& node = graph_.nodes[it->second];
    if (!token.has_label) return;  // a bare reference never downgrades a declaration
    if (!node.implicit && node.label != label)
      warn(line, "node '" + token.id + "' redeclared with a different label; last wins");
    node.label = std::move(label);
    node.shape = shape;
    node.implicit = false;
  }

  void add_edge(int line, const std::string& src, const std::string& dst,
                const Connector& conn) {
    Edge edge;
    edge.src_id = src;
    edge.dst_id = dst;
    edge.style = conn.style;
    if (conn.label) {
      std::string label = display_label(*conn.label);
      if (canonicalize_label(*conn.label).empty()) {
        warn(line, "empty edge label ignored");
      } else {
        edge.label = std::move(label);
      }
    }
    graph_.edges.push_back(std::move(edge));
  }

  bool statement(int line, std::string_view stmt) {
    std::vector<std::string> segments;
    std::vector<Connector> connectors;
    std::string error;
    if (!scan_segments(stmt, segments, connectors, error)) {
      problem(line, error);
      return false;
    }
    std::vector<NodeToken> tokens(segments.size());
    for (std::size_t k = 0; k < segments.size(); ++k) {
      if (!parse_node_token(segments[k], tokens[k], error)) {
        problem(line, error);
        return false;
      }
    }
    for (const auto& token : tokens) declare_node(line, token);
    for (std::size_t k = 0; k < connectors.size(); ++k)
      add_edge(line, tokens[k].id, tokens[k + 1].id, connectors[k]);
    return true;
  }

 private:
  ParseMode mode_;
  FlowchartGraph graph_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::optional<Direction> direction_from(std::string_view token) {
  std::string t(token);
  for (char& c : t) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (t == "TD") return Direction::td;
  if (t == "TB") return Direction::tb;
  if (t == "LR") return Direction::lr;
  if (t == "RL") return Direction::rl;
  if (t == "BT") return Direction::bt;
  return std::nullopt;
}

// Statements may share a line separated by ';' (outside quotes).
std::vector<std::string> split_statements(std::string_view line) {
  std::vector<std::string> out;
  std::string current;
  bool in_quote = false;
  for (char c : line) {
    if (c == '"') in_quote = !in_quote;
    if (c == ';' && !in_quote) {
      out.push_back(current);
      current.clear();
      continue;
    }
    current.push_back(c);
  }
  out.push_back(current);
  return out;
}

}  // namespace

ParseError::ParseError(Kind kind, int line, const std::string& reason)
    : std::runtime_error("line " + std::to_string(line) + ": " + reason),
      kind_(kind),
      line_(line) {}

const Node* FlowchartGraph::find_node(std::string_view id) const {
  for (const Node& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

bool FlowchartGraph::same_structure(const FlowchartGraph& other) const {
  return direction == other.direction && nodes == other.nodes && edges == other.edges;
}

FlowchartGraph parse_mermaid(std::string_view source, ParseMode mode) {
  GraphBuilder builder(mode);
  std::vector<ParseWarning> pre_warnings;
  std::vector<SourceLine> lines = select_chart_lines(source, pre_warnings);
  for (auto& w : pre_warnings) builder.warn(w.line, std::move(w.message));

  bool any_content = std::any_of(lines.begin(), lines.end(), [](const SourceLine& l) {
    return !trim(l.text).empty();
  });
  if (!any_content) {
    if (mode == ParseMode::strict)
      builder.fail(ParseError::Kind::empty_input, 1, "empty input");
    builder.warn(1, "empty input");
    return std::move(builder).finish();
  }

  bool header_seen = false;
  bool header_warned = false;
  for (const SourceLine& line : lines) {
    for (std::string_view stmt_raw : split_statements(line.text)) {
      std::string_view stmt = trim(stmt_raw);
      if (stmt.empty() || stmt.substr(0, 2) == "%%") continue;
      if (!header_seen && (starts_with_word(stmt, "flowchart") || starts_with_word(stmt, "graph"))) {
        header_seen = true;
        std::string_view rest = trim(stmt.substr(stmt.find_first_of(" \t") == std::string_view::npos
                                                     ? stmt.size()
                                                     : stmt.find_first_of(" \t")));
        if (!rest.empty()) {
          if (auto dir = direction_from(rest)) {
            builder.set_direction(*dir);
          } else {
            builder.problem(line.number, "unknown flow direction '" + std::string(rest) + "'");
          }
        }
        continue;
      }
      bool skipped = false;
      for (std::string_view keyword : kSkippedKeywords) {
        if (starts_with_word(stmt, keyword)) {
          builder.warn(line.number, "unsupported statement skipped: " + std::string(keyword));
          skipped = true;
          break;
        }
      }
      if (skipped) continue;
      if (!header_seen && !header_warned) {
        if (mode == ParseMode::strict)
          builder.fail(ParseError::Kind::no_flowchart_header, line.number,
                       "expected 'flowchart <dir>' or 'graph <dir>' header");
        builder.warn(line.number, "no flowchart header; assuming 'flowchart TD'");
        header_warned = true;
      }
      builder.statement(line.number, stmt);
    }
  }
  return std::move(builder).finish();
}

namespace {

std::pair<std::string_view, std::string_view> shape_delims(NodeShape shape) {
  switch (shape) {
    case NodeShape::stadium: return {"([", "])"};
    case NodeShape::subroutine: return {"[[", "]]"};
    case NodeShape::parallelogram: return {"[/", "/]"};
    case NodeShape::parallelogram_alt: return {"[\\", "\\]"};
    case NodeShape::circle: return {"((", "))"};
    case NodeShape::diamond: return {"{", "}"};
    case NodeShape::rounded: return {"(", ")"};
    case NodeShape::rectangle:
    case NodeShape::unknown: return {"[", "]"};
  }
  return {"[", "]"};
}

std::string quoted(std::string_view label) {
  std::string out = "\"";
  for (char c : label) out.push_back(c == '"' ? '\'' : c);
  out.push_back('"');
  return out;
}

std::string_view connector_text(EdgeStyle style) {
  switch (style) {
    case EdgeStyle::arrow: return "-->";
    case EdgeStyle::open: return "---";
    case EdgeStyle::dotted: return "-.->";
    case EdgeStyle::thick: return "==>";
  }
  return "-->";
}

}  // namespace

std::string render_mermaid(const FlowchartGraph& graph) {
  std::ostringstream out;
  out << "flowchart " << to_string(graph.direction) << '\n';
  for (const Node& node : graph.nodes) {
    if (node.implicit) {
      // Implicit nodes reappear through their edges; only isolated ones
      // need a bare statement to survive a round trip.
      bool isolated = std::none_of(graph.edges.begin(), graph.edges.end(), [&](const Edge& e) {
        return e.src_id == node.id || e.dst_id == node.id;
      });
      if (isolated) out << "    " << node.id << '\n';
      continue;
    }
    auto [open, close] = shape_delims(node.shape);
    out << "    " << node.id << open << quoted(node.label) << close << '\n';
  }
  for (const Edge& edge : graph.edges) {
    out << "    " << edge.src_id << ' ' << connector_text(edge.style);
    if (edge.label) out << '|' << quoted(*edge.label) << '|';
    out << ' ' << edge.dst_id << '\n';
  }
  return out.str();
}

std::string graph_to_json(const FlowchartGraph& graph, int indent) {
  ordered_json doc;
  doc["direction"] = to_string(graph.direction);
  doc["nodes"] = ordered_json::array();
  for (const Node& n : graph.nodes) {
    doc["nodes"].push_back({{"id", n.id},
                            {"label", n.label},
                            {"shape", to_string(n.shape)},
                            {"implicit", n.implicit}});
  }
  doc["edges"] = ordered_json::array();
  for (const Edge& e : graph.edges) {
    ordered_json edge{{"src", e.src_id}, {"dst", e.dst_id}};
    edge["label"] = e.label ? ordered_json(*e.label) : ordered_json(nullptr);
    edge["style"] = to_string(e.style);
    doc["edges"].push_back(std::move(edge));
  }
  doc["warnings"] = ordered_json::array();
  for (const ParseWarning& w : graph.warnings)
    doc["warnings"].push_back({{"line", w.line}, {"message", w.message}});
  return indent < 0 ? doc.dump() : doc.dump(indent);
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::td: return "TD";
    case Direction::tb: return "TB";
    case Direction::lr: return "LR";
    case Direction::rl: return "RL";
    case Direction::bt: return "BT";
  }
  return "TD";
}

std::string_view to_string(NodeShape s) {
  switch (s) {
    case NodeShape::rectangle: return "rectangle";
    case NodeShape::rounded: return "rounded";
    case NodeShape::stadium: return "stadium";
    case NodeShape::diamond: return "diamond";
    case NodeShape::parallelogram: return "parallelogram";
    case NodeShape::parallelogram_alt: return "parallelogram_alt";
    case NodeShape::circle: return "circle";
    case NodeShape::subroutine: return "subroutine";
    case NodeShape::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(EdgeStyle s) {
  switch (s) {
    case EdgeStyle::arrow: return "arrow";
    case EdgeStyle::open: return "open";
    case EdgeStyle::dotted: return "dotted";
    case EdgeStyle::thick: return "thick";
  }
  return "arrow";
}

}  // namespace floweval::mermaid
