#include "fixtures.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <utility>

namespace fixtures {

namespace {

constexpr std::array<const char*, 24> kOnsets = {
    "zor", "mek", "tal", "vun", "pir", "sod", "laf", "gex", "rhu", "bam", "cit", "dov",
    "fyn", "gup", "hax", "jil", "kom", "lur", "nib", "pog", "qed", "rit", "saz", "tew"};

constexpr std::array<const char*, 24> kSuffixes = {
    "ang", "elo", "ith", "oku", "uva", "ari", "ens", "ixo", "ora", "ulf", "aze", "iny",
    "ohm", "eep", "eac", "oad", "oss", "urn", "alp", "esk", "iwa", "oby", "unt", "ayr"};

constexpr std::size_t kPoolSize = kOnsets.size() * kSuffixes.size();

std::string word_at(std::size_t index) {
  return std::string(kOnsets[index % kOnsets.size()]) + kSuffixes[index / kOnsets.size()];
}

std::string take_words(Chart& chart, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (chart.words_used >= chart.word_order.size())
      throw std::logic_error("fixture word pool exhausted");
    if (!out.empty()) out.push_back(' ');
    out += word_at(chart.word_order[chart.words_used++]);
  }
  return out;
}

constexpr std::array<std::pair<const char*, const char*>, 5> kShapes = {{
    {"[\"", "\"]"},    // rectangle
    {"([\"", "\"])"},  // stadium
    {"{\"", "\"}"},    // diamond
    {"(\"", "\")"},    // rounded
    {"[/\"", "\"/]"},  // parallelogram
}};

void realize(Chart& chart) {
  std::string source = "flowchart TD\n";
  for (const auto& node : chart.nodes) {
    const auto& [open, close] = kShapes[node.shape % kShapes.size()];
    source += "    " + node.id + open + node.label + close + "\n";
  }
  for (const auto& edge : chart.edges) {
    source += "    " + chart.nodes[edge.src].id;
    if (edge.label.empty())
      source += " --> ";
    else
      source += " -->|\"" + edge.label + "\"| ";
    source += chart.nodes[edge.dst].id + "\n";
  }
  chart.source = std::move(source);
  chart.graph = floweval::mermaid::parse_mermaid(chart.source, floweval::mermaid::ParseMode::strict);
  chart.elements = floweval::decompose(chart.graph);
  if (chart.elements.size() != chart.nodes.size() + chart.edges.size())
    throw std::logic_error("fixture decomposition does not match its construction");
}

}  // namespace

Chart make_chart(std::uint64_t seed, std::size_t target_elements) {
  if (target_elements < 5 || target_elements > 60)
    throw std::invalid_argument("fixture charts support 5..60 elements");

  Chart chart;
  chart.word_order.resize(kPoolSize);
  std::iota(chart.word_order.begin(), chart.word_order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(chart.word_order.begin(), chart.word_order.end(), rng);

  const std::size_t n_nodes =
      std::max<std::size_t>(3, std::min((target_elements + 1) / 2, 2 + target_elements * 2 / 5));
  const std::size_t n_edges = target_elements - n_nodes;
  if (n_edges + 1 < n_nodes) throw std::logic_error("fixture sizing left the chart unconnected");

  for (std::size_t i = 0; i < n_nodes; ++i) {
    chart.nodes.push_back({"N" + std::to_string(i), take_words(chart, 3), i});
  }
  std::set<std::pair<std::size_t, std::size_t>> used;
  for (std::size_t i = 0; i + 1 < n_nodes; ++i) {
    chart.edges.push_back({i, i + 1, {}});
    used.emplace(i, i + 1);
  }
  std::uniform_int_distribution<std::size_t> pick(0, n_nodes - 1);
  while (chart.edges.size() < n_edges) {
    std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    if (a == b) continue;
    auto pair = std::minmax(a, b);
    if (!used.emplace(pair.first, pair.second).second) continue;
    chart.edges.push_back({pair.first, pair.second, {}});
  }
  for (std::size_t e = 0; e < chart.edges.size(); e += 3) {
    chart.edges[e].label = take_words(chart, 2);
  }

  realize(chart);
  check_separation({&chart.elements});
  return chart;
}

Chart delete_nodes(const Chart& gt, std::size_t k, std::uint64_t seed) {
  if (k + 2 > gt.nodes.size()) throw std::invalid_argument("would delete too many nodes");

  std::vector<std::size_t> order(gt.nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed ^ 0xdefd);
  std::shuffle(order.begin(), order.end(), rng);
  std::set<std::size_t> doomed(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));

  Chart out;
  out.word_order = gt.word_order;
  out.words_used = gt.words_used;
  std::vector<std::size_t> remap(gt.nodes.size(), SIZE_MAX);
  for (std::size_t i = 0; i < gt.nodes.size(); ++i) {
    if (doomed.count(i)) continue;
    remap[i] = out.nodes.size();
    out.nodes.push_back(gt.nodes[i]);
  }
  for (const auto& edge : gt.edges) {
    if (doomed.count(edge.src) || doomed.count(edge.dst)) continue;
    out.edges.push_back({remap[edge.src], remap[edge.dst], edge.label});
  }

  realize(out);
  check_separation({&gt.elements, &out.elements});
  return out;
}

Chart fabricate_elements(const Chart& gt, std::size_t k) {
  Chart out = gt;
  for (std::size_t i = 0; i < k; ++i) {
    out.nodes.push_back({"X" + std::to_string(i), take_words(out, 3), i + 1});
  }
  realize(out);
  check_separation({&gt.elements, &out.elements});
  return out;
}

void check_separation(const std::vector<const floweval::ElementSet*>& sets, double threshold) {
  auto verify = [threshold](const std::vector<std::string>& strings, const char* what) {
    for (std::size_t i = 0; i < strings.size(); ++i) {
      for (std::size_t j = i + 1; j < strings.size(); ++j) {
        if (strings[i] == strings[j]) continue;
        if (floweval::matching::similarity(strings[i], strings[j]) >= threshold) {
          throw std::logic_error(std::string("fixture ") + what + " too close: '" + strings[i] +
                                 "' vs '" + strings[j] + "'");
        }
      }
    }
  };

  std::vector<std::string> canonicals;
  std::vector<std::string> pools;
  for (const auto* set : sets) {
    for (const auto& element : set->elements) canonicals.push_back(element.canonical);
    for (const auto& text : set->text_pool) pools.push_back(text);
  }
  // Equal strings across sets are shared content and expected; within one
  // set they would collapse distinct units, so those are caught separately.
  for (const auto* set : sets) {
    const auto canon = set->canonical();
    std::set<std::string> unique(canon.begin(), canon.end());
    if (unique.size() != set->size())
      throw std::logic_error("fixture contains duplicate canonical elements");
  }
  verify(canonicals, "elements");
  verify(pools, "text pool");
}

}  // namespace fixtures
