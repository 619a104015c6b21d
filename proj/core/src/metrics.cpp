#include "floweval/metrics.hpp"

#include "floweval/mermaid.hpp"

#include <json.hpp>

#include <algorithm>

namespace floweval::metrics {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json opt_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

void MetricReport::add_flag(std::string_view flag) {
  if (!has_flag(flag)) flags.emplace_back(flag);
}

bool MetricReport::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

RecallOcrResult recall_ocr(const std::vector<std::string>& ocr_texts,
                           const ElementSet& generated, double threshold) {
  RecallOcrResult result;
  if (ocr_texts.empty()) {
    result.degenerate = true;
    return result;
  }
  matching::MatchResult m = matching::intersect(ocr_texts, generated.text_pool, threshold);
  result.matched = m.pairs.size();
  result.value = static_cast<double>(result.matched) / static_cast<double>(ocr_texts.size());
  for (std::size_t idx : m.unmatched_left) {
    result.missed.push_back(ocr_texts[idx]);
    result.missed_indices.push_back(idx);
  }
  return result;
}

PrecisionVeResult precision_ve(const ElementSet& generated,
                               const std::vector<backends::EntailmentVerdict>& verdicts) {
  PrecisionVeResult result;
  if (generated.empty()) {
    if (!verdicts.empty()) throw MissingVerdict("verdicts given for an empty element set");
    result.degenerate = true;
    return result;
  }
  if (verdicts.size() != generated.size())
    throw MissingVerdict("verdict count " + std::to_string(verdicts.size()) +
                         " does not cover " + std::to_string(generated.size()) + " elements");
  std::vector<char> seen(generated.size(), 0);
  for (const auto& v : verdicts) {
    if (v.element_index >= generated.size() || seen[v.element_index])
      throw MissingVerdict("verdict indices must cover each element exactly once");
    seen[v.element_index] = 1;
    if (v.entailed)
      ++result.entailed;
    else
      result.hallucinated.push_back(generated.elements[v.element_index].rendered);
  }
  result.value =
      static_cast<double>(result.entailed) / static_cast<double>(generated.size());
  return result;
}

TraditionalResult traditional_metrics(const ElementSet& actual, const ElementSet& generated,
                                      double threshold) {
  TraditionalResult result;
  matching::MatchResult m =
      matching::intersect(actual.canonical(), generated.canonical(), threshold);
  result.intersection = m.pairs.size();

  bool actual_empty = actual.empty();
  bool generated_empty = generated.empty();
  if (actual_empty) result.flags.emplace_back(kFlagActualEmpty);
  if (generated_empty) result.flags.emplace_back(kFlagGeneratedEmpty);

  if (!actual_empty)
    result.recall =
        static_cast<double>(result.intersection) / static_cast<double>(actual.size());
  if (!generated_empty)
    result.precision =
        static_cast<double>(result.intersection) / static_cast<double>(generated.size());

  if (result.recall && result.precision)
    result.f1 = f1_composite(*result.recall, *result.precision);
  else if (generated_empty && !actual_empty)
    result.f1 = 0.0;  // empty generation against real content is a total miss
  return result;
}

std::optional<double> recall_actual_text(const ElementSet& actual, const ElementSet& generated,
                                         double threshold) {
  if (actual.text_pool.empty()) return std::nullopt;
  matching::MatchResult m =
      matching::intersect(actual.text_pool, generated.text_pool, threshold);
  return static_cast<double>(m.pairs.size()) / static_cast<double>(actual.text_pool.size());
}

double f1_composite(double recall, double precision) {
  double sum = recall + precision;
  if (sum == 0.0) return 0.0;
  return 2.0 * recall * precision / sum;
}

MetricReport evaluate_reference_free(const ImageRef& image, std::string_view mermaid_source,
                                     backends::OcrClient& ocr, backends::VeClient& ve,
                                     double threshold) {
  MetricReport report;
  report.ocr_backend_id = ocr.backend_id();
  report.ve_backend_id = ve.backend_id();

  mermaid::FlowchartGraph graph = mermaid::parse_mermaid(mermaid_source, mermaid::ParseMode::lenient);
  ElementSet generated = decompose(graph);
  report.counts.generated = generated.size();
  if (generated.empty()) report.add_flag(kFlagParseProducedNothing);
  if (std::any_of(graph.nodes.begin(), graph.nodes.end(),
                  [](const mermaid::Node& n) { return n.implicit; }))
    report.add_flag(kFlagImplicitNodes);

  backends::OcrResult ocr_result = ocr.extract(image);
  if (ocr_result.from_cache) ++report.cache_hits;
  if (ocr_result.empty_response) report.add_flag(kFlagOcrEmptyResponse);
  report.counts.ocr = ocr_result.texts.size();
  report.ocr_texts = ocr_result.texts;
  report.ocr_texts_display = ocr_result.texts_display;

  RecallOcrResult recall = recall_ocr(ocr_result.texts, generated, threshold);
  report.counts.ocr_generated = recall.matched;
  if (recall.degenerate) {
    report.add_flag(kFlagOcrEmpty);
  } else {
    report.recall_ocr = recall.value;
    for (std::size_t idx : recall.missed_indices)
      report.missed_elements.push_back(ocr_result.texts_display[idx]);
  }

  if (generated.empty()) {
    report.add_flag(kFlagGeneratedEmpty);
  } else {
    report.verdicts = ve.verify(image, generated.rendered(), generated.size());
    for (const auto& v : report.verdicts) {
      if (v.from_cache) ++report.cache_hits;
      if (v.defaulted) report.add_flag(kFlagVeDefaulted);
    }
    PrecisionVeResult precision = precision_ve(generated, report.verdicts);
    report.counts.entailed = precision.entailed;
    report.precision_ve = precision.value;
    report.hallucinated_elements = std::move(precision.hallucinated);
  }

  if (report.recall_ocr && report.precision_ve)
    report.f1_ocr_ve = f1_composite(*report.recall_ocr, *report.precision_ve);
  else if (report.recall_ocr && generated.empty())
    report.f1_ocr_ve = 0.0;  // same rule as traditional_metrics
  return report;
}

void score_against_reference(MetricReport& report, const ElementSet& actual,
                             const ElementSet& generated, double threshold) {
  TraditionalResult t = traditional_metrics(actual, generated, threshold);
  report.recall_actual = t.recall;
  report.precision_actual = t.precision;
  report.f1_actual = t.f1;
  report.counts.actual = actual.size();
  report.counts.actual_generated = t.intersection;
  report.counts.generated = generated.size();
  for (const std::string& flag : t.flags) report.add_flag(flag);
}

std::string report_to_json(const MetricReport& report, int indent) {
  ordered_json doc;
  doc["recall_ocr"] = opt_json(report.recall_ocr);
  doc["precision_ve"] = opt_json(report.precision_ve);
  doc["f1_ocr_ve"] = opt_json(report.f1_ocr_ve);
  doc["recall_actual"] = opt_json(report.recall_actual);
  doc["precision_actual"] = opt_json(report.precision_actual);
  doc["f1_actual"] = opt_json(report.f1_actual);
  doc["missed_elements"] = report.missed_elements;
  doc["hallucinated_elements"] = report.hallucinated_elements;
  doc["counts"] = {{"ocr", report.counts.ocr},
                   {"generated", report.counts.generated},
                   {"entailed", report.counts.entailed},
                   {"actual", report.counts.actual},
                   {"actual_generated", report.counts.actual_generated},
                   {"ocr_generated", report.counts.ocr_generated}};
  doc["flags"] = report.flags;
  doc["backends"] = {{"ocr", report.ocr_backend_id}, {"ve", report.ve_backend_id}};
  return indent < 0 ? doc.dump() : doc.dump(indent);
}

}  // namespace floweval::metrics
