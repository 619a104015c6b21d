#include "floweval/study.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <future>

namespace floweval::agreement {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json opt_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string format_cell(const std::optional<double>& v) {
  if (!v) return {};
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%.10g", *v);
  return buffer;
}

ordered_json agreement_json(const AgreementReport& report) {
  ordered_json doc;
  doc["series"] = report.series_name;
  doc["n"] = report.n;
  doc["pearson_r"] = opt_json(report.pearson_r);
  doc["pearson_p"] = opt_json(report.pearson_p);
  doc["kendall_tau"] = opt_json(report.kendall_tau);
  doc["tau_variant"] = report.tau_variant;
  doc["rmse"] = opt_json(report.rmse);
  doc["mae"] = opt_json(report.mae);
  doc["micro_f1"] = opt_json(report.micro_f1);
  doc["fpr"] = opt_json(report.fpr);
  doc["fnr"] = opt_json(report.fnr);
  doc["flags"] = report.flags;
  return doc;
}

void evaluate_item(const StudyItem& item, StudyRow& row, backends::OcrClient& ocr,
                   backends::VeClient& ve, const StudyOptions& options) {
  row.id = item.id;
  if (!item.load_error.empty()) {
    row.failed = true;
    row.error = item.load_error;
    return;
  }
  try {
    mermaid::FlowchartGraph gt_graph =
        mermaid::parse_mermaid(item.ground_truth_source, options.ground_truth_mode);
    ElementSet gt_set = decompose(gt_graph);

    row.report = metrics::evaluate_reference_free(item.image, item.generated_source, ocr, ve,
                                                  options.threshold);

    mermaid::FlowchartGraph gen_graph =
        mermaid::parse_mermaid(item.generated_source, mermaid::ParseMode::lenient);
    ElementSet gen_set = decompose(gen_graph);
    metrics::score_against_reference(row.report, gt_set, gen_set, options.threshold);
    row.recall_actual_text =
        metrics::recall_actual_text(gt_set, gen_set, options.threshold);
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
  }
}

}  // namespace

const AgreementReport* StudyResult::find_series(std::string_view name) const {
  for (const AgreementReport& report : series)
    if (report.series_name == name) return &report;
  return nullptr;
}

StudyResult run_validation_study(const std::vector<StudyItem>& corpus,
                                 backends::OcrClient& ocr, backends::VeClient& ve,
                                 const StudyOptions& options) {
  StudyResult result;
  result.attempted = corpus.size();
  result.rows.resize(corpus.size());

  std::size_t window = std::max(1, options.workers);
  for (std::size_t begin = 0; begin < corpus.size(); begin += window) {
    std::size_t end = std::min(corpus.size(), begin + window);
    std::vector<std::future<void>> inflight;
    for (std::size_t i = begin + 1; i < end; ++i)
      inflight.push_back(std::async(std::launch::async, [&, i] {
        evaluate_item(corpus[i], result.rows[i], ocr, ve, options);
      }));
    evaluate_item(corpus[begin], result.rows[begin], ocr, ve, options);
    for (auto& f : inflight) f.get();
  }

  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const StudyRow& a, const StudyRow& b) { return a.id < b.id; });
  for (const StudyRow& row : result.rows)
    if (row.failed) ++result.failures;
  result.degraded =
      result.attempted > 0 &&
      static_cast<double>(result.failures) >
          options.max_failure_ratio * static_cast<double>(result.attempted);

  // Agreement series over the rows where both sides are defined.
  struct SeriesSpec {
    const char* name;
    std::optional<double> (*proxy)(const StudyRow&);
    std::optional<double> (*actual)(const StudyRow&);
  };
  const SeriesSpec specs[] = {
      {"recall", [](const StudyRow& r) { return r.report.recall_ocr; },
       [](const StudyRow& r) { return r.recall_actual_text; }},
      {"precision", [](const StudyRow& r) { return r.report.precision_ve; },
       [](const StudyRow& r) { return r.report.precision_actual; }},
      {"f1", [](const StudyRow& r) { return r.report.f1_ocr_ve; },
       [](const StudyRow& r) { return r.report.f1_actual; }},
  };
  for (const SeriesSpec& spec : specs) {
    PairedSeries series;
    for (const StudyRow& row : result.rows) {
      if (row.failed) continue;
      std::optional<double> p = spec.proxy(row);
      std::optional<double> a = spec.actual(row);
      if (!p || !a) continue;
      series.proxy.push_back(*p);
      series.actual.push_back(*a);
      series.ids.push_back(row.id);
    }
    result.series.push_back(compute_agreement(series, spec.name));
  }

  // Component quality, pooled across rows (micro style).
  std::vector<ConfusionTally> ocr_tallies;
  std::vector<backends::EntailmentVerdict> all_verdicts;
  std::vector<bool> all_truth;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const StudyRow& row = result.rows[i];
    if (row.failed) continue;
    // Rows are sorted; find the matching corpus item by id for ground truth.
    auto item = std::find_if(corpus.begin(), corpus.end(),
                             [&](const StudyItem& it) { return it.id == row.id; });
    if (item == corpus.end()) continue;
    mermaid::FlowchartGraph gt_graph =
        mermaid::parse_mermaid(item->ground_truth_source, mermaid::ParseMode::lenient);
    ElementSet gt_set = decompose(gt_graph);
    mermaid::FlowchartGraph gen_graph =
        mermaid::parse_mermaid(item->generated_source, mermaid::ParseMode::lenient);
    ElementSet gen_set = decompose(gen_graph);

    matching::MatchResult ocr_match =
        matching::intersect(row.report.ocr_texts, gt_set.text_pool, options.threshold);
    ConfusionTally ocr_tally;
    ocr_tally.tp = ocr_match.pairs.size();
    ocr_tally.fp = row.report.ocr_texts.size() - ocr_tally.tp;
    ocr_tally.fn = gt_set.text_pool.size() - ocr_tally.tp;
    ocr_tallies.push_back(ocr_tally);

    if (!row.report.verdicts.empty()) {
      std::vector<bool> truth(gen_set.size(), false);
      matching::MatchResult gen_match =
          matching::intersect(gt_set.canonical(), gen_set.canonical(), options.threshold);
      for (const matching::Match& pair : gen_match.pairs)
        if (pair.right < truth.size()) truth[pair.right] = true;
      if (truth.size() == row.report.verdicts.size()) {
        for (std::size_t v = 0; v < truth.size(); ++v) {
          all_verdicts.push_back(row.report.verdicts[v]);
          all_truth.push_back(truth[v]);
        }
      }
    }
  }

  result.ocr_component.series_name = "ocr_component";
  result.ocr_component.micro_f1 = micro_f1(ocr_tallies);
  if (!result.ocr_component.micro_f1)
    result.ocr_component.flags.emplace_back(kFlagNoPositives);
  std::size_t ocr_n = 0;
  for (const ConfusionTally& t : ocr_tallies) ocr_n += t.total();
  result.ocr_component.n = ocr_n;

  VeErrorRates rates = ve_error_rates(all_verdicts, all_truth);
  result.ve_component.series_name = "ve_component";
  result.ve_component.n = rates.tally.total();
  result.ve_component.fpr = rates.fpr;
  result.ve_component.fnr = rates.fnr;
  result.ve_component.micro_f1 = micro_f1({rates.tally});
  if (!result.ve_component.micro_f1)
    result.ve_component.flags.emplace_back(kFlagNoPositives);
  return result;
}

std::string study_to_json(const StudyResult& result, int indent) {
  ordered_json doc;
  doc["attempted"] = result.attempted;
  doc["failures"] = result.failures;
  doc["degraded"] = result.degraded;
  doc["series"] = ordered_json::array();
  for (const AgreementReport& report : result.series) doc["series"].push_back(agreement_json(report));
  doc["ocr_component"] = agreement_json(result.ocr_component);
  doc["ve_component"] = agreement_json(result.ve_component);
  doc["rows"] = ordered_json::array();
  for (const StudyRow& row : result.rows) {
    ordered_json r;
    r["id"] = row.id;
    if (row.failed) {
      r["failed"] = true;
      r["error"] = row.error;
      doc["rows"].push_back(std::move(r));
      continue;
    }
    r["recall_ocr"] = opt_json(row.report.recall_ocr);
    r["recall_actual"] = opt_json(row.report.recall_actual);
    r["recall_actual_text"] = opt_json(row.recall_actual_text);
    r["precision_ve"] = opt_json(row.report.precision_ve);
    r["precision_actual"] = opt_json(row.report.precision_actual);
    r["f1_ocr_ve"] = opt_json(row.report.f1_ocr_ve);
    r["f1_actual"] = opt_json(row.report.f1_actual);
    r["flags"] = row.report.flags;
    doc["rows"].push_back(std::move(r));
  }
  return indent < 0 ? doc.dump() : doc.dump(indent);
}

std::string study_rows_to_csv(const StudyResult& result) {
  std::string csv =
      "id,recall_ocr,recall_actual,precision_ve,precision_actual,f1_ocr_ve,f1_actual,flags\n";
  for (const StudyRow& row : result.rows) {
    csv += row.id;
    csv += ',';
    if (row.failed) {
      csv += ",,,,,,item_failed\n";
      continue;
    }
    csv += format_cell(row.report.recall_ocr) + ",";
    csv += format_cell(row.report.recall_actual) + ",";
    csv += format_cell(row.report.precision_ve) + ",";
    csv += format_cell(row.report.precision_actual) + ",";
    csv += format_cell(row.report.f1_ocr_ve) + ",";
    csv += format_cell(row.report.f1_actual) + ",";
    std::string flags;
    for (const std::string& flag : row.report.flags) {
      if (!flags.empty()) flags += ';';
      flags += flag;
    }
    csv += flags;
    csv += '\n';
  }
  return csv;
}

std::string study_summary_table(const StudyResult& result) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %4s %10s %12s %8s %8s\n", "series", "n", "pearson_r",
                "kendall_tau", "rmse", "mae");
  out += line;
  auto cell = [](const std::optional<double>& v) -> std::string {
    if (!v) return "-";
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.3f", *v);
    return buffer;
  };
  for (const AgreementReport& report : result.series) {
    std::snprintf(line, sizeof line, "%-12s %4zu %10s %12s %8s %8s\n",
                  report.series_name.c_str(), report.n, cell(report.pearson_r).c_str(),
                  cell(report.kendall_tau).c_str(), cell(report.rmse).c_str(),
                  cell(report.mae).c_str());
    out += line;
  }
  std::snprintf(line, sizeof line, "%-12s %4zu micro_f1=%s\n", "ocr", result.ocr_component.n,
                cell(result.ocr_component.micro_f1).c_str());
  out += line;
  std::snprintf(line, sizeof line, "%-12s %4zu micro_f1=%s fpr=%s fnr=%s\n", "ve",
                result.ve_component.n, cell(result.ve_component.micro_f1).c_str(),
                cell(result.ve_component.fpr).c_str(), cell(result.ve_component.fnr).c_str());
  out += line;
  return out;
}

}  // namespace floweval::agreement
