#pragma once

#include "floweval/agreement.hpp"
#include "floweval/metrics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace floweval::agreement {

struct StudyItem {
  std::string id;
  ImageRef image;
  std::string ground_truth_source;
  std::string generated_source;
  /// Set when the item could not even be loaded (missing file etc.); the
  /// item then counts as a failed row without being evaluated.
  std::string load_error;
};

struct StudyOptions {
  double threshold = matching::kDefaultThreshold;
  int workers = 4;
  /// Item-failure ratio above which the run counts as degraded.
  double max_failure_ratio = 0.2;
  /// Ground truth is curated data; parse it strictly by default so corpus
  /// problems surface as item failures instead of silent empty sets.
  mermaid::ParseMode ground_truth_mode = mermaid::ParseMode::strict;
};

struct StudyRow {
  std::string id;
  bool failed = false;
  std::string error;
  metrics::MetricReport report;  // proxy metrics plus *_actual fields
  /// Recall over ground-truth text runs only; the agreement series for
  /// recall pairs Recall_OCR with this, since OCR cannot see unlabeled
  /// edges. The full-element recall stays in report.recall_actual.
  std::optional<double> recall_actual_text;
};

struct StudyResult {
  std::vector<StudyRow> rows;  // sorted by id
  /// One report per metric series: "recall", "precision", "f1".
  std::vector<AgreementReport> series;
  /// Component quality: OCR against ground-truth text (micro-F1), verifier
  /// against ground-truth membership (micro-F1 + FPR/FNR).
  AgreementReport ocr_component;
  AgreementReport ve_component;
  std::size_t attempted = 0;
  std::size_t failures = 0;
  bool degraded = false;

  const AgreementReport* find_series(std::string_view name) const;
};

/// Evaluates every corpus item (bounded parallelism), scores proxy vs
/// ground truth, and assembles the agreement statistics. Item failures are
/// recorded and excluded from the statistics; the run is marked degraded
/// when more than max_failure_ratio of items fail.
StudyResult run_validation_study(const std::vector<StudyItem>& corpus,
                                 backends::OcrClient& ocr, backends::VeClient& ve,
                                 const StudyOptions& options = {});

/// Deterministic JSON summary: series statistics, component quality,
/// failure accounting, and per-row metric values.
std::string study_to_json(const StudyResult& result, int indent = 2);

/// Per-image rows for external plotting:
/// id, recall_ocr, recall_actual, precision_ve, precision_actual,
/// f1_ocr_ve, f1_actual, flags. Absent scores are empty cells.
std::string study_rows_to_csv(const StudyResult& result);

/// Fixed-width summary table in the shape of the agreement tables
/// (Pearson r / Kendall tau / RMSE / MAE per series).
std::string study_summary_table(const StudyResult& result);

}  // namespace floweval::agreement
