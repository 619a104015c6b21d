#pragma once

#include "floweval/backends.hpp"
#include "floweval/element_set.hpp"
#include "floweval/image.hpp"
#include "floweval/matching.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace floweval::metrics {

/// Thrown when a verdict list does not cover the generated elements
/// one-to-one; callers that went through VeClient can never trigger it.
class MissingVerdict : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Degenerate-input markers carried in MetricReport.flags.
inline constexpr std::string_view kFlagOcrEmpty = "degenerate_input:ocr_empty";
inline constexpr std::string_view kFlagGeneratedEmpty = "degenerate_input:generated_empty";
inline constexpr std::string_view kFlagActualEmpty = "degenerate_input:actual_empty";
inline constexpr std::string_view kFlagParseProducedNothing = "parse_produced_nothing";
inline constexpr std::string_view kFlagOcrEmptyResponse = "ocr_empty_response";
inline constexpr std::string_view kFlagVeDefaulted = "ve_defaulted_answers";
inline constexpr std::string_view kFlagImplicitNodes = "implicit_nodes_scored";

struct Counts {
  std::size_t ocr = 0;               // |OCR|
  std::size_t generated = 0;         // |Generated|
  std::size_t entailed = 0;          // |Entailed|
  std::size_t actual = 0;            // |Actual|
  std::size_t actual_generated = 0;  // |Actual ∩ Generated|
  std::size_t ocr_generated = 0;     // |OCR ∩ Generated|

  bool operator==(const Counts&) const = default;
};

struct MetricReport {
  std::optional<double> recall_ocr;
  std::optional<double> precision_ve;
  std::optional<double> f1_ocr_ve;

  std::optional<double> recall_actual;
  std::optional<double> precision_actual;
  std::optional<double> f1_actual;

  /// OCR texts with no generated counterpart (display form).
  std::vector<std::string> missed_elements;
  /// Generated rendered elements the verifier judged not entailed.
  std::vector<std::string> hallucinated_elements;

  Counts counts;
  std::vector<std::string> flags;

  std::string ocr_backend_id;
  std::string ve_backend_id;

  /// Diagnostics that stay out of the serialized report (their content is
  /// run-dependent: batch ids and hit counts differ between cold and warm
  /// cache, and the JSON must not).
  std::vector<backends::EntailmentVerdict> verdicts;
  std::vector<std::string> ocr_texts;          // canonical, as matched
  std::vector<std::string> ocr_texts_display;  // raw lines, same order
  std::size_t cache_hits = 0;

  void add_flag(std::string_view flag);
  bool has_flag(std::string_view flag) const;
};

struct RecallOcrResult {
  std::optional<double> value;
  std::vector<std::string> missed;         // unmatched OCR texts, input form
  std::vector<std::size_t> missed_indices; // positions in the input multiset
  std::size_t matched = 0;                 // |OCR ∩ Generated|
  bool degenerate = false;                 // |OCR| == 0
};

/// Completeness proxy: how much of the OCR-visible text made it into the
/// generated code. The generated pool is every text run of the chart, node
/// labels and edge labels alike.
RecallOcrResult recall_ocr(const std::vector<std::string>& ocr_texts,
                           const ElementSet& generated,
                           double threshold = matching::kDefaultThreshold);

struct PrecisionVeResult {
  std::optional<double> value;
  std::vector<std::string> hallucinated;  // rendered elements judged not entailed
  std::size_t entailed = 0;
  bool degenerate = false;  // |Generated| == 0
};

/// Correctness proxy: share of generated elements the verifier entailed.
/// Throws MissingVerdict unless verdicts map one-to-one onto the generated
/// elements.
PrecisionVeResult precision_ve(const ElementSet& generated,
                               const std::vector<backends::EntailmentVerdict>& verdicts);

struct TraditionalResult {
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> f1;
  std::size_t intersection = 0;  // |Actual ∩ Generated|
  std::vector<std::string> flags;
};

/// Ground-truth metrics over the full element multisets.
TraditionalResult traditional_metrics(const ElementSet& actual, const ElementSet& generated,
                                      double threshold = matching::kDefaultThreshold);

/// Recall over text runs only (node labels + edge labels), the slice of
/// ground truth that OCR can actually see; used by the agreement study.
std::optional<double> recall_actual_text(const ElementSet& actual, const ElementSet& generated,
                                         double threshold = matching::kDefaultThreshold);

/// Harmonic mean; 0 when both components are 0.
double f1_composite(double recall, double precision);

/// Full reference-free pipeline for one image: parse (lenient), decompose,
/// OCR-match, VE-verify, assemble. Backend failures propagate as
/// BackendError after the clients' retries.
MetricReport evaluate_reference_free(const ImageRef& image, std::string_view mermaid_source,
                                     backends::OcrClient& ocr, backends::VeClient& ve,
                                     double threshold = matching::kDefaultThreshold);

/// Fills the *_actual fields of an existing report from ground truth.
void score_against_reference(MetricReport& report, const ElementSet& actual,
                             const ElementSet& generated,
                             double threshold = matching::kDefaultThreshold);

/// Deterministic JSON rendering (stable key order, no volatile fields).
std::string report_to_json(const MetricReport& report, int indent = 2);

}  // namespace floweval::metrics
