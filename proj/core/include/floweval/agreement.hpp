#pragma once

#include "floweval/backends.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace floweval::agreement {

enum class Scale { unit, percent };

/// Aligned proxy/actual score pairs for one metric across a corpus.
struct PairedSeries {
  std::vector<double> proxy;
  std::vector<double> actual;
  std::vector<std::string> ids;  // optional, parallel to the series when set
  Scale scale = Scale::unit;

  std::size_t size() const { return proxy.size(); }

  /// Throws std::invalid_argument on length mismatch or out-of-range values.
  void validate() const;

  PairedSeries to_percent() const;
};

struct ConfusionTally {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  ConfusionTally& operator+=(const ConfusionTally& other);
};

inline constexpr std::string_view kFlagConstantSeries = "constant_series";
inline constexpr std::string_view kFlagAllTied = "all_tied";
inline constexpr std::string_view kFlagNoPositives = "no_positives";

/// Sample Pearson correlation; absent when either series is constant.
std::optional<double> pearson(const PairedSeries& series);

/// Two-sided p-value for the Pearson r of an n-point series, via the
/// t-transform t = r sqrt((n-2)/(1-r^2)) and the regularized incomplete
/// beta function. Absent for n < 3; 0 at |r| == 1.
std::optional<double> pearson_p_value(double r, std::size_t n);

/// Kendall tau-b (tie-corrected), O(n^2) pair enumeration. Absent when
/// every pair is tied on one side.
std::optional<double> kendall_tau(const PairedSeries& series);

/// (rmse, mae) of proxy - actual on the series' own scale.
std::pair<double, double> rmse_mae(const PairedSeries& series);

/// Micro-averaged F1: confusion counts pooled first, F1 = 2tp/(2tp+fp+fn).
/// Absent when the pool has no positives at all (tp+fp+fn == 0).
std::optional<double> micro_f1(const std::vector<ConfusionTally>& tallies);

struct VeErrorRates {
  std::optional<double> fpr;  // fp / (fp + tn), absent when no true negatives
  std::optional<double> fnr;  // fn / (fn + tp), absent when no true positives
  ConfusionTally tally;
};

/// Error profile of a verifier against per-element ground truth
/// ("positive" means the element is truly present).
VeErrorRates ve_error_rates(const std::vector<backends::EntailmentVerdict>& verdicts,
                            const std::vector<bool>& truth);

/// Everything the study reports about one proxy/actual series. RMSE and MAE
/// are on the percent scale (1.0 == one percentage point) regardless of the
/// input scale, matching how such tables are usually read; correlations are
/// scale-free anyway.
struct AgreementReport {
  std::string series_name;
  std::size_t n = 0;
  std::optional<double> pearson_r;
  std::optional<double> pearson_p;
  std::optional<double> kendall_tau;
  std::optional<double> rmse;
  std::optional<double> mae;
  std::vector<double> residuals;  // proxy - actual, unit scale
  std::optional<double> micro_f1;
  std::optional<double> fpr;
  std::optional<double> fnr;
  std::vector<std::string> flags;
  std::string tau_variant = "tau_b";

  bool has_flag(std::string_view flag) const;
};

/// Assembles the full statistics block for one series.
AgreementReport compute_agreement(const PairedSeries& series, std::string name);

}  // namespace floweval::agreement
