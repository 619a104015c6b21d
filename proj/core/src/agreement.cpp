#include "floweval/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace floweval::agreement {

namespace {

/// Regularized incomplete beta I_x(a, b) via the continued fraction of
/// Lentz's method, with the symmetry flip for fast convergence.
double incomplete_beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * incomplete_beta_cf(a, b, x) / a;
  return 1.0 - front * incomplete_beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

void PairedSeries::validate() const {
  if (proxy.size() != actual.size())
    throw std::invalid_argument("paired series lengths differ");
  if (!ids.empty() && ids.size() != proxy.size())
    throw std::invalid_argument("ids length does not match series");
  double hi = scale == Scale::unit ? 1.0 : 100.0;
  for (std::size_t i = 0; i < proxy.size(); ++i) {
    if (proxy[i] < 0.0 || proxy[i] > hi || actual[i] < 0.0 || actual[i] > hi)
      throw std::invalid_argument("series value outside declared scale");
  }
}

PairedSeries PairedSeries::to_percent() const {
  if (scale == Scale::percent) return *this;
  PairedSeries out = *this;
  out.scale = Scale::percent;
  for (double& v : out.proxy) v *= 100.0;
  for (double& v : out.actual) v *= 100.0;
  return out;
}

ConfusionTally& ConfusionTally::operator+=(const ConfusionTally& other) {
  tp += other.tp;
  fp += other.fp;
  tn += other.tn;
  fn += other.fn;
  return *this;
}

std::optional<double> pearson(const PairedSeries& series) {
  std::size_t n = series.size();
  if (n < 2) return std::nullopt;
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += series.proxy[i];
    mean_y += series.actual[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = series.proxy[i] - mean_x;
    double dy = series.actual[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::optional<double> pearson_p_value(double r, std::size_t n) {
  if (n < 3) return std::nullopt;
  double df = static_cast<double>(n - 2);
  double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  // Two-sided: p = I_{df/(df+t^2)}(df/2, 1/2) with t^2 = r^2 df / (1 - r^2),
  // which simplifies to x = 1 - r^2.
  return incomplete_beta(df / 2.0, 0.5, 1.0 - r2);
}

std::optional<double> kendall_tau(const PairedSeries& series) {
  std::size_t n = series.size();
  if (n < 2) return std::nullopt;
  long long concordant = 0, discordant = 0, tied_x = 0, tied_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dx = series.proxy[i] - series.proxy[j];
      double dy = series.actual[i] - series.actual[j];
      if (dx == 0.0) ++tied_x;
      if (dy == 0.0) ++tied_y;
      if (dx == 0.0 || dy == 0.0) continue;
      if ((dx > 0.0) == (dy > 0.0))
        ++concordant;
      else
        ++discordant;
    }
  }
  long long n0 = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
  double denom = std::sqrt(static_cast<double>(n0 - tied_x)) *
                 std::sqrt(static_cast<double>(n0 - tied_y));
  if (denom == 0.0) return std::nullopt;
  double tau = static_cast<double>(concordant - discordant) / denom;
  return std::clamp(tau, -1.0, 1.0);
}

std::pair<double, double> rmse_mae(const PairedSeries& series) {
  std::size_t n = series.size();
  if (n == 0) return {0.0, 0.0};
  double sq = 0.0, ab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = series.proxy[i] - series.actual[i];
    sq += d * d;
    ab += std::fabs(d);
  }
  return {std::sqrt(sq / static_cast<double>(n)), ab / static_cast<double>(n)};
}

std::optional<double> micro_f1(const std::vector<ConfusionTally>& tallies) {
  ConfusionTally pool;
  for (const ConfusionTally& t : tallies) pool += t;
  std::size_t denom = 2 * pool.tp + pool.fp + pool.fn;
  if (denom == 0) return std::nullopt;
  return 2.0 * static_cast<double>(pool.tp) / static_cast<double>(denom);
}

VeErrorRates ve_error_rates(const std::vector<backends::EntailmentVerdict>& verdicts,
                            const std::vector<bool>& truth) {
  if (verdicts.size() != truth.size())
    throw std::invalid_argument("verdicts and truth lengths differ");
  VeErrorRates rates;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    bool judged = verdicts[i].entailed;
    bool present = truth[i];
    if (present && judged) ++rates.tally.tp;
    if (present && !judged) ++rates.tally.fn;
    if (!present && judged) ++rates.tally.fp;
    if (!present && !judged) ++rates.tally.tn;
  }
  std::size_t negatives = rates.tally.fp + rates.tally.tn;
  std::size_t positives = rates.tally.fn + rates.tally.tp;
  if (negatives > 0)
    rates.fpr = static_cast<double>(rates.tally.fp) / static_cast<double>(negatives);
  if (positives > 0)
    rates.fnr = static_cast<double>(rates.tally.fn) / static_cast<double>(positives);
  return rates;
}

bool AgreementReport::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

AgreementReport compute_agreement(const PairedSeries& series, std::string name) {
  series.validate();
  AgreementReport report;
  report.series_name = std::move(name);
  report.n = series.size();

  report.pearson_r = pearson(series);
  if (!report.pearson_r && report.n >= 2) report.flags.emplace_back(kFlagConstantSeries);
  if (report.pearson_r) report.pearson_p = pearson_p_value(*report.pearson_r, report.n);

  report.kendall_tau = kendall_tau(series);
  if (!report.kendall_tau && report.n >= 2) report.flags.emplace_back(kFlagAllTied);

  PairedSeries percent = series.to_percent();
  auto [rmse, mae] = rmse_mae(percent);
  report.rmse = rmse;
  report.mae = mae;

  PairedSeries unit = series;
  if (series.scale == Scale::percent) {
    for (double& v : unit.proxy) v /= 100.0;
    for (double& v : unit.actual) v /= 100.0;
    unit.scale = Scale::unit;
  }
  report.residuals.reserve(unit.size());
  for (std::size_t i = 0; i < unit.size(); ++i)
    report.residuals.push_back(unit.proxy[i] - unit.actual[i]);
  return report;
}

}  // namespace floweval::agreement
