#include "uqeval/point_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "uqeval/error.hpp"

namespace uqeval {
namespace {

constexpr double kBetaEpsilon = 1e-14;
constexpr int kBetaMaxIterations = 300;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a,b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kBetaEpsilon) break;
  }
  return h;
}

// I_x(a,b) given both x and y = 1 - x, so callers can supply y without
// cancellation.
double incomplete_beta_xy(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    // Ranks i+1 .. j+1 share their average.
    const double r = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double accuracy(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size())
    throw ValidationError("prediction and label counts differ");
  if (predicted.empty()) throw ValidationError("accuracy needs at least one sample");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double accuracy(std::span<const PredictiveSummary> summaries,
                const LabelSet& labels) {
  const auto ids = summary_ids(summaries);
  const std::size_t C = summaries.empty() ? 0 : summaries.front().mean.size();
  const auto aligned = align_labels(ids, labels, C);
  std::vector<int> predicted;
  predicted.reserve(summaries.size());
  for (const auto& s : summaries) predicted.push_back(s.predicted_class);
  return accuracy(predicted, aligned);
}

double auc_binary(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw ValidationError("score and label counts differ");
  std::size_t n_pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError("AUC labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(l);
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw ValidationError("AUC needs both classes present");
  for (double s : scores)
    if (std::isnan(s)) throw ValidationError("NaN score");

  const auto ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (labels[i] == 1) rank_sum += ranks[i];
  const double np = static_cast<double>(n_pos);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double auc_binary(std::span<const PredictiveSummary> summaries,
                  const LabelSet& labels) {
  if (summaries.empty() || summaries.front().mean.size() != 2)
    throw ValidationError("AUC is defined for binary tasks only");
  const auto ids = summary_ids(summaries);
  const auto aligned = align_labels(ids, labels, 2);
  std::vector<double> scores;
  scores.reserve(summaries.size());
  for (const auto& s : summaries) scores.push_back(s.mean[1]);
  return auc_binary(scores, aligned);
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("beta parameters must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("beta argument outside [0,1]");
  return incomplete_beta_xy(a, b, x, 1.0 - x);
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("degrees of freedom must be > 0");
  if (std::isnan(t)) throw ValidationError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  return std::clamp(incomplete_beta_xy(0.5 * df, 0.5, x, y), 0.0, 1.0);
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

void MetricDistribution::validate() const {
  if (values.size() != run_seeds.size())
    throw ValidationError("metric '" + name + "': values and seeds differ in length");
  for (double v : values)
    if (!std::isfinite(v)) throw ValidationError("metric '" + name + "' has non-finite value");
}

PairedTestResult paired_t_test(const MetricDistribution& a,
                               const MetricDistribution& b) {
  a.validate();
  b.validate();
  if (a.values.size() != b.values.size())
    throw ValidationError("paired test needs equal run counts (" +
                          std::to_string(a.values.size()) + " vs " +
                          std::to_string(b.values.size()) + ")");
  if (a.values.size() < 2) throw ValidationError("paired test needs at least 2 runs");
  if (a.run_seeds != b.run_seeds)
    throw ValidationError("paired test needs identical run seeds in the same order");

  const std::size_t n = a.values.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a.values[i] - b.values[i];

  PairedTestResult r;
  r.degrees_of_freedom = n - 1;
  const auto stats = describe(d);
  r.mean_difference = stats.mean;
  const bool constant = std::all_of(d.begin(), d.end(), [&](double v) { return v == d[0]; });
  if (constant) {
    r.degenerate = true;
    if (d[0] == 0.0) {
      r.mean_difference = 0.0;
      r.t_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.mean_difference = d[0];
      r.t_statistic = d[0] > 0 ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
    return r;
  }
  r.t_statistic = stats.mean / (stats.sd / std::sqrt(static_cast<double>(n)));
  r.p_value = student_t_two_sided_p(r.t_statistic, static_cast<double>(n - 1));
  return r;
}

DistributionStats describe(std::span<const double> values) {
  DistributionStats s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return s;
}

std::optional<double> spearman(std::span<const double> x,
                               std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const auto sx = describe(rx);
  const auto sy = describe(ry);
  if (sx.sd == 0.0 || sy.sd == 0.0) return std::nullopt;
  double cov = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i)
    cov += (rx[i] - sx.mean) * (ry[i] - sy.mean);
  cov /= static_cast<double>(rx.size() - 1);
  return cov / (sx.sd * sy.sd);
}

MetricComparison compare_metric(MetricDistribution a, MetricDistribution b) {
  MetricComparison c;
  c.metric = a.name;
  c.test = paired_t_test(a, b);
  c.stats_a = describe(a.values);
  c.stats_b = describe(b.values);
  c.a = std::move(a);
  c.b = std::move(b);
  return c;
}

ModelComparison compare_models(std::span<const RunEvaluation> runs_a,
                               std::span<const RunEvaluation> runs_b) {
  if (runs_a.size() != runs_b.size())
    throw ValidationError("cannot pair " + std::to_string(runs_a.size()) +
                          " runs with " + std::to_string(runs_b.size()));
  MetricDistribution acc_a{"accuracy", {}, {}}, acc_b{"accuracy", {}, {}};
  MetricDistribution auc_a{"auc", {}, {}}, auc_b{"auc", {}, {}};
  bool auc_ok = true;
  auto auc_defined = [](const RunEvaluation& r) {
    if (r.summaries.empty() || r.summaries.front().mean.size() != 2) return false;
    const auto& l = r.labels.labels();
    return std::count(l.begin(), l.end(), 1) > 0 && std::count(l.begin(), l.end(), 0) > 0;
  };
  for (std::size_t i = 0; i < runs_a.size(); ++i) {
    const auto& ra = runs_a[i];
    const auto& rb = runs_b[i];
    if (ra.seed != rb.seed)
      throw ValidationError("run " + std::to_string(i) + " seeds differ (" +
                            std::to_string(ra.seed) + " vs " +
                            std::to_string(rb.seed) + ")");
    acc_a.values.push_back(accuracy(ra.summaries, ra.labels));
    acc_b.values.push_back(accuracy(rb.summaries, rb.labels));
    acc_a.run_seeds.push_back(ra.seed);
    acc_b.run_seeds.push_back(rb.seed);
    if (auc_ok && auc_defined(ra) && auc_defined(rb)) {
      auc_a.values.push_back(auc_binary(ra.summaries, ra.labels));
      auc_b.values.push_back(auc_binary(rb.summaries, rb.labels));
      auc_a.run_seeds.push_back(ra.seed);
      auc_b.run_seeds.push_back(rb.seed);
    } else {
      auc_ok = false;
    }
  }
  ModelComparison out{compare_metric(std::move(acc_a), std::move(acc_b)), std::nullopt};
  if (auc_ok) out.auc = compare_metric(std::move(auc_a), std::move(auc_b));
  return out;
}

}  // namespace uqeval
