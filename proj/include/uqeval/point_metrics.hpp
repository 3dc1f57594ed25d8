#pragma once

// Point-prediction metrics and the paired t-test used to compare metric
// distributions collected over repeated training runs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uqeval/aggregate.hpp"
#include "uqeval/tensor.hpp"

namespace uqeval {

double accuracy(std::span<const int> predicted, std::span<const int> labels);
double accuracy(std::span<const PredictiveSummary> summaries,
                const LabelSet& labels);

// Mann-Whitney estimate of P(score_pos > score_neg) + 0.5 P(tie), computed
// from average ranks in O(n log n). Labels must be 0/1 with both present.
double auc_binary(std::span<const double> scores, std::span<const int> labels);
// Uses mean[1] as the positive-class score; requires two classes.
double auc_binary(std::span<const PredictiveSummary> summaries,
                  const LabelSet& labels);

// I_x(a, b) by continued fraction (Lentz), 1e-14 convergence, at most 300
// terms.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);
// P(|T| >= |t|) for T ~ Student-t(df).
double student_t_two_sided_p(double t, double df);
double normal_cdf(double x);

struct MetricDistribution {
  std::string name;  // "accuracy", "auc", ...
  std::vector<double> values;
  std::vector<std::uint64_t> run_seeds;

  // Throws ValidationError on non-finite values or a seed/value mismatch.
  void validate() const;
};

struct PairedTestResult {
  double t_statistic = 0.0;
  std::size_t degrees_of_freedom = 1;
  double p_value = 1.0;
  double mean_difference = 0.0;
  // Set when the differences have zero variance; t is then 0 or +-inf.
  bool degenerate = false;
};

// Two-sided paired t-test on d = a - b. Requires equal run counts >= 2 and
// identical seed order.
PairedTestResult paired_t_test(const MetricDistribution& a,
                               const MetricDistribution& b);

struct DistributionStats {
  double mean = 0.0;
  double sd = 0.0;  // unbiased; 0 for a single value
};

DistributionStats describe(std::span<const double> values);

// Spearman rank correlation (average ranks for ties). nullopt when either
// side is constant or fewer than two points are given.
std::optional<double> spearman(std::span<const double> x,
                               std::span<const double> y);

struct RunEvaluation {
  std::uint64_t seed = 0;
  std::vector<PredictiveSummary> summaries;
  LabelSet labels{{}, {}};
};

struct MetricComparison {
  std::string metric;
  MetricDistribution a;
  MetricDistribution b;
  DistributionStats stats_a;
  DistributionStats stats_b;
  PairedTestResult test;
};

struct ModelComparison {
  MetricComparison accuracy;
  // Present only when every run is a binary task with both classes present.
  std::optional<MetricComparison> auc;
};

MetricComparison compare_metric(MetricDistribution a, MetricDistribution b);
ModelComparison compare_models(std::span<const RunEvaluation> runs_a,
                               std::span<const RunEvaluation> runs_b);

}  // namespace uqeval
