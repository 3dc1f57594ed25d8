#pragma once

// Uncertainty confusion matrix: each prediction is crossed by correctness
// (predicted class == label) and certainty (uncertainty below a threshold).
//
//                 correct   incorrect
//    certain        TC         FC
//    uncertain      FU         TU
//
// A prediction is uncertain iff uncertainty >= threshold, so threshold 0
// trusts nothing. Ratios with an empty denominator are std::nullopt and are
// never coerced to 0.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uqeval/aggregate.hpp"
#include "uqeval/tensor.hpp"

namespace uqeval {

enum class Outcome { TC, TU, FU, FC };

std::string_view to_string(Outcome o);

// Which summary column is compared against the threshold.
enum class EntropyScale { Normalized, Raw };

using Ratio = std::optional<double>;

struct ScoredPrediction {
  bool correct = false;
  double uncertainty = 0.0;
};

Outcome classify_outcome(bool correct, double uncertainty, double threshold);

struct UncertaintyConfusion {
  double threshold = 0.0;
  std::size_t tc = 0;
  std::size_t tu = 0;
  std::size_t fu = 0;
  std::size_t fc = 0;

  std::size_t n() const noexcept { return tc + tu + fu + fc; }
  friend bool operator==(const UncertaintyConfusion&,
                         const UncertaintyConfusion&) = default;
};

// TU / (TU + FC): share of errors that were flagged.
Ratio usen(const UncertaintyConfusion& m);
// TC / (TC + FU): share of correct predictions left unflagged.
Ratio uspe(const UncertaintyConfusion& m);
// TU / (TU + FU): share of flagged predictions that were errors.
Ratio upre(const UncertaintyConfusion& m);
// (TU + TC) / n.
Ratio uacc(const UncertaintyConfusion& m);

// Joins summaries with labels (by id) and extracts (correct, uncertainty).
std::vector<ScoredPrediction> score_predictions(
    std::span<const PredictiveSummary> summaries, const LabelSet& labels,
    EntropyScale scale = EntropyScale::Normalized);

// Throws ValidationError for a threshold outside [0,1].
void validate_threshold(double threshold);

UncertaintyConfusion build_ucm(std::span<const ScoredPrediction> scored,
                               double threshold);
UncertaintyConfusion build_ucm(std::span<const PredictiveSummary> summaries,
                               const LabelSet& labels, double threshold,
                               EntropyScale scale = EntropyScale::Normalized);

struct SweepPoint {
  UncertaintyConfusion ucm;
  Ratio uacc;
  Ratio usen;
  Ratio uspe;
  Ratio upre;
};

struct SweepCurve {
  std::vector<SweepPoint> points;
};

SweepPoint make_sweep_point(const UncertaintyConfusion& m);

// Thresholds must be strictly increasing and inside [0,1].
SweepCurve threshold_sweep(std::span<const ScoredPrediction> scored,
                           std::span<const double> thresholds);
SweepCurve threshold_sweep(std::span<const PredictiveSummary> summaries,
                           const LabelSet& labels,
                           std::span<const double> thresholds,
                           EntropyScale scale = EntropyScale::Normalized);

// start, start+step, ... up to stop inclusive; values rounded to 1e-12 so
// that "0.1:0.1:0.9" yields exactly the literals 0.1 ... 0.9.
std::vector<double> threshold_grid(double start, double step, double stop);
// Parses "start:step:stop".
std::vector<double> parse_grid(std::string_view spec);

struct GroupStats {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
};

// Uncertainty statistics of correctly vs. incorrectly classified samples.
// A group without members is nullopt, and so is the difference then.
struct SeparationReport {
  std::optional<GroupStats> correct;
  std::optional<GroupStats> incorrect;
  std::optional<double> mean_difference;    // incorrect.mean - correct.mean
  std::optional<double> median_difference;  // incorrect.median - correct.median
};

SeparationReport separation_report(std::span<const ScoredPrediction> scored);
SeparationReport separation_report(std::span<const PredictiveSummary> summaries,
                                   const LabelSet& labels);

}  // namespace uqeval
