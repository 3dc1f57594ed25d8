#pragma once

// Expected calibration error over M equal-width confidence bins
// ((m-1)/M, m/M], and the per-bin table behind a reliability diagram.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uqeval/aggregate.hpp"
#include "uqeval/tensor.hpp"

namespace uqeval {

struct CalibrationSample {
  double confidence = 0.0;  // max component of the predictive mean
  bool correct = false;
};

struct CalibrationBin {
  std::size_t index = 1;  // 1-based
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  // nullopt for empty bins.
  std::optional<double> accuracy;
  std::optional<double> confidence;
};

struct CalibrationReport {
  std::size_t n_bins = 10;
  std::vector<CalibrationBin> bins;
  double ece = 0.0;
  std::size_t n = 0;
};

// 1-based bin of `confidence` for M bins. Bin m holds (m-1)/M < c <= m/M
// with both edges evaluated as doubles; confidence 0 goes to bin 1.
std::size_t bin_assign(double confidence, std::size_t n_bins);

CalibrationReport calibration_report(std::span<const CalibrationSample> samples,
                                     std::size_t n_bins = 10);
CalibrationReport calibration_report(std::span<const PredictiveSummary> summaries,
                                     const LabelSet& labels,
                                     std::size_t n_bins = 10);

std::vector<CalibrationSample> calibration_samples(
    std::span<const PredictiveSummary> summaries, const LabelSet& labels);

// ECE recomputed from the per-bin table alone.
double ece_from_bins(const CalibrationReport& report);

struct ReliabilityRow {
  std::size_t bin = 1;
  double lo = 0.0;
  double hi = 0.0;
  double midpoint = 0.0;
  std::size_t count = 0;
  std::optional<double> accuracy;
  std::optional<double> confidence;
  std::optional<double> gap;  // |accuracy - confidence|

  friend bool operator==(const ReliabilityRow&, const ReliabilityRow&) = default;
};

std::vector<ReliabilityRow> reliability_diagram_data(const CalibrationReport& r);

// CSV "bin,lo,hi,count,accuracy,confidence,gap"; empty cells are "n/a".
std::string render_reliability_csv(std::span<const ReliabilityRow> rows);
std::vector<ReliabilityRow> parse_reliability_csv(std::string_view content);

}  // namespace uqeval
