#pragma once

// Static SVG plots. Every document has a fixed viewBox, axis labels, and the
// run-manifest digest in <metadata>.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uqeval/calibration.hpp"
#include "uqeval/point_metrics.hpp"
#include "uqeval/ucm.hpp"

namespace uqeval::svg {

struct NamedCurve {
  std::string name;
  SweepCurve curve;
};

// Four panels (UAcc, USen, USpe, UPre vs. threshold); one polyline per
// metric and curve. Undefined points are skipped.
std::string sweep_panels(std::span<const NamedCurve> curves, std::string_view digest);

// Accuracy bars per non-empty bin, gap bars up to the bin confidence, and
// the identity line. Empty bins draw nothing.
std::string reliability_diagram(const CalibrationReport& report,
                                std::string_view title, std::string_view digest);

// Density histograms of uncertainty for correct vs. misclassified samples.
std::string separation_histogram(std::span<const ScoredPrediction> scored,
                                 std::string_view title, std::string_view digest);

// Mirrored Gaussian-KDE violins (Silverman bandwidth), model A vs. B per
// metric.
std::string violin_plot(const ModelComparison& comparison, std::string_view digest);

// Gaussian KDE evaluated on `grid`; bandwidth by Silverman's rule with a
// floor for degenerate samples.
std::vector<double> kde(std::span<const double> values, std::span<const double> grid);
double silverman_bandwidth(std::span<const double> values);

std::string escape(std::string_view s);

}  // namespace uqeval::svg
