#include "uqeval/ucm.hpp"

#include <algorithm>
#include <cmath>

#include "uqeval/error.hpp"
#include "uqeval/text.hpp"

namespace uqeval {
namespace {

Ratio ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

void validate_uncertainty(double u) {
  if (!std::isfinite(u) || u < 0.0)
    throw ValidationError("uncertainty must be finite and >= 0");
}

GroupStats group_stats(std::vector<double> v) {
  GroupStats g;
  g.count = v.size();
  double sum = 0.0;
  for (double x : v) sum += x;
  g.mean = sum / static_cast<double>(v.size());
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  g.median = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  return g;
}

}  // namespace

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::TC: return "TC";
    case Outcome::TU: return "TU";
    case Outcome::FU: return "FU";
    case Outcome::FC: return "FC";
  }
  return "?";
}

Outcome classify_outcome(bool correct, double uncertainty, double threshold) {
  const bool uncertain = uncertainty >= threshold;
  if (correct) return uncertain ? Outcome::FU : Outcome::TC;
  return uncertain ? Outcome::TU : Outcome::FC;
}

Ratio usen(const UncertaintyConfusion& m) { return ratio(m.tu, m.tu + m.fc); }
Ratio uspe(const UncertaintyConfusion& m) { return ratio(m.tc, m.tc + m.fu); }
Ratio upre(const UncertaintyConfusion& m) { return ratio(m.tu, m.tu + m.fu); }
Ratio uacc(const UncertaintyConfusion& m) { return ratio(m.tu + m.tc, m.n()); }

std::vector<ScoredPrediction> score_predictions(
    std::span<const PredictiveSummary> summaries, const LabelSet& labels,
    EntropyScale scale) {
  const auto ids = summary_ids(summaries);
  const std::size_t C = summaries.empty() ? 0 : summaries.front().mean.size();
  const auto aligned = align_labels(ids, labels, C);
  std::vector<ScoredPrediction> out(summaries.size());
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    out[i].correct = summaries[i].predicted_class == aligned[i];
    out[i].uncertainty = scale == EntropyScale::Normalized
                             ? summaries[i].normalized_entropy
                             : summaries[i].entropy;
    validate_uncertainty(out[i].uncertainty);
  }
  return out;
}

void validate_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ValidationError("threshold " + text::format_double(threshold, 17) +
                          " outside [0,1]");
  }
}

UncertaintyConfusion build_ucm(std::span<const ScoredPrediction> scored,
                               double threshold) {
  validate_threshold(threshold);
  UncertaintyConfusion m;
  m.threshold = threshold;
  for (const auto& p : scored) {
    validate_uncertainty(p.uncertainty);
    switch (classify_outcome(p.correct, p.uncertainty, threshold)) {
      case Outcome::TC: ++m.tc; break;
      case Outcome::TU: ++m.tu; break;
      case Outcome::FU: ++m.fu; break;
      case Outcome::FC: ++m.fc; break;
    }
  }
  return m;
}

UncertaintyConfusion build_ucm(std::span<const PredictiveSummary> summaries,
                               const LabelSet& labels, double threshold,
                               EntropyScale scale) {
  validate_threshold(threshold);
  const auto scored = score_predictions(summaries, labels, scale);
  return build_ucm(scored, threshold);
}

SweepPoint make_sweep_point(const UncertaintyConfusion& m) {
  return SweepPoint{m, uacc(m), usen(m), uspe(m), upre(m)};
}

SweepCurve threshold_sweep(std::span<const ScoredPrediction> scored,
                           std::span<const double> thresholds) {
  if (thresholds.empty()) throw ValidationError("threshold list is empty");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    validate_threshold(thresholds[i]);
    if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
      throw ValidationError("thresholds must be strictly increasing");
  }
  // Certain iff u < thr, so the certain count in each group is a
  // lower_bound over its sorted uncertainties.
  std::vector<double> correct_u, incorrect_u;
  for (const auto& p : scored) {
    validate_uncertainty(p.uncertainty);
    (p.correct ? correct_u : incorrect_u).push_back(p.uncertainty);
  }
  std::sort(correct_u.begin(), correct_u.end());
  std::sort(incorrect_u.begin(), incorrect_u.end());

  SweepCurve curve;
  curve.points.reserve(thresholds.size());
  for (const double thr : thresholds) {
    UncertaintyConfusion m;
    m.threshold = thr;
    m.tc = static_cast<std::size_t>(
        std::lower_bound(correct_u.begin(), correct_u.end(), thr) - correct_u.begin());
    m.fu = correct_u.size() - m.tc;
    m.fc = static_cast<std::size_t>(
        std::lower_bound(incorrect_u.begin(), incorrect_u.end(), thr) -
        incorrect_u.begin());
    m.tu = incorrect_u.size() - m.fc;
    curve.points.push_back(make_sweep_point(m));
  }
  return curve;
}

SweepCurve threshold_sweep(std::span<const PredictiveSummary> summaries,
                           const LabelSet& labels,
                           std::span<const double> thresholds,
                           EntropyScale scale) {
  const auto scored = score_predictions(summaries, labels, scale);
  return threshold_sweep(scored, thresholds);
}

std::vector<double> threshold_grid(double start, double step, double stop) {
  if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop) || stop < start)
    throw ValidationError("grid needs step > 0 and start <= stop");
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) {
    const double v = start + static_cast<double>(i) * step;
    grid.push_back(std::round(v * 1e12) / 1e12);
  }
  return grid;
}

std::vector<double> parse_grid(std::string_view spec) {
  const auto a = spec.find(':');
  const auto b = a == std::string_view::npos ? a : spec.find(':', a + 1);
  if (b == std::string_view::npos)
    throw ValidationError("grid must look like start:step:stop");
  const auto start = text::parse_double(spec.substr(0, a));
  const auto step = text::parse_double(spec.substr(a + 1, b - a - 1));
  const auto stop = text::parse_double(spec.substr(b + 1));
  if (!start || !step || !stop)
    throw ValidationError("grid must look like start:step:stop");
  return threshold_grid(*start, *step, *stop);
}

SeparationReport separation_report(std::span<const ScoredPrediction> scored) {
  std::vector<double> correct_u, incorrect_u;
  for (const auto& p : scored)
    (p.correct ? correct_u : incorrect_u).push_back(p.uncertainty);
  SeparationReport r;
  if (!correct_u.empty()) r.correct = group_stats(std::move(correct_u));
  if (!incorrect_u.empty()) r.incorrect = group_stats(std::move(incorrect_u));
  if (r.correct && r.incorrect) {
    r.mean_difference = r.incorrect->mean - r.correct->mean;
    r.median_difference = r.incorrect->median - r.correct->median;
  }
  return r;
}

SeparationReport separation_report(std::span<const PredictiveSummary> summaries,
                                   const LabelSet& labels) {
  return separation_report(
      score_predictions(summaries, labels, EntropyScale::Normalized));
}

}  // namespace uqeval
