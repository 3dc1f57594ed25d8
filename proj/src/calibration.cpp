#include "uqeval/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "uqeval/error.hpp"
#include "uqeval/text.hpp"

namespace uqeval {
namespace {

double edge(std::size_t m, std::size_t n_bins) {
  return static_cast<double>(m) / static_cast<double>(n_bins);
}

}  // namespace

std::size_t bin_assign(double confidence, std::size_t n_bins) {
  if (n_bins < 1) throw ValidationError("need at least one calibration bin");
  if (!(confidence >= 0.0 && confidence <= 1.0))
    throw ValidationError("confidence outside [0,1]");
  auto m = static_cast<std::size_t>(
      std::ceil(confidence * static_cast<double>(n_bins)));
  m = std::clamp<std::size_t>(m, 1, n_bins);
  // confidence * M can round across an edge; settle against the exact
  // double edges.
  while (m > 1 && confidence <= edge(m - 1, n_bins)) --m;
  while (m < n_bins && confidence > edge(m, n_bins)) ++m;
  return m;
}

CalibrationReport calibration_report(std::span<const CalibrationSample> samples,
                                     std::size_t n_bins) {
  if (n_bins < 1) throw ValidationError("need at least one calibration bin");
  if (samples.empty()) throw ValidationError("calibration needs at least one sample");

  std::vector<std::size_t> counts(n_bins, 0), correct(n_bins, 0);
  // Extended precision keeps e.g. ten copies of 0.8 averaging to exactly 0.8.
  std::vector<long double> conf_sum(n_bins, 0.0L);
  for (const auto& s : samples) {
    const std::size_t m = bin_assign(s.confidence, n_bins) - 1;
    ++counts[m];
    if (s.correct) ++correct[m];
    conf_sum[m] += s.confidence;
  }

  CalibrationReport r;
  r.n_bins = n_bins;
  r.n = samples.size();
  const double n = static_cast<double>(r.n);
  for (std::size_t m = 0; m < n_bins; ++m) {
    CalibrationBin b;
    b.index = m + 1;
    b.lo = edge(m, n_bins);
    b.hi = edge(m + 1, n_bins);
    b.count = counts[m];
    if (b.count > 0) {
      const double k = static_cast<double>(b.count);
      b.accuracy = static_cast<double>(correct[m]) / k;
      b.confidence = static_cast<double>(conf_sum[m] / static_cast<long double>(b.count));
      r.ece += (k / n) * std::abs(*b.accuracy - *b.confidence);
    }
    r.bins.push_back(b);
  }
  return r;
}

std::vector<CalibrationSample> calibration_samples(
    std::span<const PredictiveSummary> summaries, const LabelSet& labels) {
  const auto ids = summary_ids(summaries);
  const std::size_t C = summaries.empty() ? 0 : summaries.front().mean.size();
  const auto aligned = align_labels(ids, labels, C);
  std::vector<CalibrationSample> out(summaries.size());
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    out[i].confidence = summaries[i].confidence;
    out[i].correct = summaries[i].predicted_class == aligned[i];
  }
  return out;
}

CalibrationReport calibration_report(std::span<const PredictiveSummary> summaries,
                                     const LabelSet& labels, std::size_t n_bins) {
  const auto samples = calibration_samples(summaries, labels);
  return calibration_report(samples, n_bins);
}

double ece_from_bins(const CalibrationReport& report) {
  double ece = 0.0;
  for (const auto& b : report.bins) {
    if (b.count == 0) continue;
    ece += static_cast<double>(b.count) / static_cast<double>(report.n) *
           std::abs(*b.accuracy - *b.confidence);
  }
  return ece;
}

std::vector<ReliabilityRow> reliability_diagram_data(const CalibrationReport& r) {
  std::vector<ReliabilityRow> rows;
  rows.reserve(r.bins.size());
  for (const auto& b : r.bins) {
    ReliabilityRow row;
    row.bin = b.index;
    row.lo = b.lo;
    row.hi = b.hi;
    row.midpoint = 0.5 * (b.lo + b.hi);
    row.count = b.count;
    row.accuracy = b.accuracy;
    row.confidence = b.confidence;
    if (b.count > 0) row.gap = std::abs(*b.accuracy - *b.confidence);
    rows.push_back(row);
  }
  return rows;
}

std::string render_reliability_csv(std::span<const ReliabilityRow> rows) {
  std::string out = "bin,lo,hi,count,accuracy,confidence,gap\n";
  for (const auto& r : rows) {
    out += std::to_string(r.bin) + ',' + text::format_double(r.lo, 17) + ',' +
           text::format_double(r.hi, 17) + ',' + std::to_string(r.count) + ',' +
           text::format_optional(r.accuracy) + ',' +
           text::format_optional(r.confidence) + ',' +
           text::format_optional(r.gap) + '\n';
  }
  return out;
}

std::vector<ReliabilityRow> parse_reliability_csv(std::string_view content) {
  std::vector<ReliabilityRow> rows;
  std::size_t start = 0;
  bool header = true;
  auto opt = [](std::string_view f) -> std::optional<double> {
    if (text::trim(f) == "n/a") return std::nullopt;
    const auto v = text::parse_double(f);
    if (!v) throw ParseError("malformed reliability value '" + std::string(f) + "'");
    return v;
  };
  while (start < content.size()) {
    auto nl = content.find('\n', start);
    if (nl == std::string_view::npos) nl = content.size();
    const auto line = content.substr(start, nl - start);
    start = nl + 1;
    if (text::trim(line).empty()) continue;
    if (header) {
      if (text::trim(line) != "bin,lo,hi,count,accuracy,confidence,gap")
        throw ParseError("bad reliability header");
      header = false;
      continue;
    }
    const auto f = text::split_csv(line);
    if (f.size() != 7) throw ParseError("reliability row needs 7 fields");
    const auto bin = text::parse_int(f[0]);
    const auto count = text::parse_int(f[3]);
    const auto lo = text::parse_double(f[1]);
    const auto hi = text::parse_double(f[2]);
    if (!bin || !count || !lo || !hi || *bin < 1 || *count < 0)
      throw ParseError("malformed reliability row");
    ReliabilityRow r;
    r.bin = static_cast<std::size_t>(*bin);
    r.lo = *lo;
    r.hi = *hi;
    r.midpoint = 0.5 * (r.lo + r.hi);
    r.count = static_cast<std::size_t>(*count);
    r.accuracy = opt(f[4]);
    r.confidence = opt(f[5]);
    r.gap = opt(f[6]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace uqeval
