#include "uqeval/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "uqeval/error.hpp"
#include "uqeval/text.hpp"

namespace uqeval {
namespace {

// Inside the log only; keeps 0 * log(0) finite without moving any result.
constexpr double kLogFloor = 1e-300;
constexpr double kDistributionTolerance = 1e-6;

double log_in(double p, LogBase base) {
  const double x = std::clamp(p, kLogFloor, 1.0);
  return base == LogBase::Two ? std::log2(x) : std::log(x);
}

}  // namespace

std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Mcd: return "mcd";
    case SchemeKind::Ensemble: return "ensemble";
    case SchemeKind::Emcd: return "emcd";
  }
  return "?";
}

SchemeKind parse_scheme_kind(std::string_view s) {
  if (s == "mcd") return SchemeKind::Mcd;
  if (s == "ensemble") return SchemeKind::Ensemble;
  if (s == "emcd") return SchemeKind::Emcd;
  throw ValidationError("unknown aggregation scheme '" + std::string(s) + "'");
}

AggregationScheme AggregationScheme::emcd(std::vector<std::size_t> parts) {
  if (parts.empty()) throw ValidationError("EMCD partition is empty");
  for (auto p : parts)
    if (p < 1) throw ValidationError("EMCD partition part must be >= 1");
  return AggregationScheme(SchemeKind::Emcd, std::move(parts));
}

void AggregationScheme::validate_for(std::size_t n_passes) const {
  if (kind_ != SchemeKind::Emcd) return;
  const auto total = std::accumulate(parts_.begin(), parts_.end(), std::size_t{0});
  if (total != n_passes) {
    throw ValidationError("EMCD partition covers " + std::to_string(total) +
                          " passes but the tensor has " +
                          std::to_string(n_passes));
  }
}

std::vector<std::size_t> parse_partition(std::string_view spec) {
  spec = text::trim(spec);
  auto bad = [&] {
    return ValidationError("malformed partition '" + std::string(spec) +
                           "' (expected KxT or a comma list)");
  };
  const auto x = spec.find('x');
  std::vector<std::size_t> parts;
  if (x != std::string_view::npos) {
    const auto k = text::parse_int(spec.substr(0, x));
    const auto t = text::parse_int(spec.substr(x + 1));
    if (!k || !t || *k < 1 || *t < 1) throw bad();
    parts.assign(static_cast<std::size_t>(*k), static_cast<std::size_t>(*t));
    return parts;
  }
  for (auto f : text::split_csv(spec)) {
    const auto v = text::parse_int(f);
    if (!v || *v < 1) throw bad();
    parts.push_back(static_cast<std::size_t>(*v));
  }
  return parts;
}

std::vector<double> predictive_mean(std::span<const double> rows,
                                    std::size_t n_classes) {
  if (n_classes == 0 || rows.empty() || rows.size() % n_classes != 0)
    throw ValidationError("predictive mean needs at least one full pass row");
  const std::size_t T = rows.size() / n_classes;
  std::vector<double> mean(n_classes, 0.0);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t c = 0; c < n_classes; ++c) mean[c] += rows[t * n_classes + c];
  for (double& m : mean) m /= static_cast<double>(T);
  return mean;
}

double predictive_entropy(std::span<const double> mean, LogBase base) {
  if (mean.size() < 2) throw ValidationError("entropy needs at least two classes");
  double sum = 0.0;
  for (double p : mean) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0 + kDistributionTolerance)
      throw ValidationError("entropy input is not a probability vector");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance)
    throw ValidationError("entropy input does not sum to 1");

  double h = 0.0;
  for (double p : mean)
    if (p > 0.0) h -= p * log_in(p, base);
  return std::clamp(h, 0.0, max_entropy(mean.size(), base));
}

double max_entropy(std::size_t n_classes, LogBase base) {
  const double c = static_cast<double>(n_classes);
  return base == LogBase::Two ? std::log2(c) : std::log(c);
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

PredictiveSummary summarize(std::string sample_id, std::vector<double> mean,
                            LogBase base) {
  PredictiveSummary s;
  s.sample_id = std::move(sample_id);
  s.predicted_class = static_cast<int>(argmax(mean));
  s.confidence = mean[static_cast<std::size_t>(s.predicted_class)];
  s.entropy = predictive_entropy(mean, base);
  s.normalized_entropy =
      std::clamp(s.entropy / max_entropy(mean.size(), base), 0.0, 1.0);
  s.mean = std::move(mean);
  return s;
}

std::vector<PredictiveSummary> aggregate(const PredictionTensor& t,
                                         const AggregationScheme& scheme,
                                         LogBase base) {
  scheme.validate_for(t.n_passes());
  const std::size_t C = t.n_classes();
  std::vector<PredictiveSummary> out;
  out.reserve(t.n_samples());
  for (std::size_t s = 0; s < t.n_samples(); ++s) {
    const auto rows = t.sample_rows(s);
    std::vector<double> mean;
    if (scheme.kind() == SchemeKind::Emcd) {
      // Average within each member's block, then across member means.
      mean.assign(C, 0.0);
      std::size_t offset = 0;
      for (const std::size_t part : scheme.member_pass_counts()) {
        const auto member = predictive_mean(rows.subspan(offset * C, part * C), C);
        for (std::size_t c = 0; c < C; ++c) mean[c] += member[c];
        offset += part;
      }
      const double k = static_cast<double>(scheme.member_pass_counts().size());
      for (double& m : mean) m /= k;
    } else {
      mean = predictive_mean(rows, C);
    }
    out.push_back(summarize(t.sample_ids()[s], std::move(mean), base));
  }
  return out;
}

std::vector<double> pass_variance(std::span<const double> rows,
                                  std::size_t n_classes) {
  if (n_classes == 0 || rows.size() % n_classes != 0)
    throw ValidationError("pass rows are not a whole number of rows");
  const std::size_t T = rows.size() / n_classes;
  if (T < 2) throw ValidationError("pass variance needs at least two passes");
  const auto mean = predictive_mean(rows, n_classes);
  std::vector<double> var(n_classes, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < n_classes; ++c) {
      const double d = rows[t * n_classes + c] - mean[c];
      var[c] += d * d;
    }
  }
  for (double& v : var) v /= static_cast<double>(T - 1);
  return var;
}

std::string render_summaries(std::span<const PredictiveSummary> summaries) {
  std::string out = "sample_id,predicted_class,confidence,entropy,normalized_entropy";
  const std::size_t C = summaries.empty() ? 0 : summaries.front().mean.size();
  for (std::size_t c = 0; c < C; ++c) out += ",p_" + std::to_string(c);
  out += '\n';
  for (const auto& s : summaries) {
    out += s.sample_id;
    out += ',' + std::to_string(s.predicted_class);
    out += ',' + text::format_double(s.confidence, 17);
    out += ',' + text::format_double(s.entropy, 17);
    out += ',' + text::format_double(s.normalized_entropy, 17);
    for (double p : s.mean) out += ',' + text::format_double(p, 17);
    out += '\n';
  }
  return out;
}

std::vector<PredictiveSummary> parse_summaries(std::string_view content,
                                               const std::string& source) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    auto nl = content.find('\n', start);
    if (nl == std::string_view::npos) nl = content.size();
    lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  std::size_t i = 0;
  while (i < lines.size() && text::trim(lines[i]).empty()) ++i;
  if (i == lines.size()) throw ParseError(source + ": empty summary file");
  const auto header = text::split_csv(lines[i]);
  static constexpr std::string_view kFixed[] = {
      "sample_id", "predicted_class", "confidence", "entropy", "normalized_entropy"};
  if (header.size() < 7) throw ParseError(text::where(source, i + 1) + "bad summary header");
  for (std::size_t k = 0; k < 5; ++k)
    if (text::trim(header[k]) != kFixed[k])
      throw ParseError(text::where(source, i + 1) + "bad summary header");
  const std::size_t C = header.size() - 5;

  std::vector<PredictiveSummary> out;
  std::unordered_set<std::string> seen;
  for (++i; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const std::string ctx = text::where(source, i + 1);
    const auto f = text::split_csv(lines[i]);
    if (f.size() != C + 5) throw ParseError(ctx + "wrong field count");
    PredictiveSummary s;
    s.sample_id = std::string(text::trim(f[0]));
    if (s.sample_id.empty() || !seen.insert(s.sample_id).second)
      throw ParseError(ctx + "empty or duplicate sample_id");
    const auto cls = text::parse_int(f[1]);
    const auto conf = text::parse_double(f[2]);
    const auto h = text::parse_double(f[3]);
    const auto hn = text::parse_double(f[4]);
    if (!cls || !conf || !h || !hn) throw ParseError(ctx + "malformed number");
    if (*cls < 0 || static_cast<std::size_t>(*cls) >= C)
      throw ParseError(ctx + "predicted_class out of range");
    if (*h < 0.0 || *hn < 0.0 || *hn > 1.0)
      throw ParseError(ctx + "entropy out of range");
    s.predicted_class = static_cast<int>(*cls);
    s.confidence = *conf;
    s.entropy = *h;
    s.normalized_entropy = *hn;
    for (std::size_t c = 0; c < C; ++c) {
      const auto p = text::parse_double(f[5 + c]);
      if (!p) throw ParseError(ctx + "malformed probability");
      s.mean.push_back(*p);
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw ParseError(source + ": no summary rows");
  return out;
}

void save_summaries(std::span<const PredictiveSummary> summaries,
                    const std::string& path) {
  text::write_file(path, render_summaries(summaries));
}

std::vector<PredictiveSummary> load_summaries(const std::string& path) {
  std::string content;
  for (const auto& l : text::read_lines(path)) {
    content += l;
    content += '\n';
  }
  return parse_summaries(content, path);
}

std::vector<std::string> summary_ids(std::span<const PredictiveSummary> s) {
  std::vector<std::string> ids;
  ids.reserve(s.size());
  for (const auto& x : s) ids.push_back(x.sample_id);
  return ids;
}

}  // namespace uqeval
