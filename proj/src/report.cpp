#include "uqeval/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "uqeval/text.hpp"

namespace uqeval::report {
namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string fixed(const Ratio& r, int decimals) {
  return r ? fixed(*r, decimals) : std::string("n/a");
}

std::string percent(const Ratio& r) {
  return r ? fixed(100.0 * *r, 1) + "%" : std::string("n/a");
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

Json number_or_string(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return Json(v);
}

}  // namespace

Json ratio_json(const Ratio& r) { return r ? Json(*r) : Json(nullptr); }

Json ucm_json(const UncertaintyConfusion& m) {
  const auto acc = uacc(m);
  Json j;
  j["threshold"] = m.threshold;
  j["tc"] = m.tc;
  j["tu"] = m.tu;
  j["fu"] = m.fu;
  j["fc"] = m.fc;
  j["n"] = m.n();
  j["uacc"] = ratio_json(acc);
  j["uacc_percent"] = acc ? Json(100.0 * *acc) : Json(nullptr);
  j["usen"] = ratio_json(usen(m));
  j["uspe"] = ratio_json(uspe(m));
  j["upre"] = ratio_json(upre(m));
  return j;
}

std::string ucm_text(const UncertaintyConfusion& m, std::string_view title) {
  std::ostringstream os;
  if (!title.empty()) os << title << '\n';
  os << "threshold " << text::format_double(m.threshold, 6) << ", n = " << m.n() << "\n\n";
  os << "               correct  incorrect\n";
  os << "  certain   " << pad("TC " + std::to_string(m.tc), 11)
     << pad("FC " + std::to_string(m.fc), 11) << '\n';
  os << "  uncertain " << pad("FU " + std::to_string(m.fu), 11)
     << pad("TU " + std::to_string(m.tu), 11) << "\n\n";
  os << "  UAcc  " << percent(uacc(m)) << '\n';
  os << "  USen  " << fixed(usen(m), 3) << '\n';
  os << "  USpe  " << fixed(uspe(m), 3) << '\n';
  os << "  UPre  " << fixed(upre(m), 3) << '\n';
  return os.str();
}

namespace {

std::string sweep_row(const SweepPoint& p) {
  const auto& m = p.ucm;
  return text::format_double(m.threshold, 17) + ',' + std::to_string(m.tc) + ',' +
         std::to_string(m.tu) + ',' + std::to_string(m.fu) + ',' +
         std::to_string(m.fc) + ',' + text::format_optional(p.uacc) + ',' +
         text::format_optional(p.usen) + ',' + text::format_optional(p.uspe) + ',' +
         text::format_optional(p.upre) + '\n';
}

constexpr std::string_view kSweepHeader = "threshold,tc,tu,fu,fc,uacc,usen,uspe,upre\n";

}  // namespace

std::string ucm_csv(const UncertaintyConfusion& m) {
  return std::string(kSweepHeader) + sweep_row(make_sweep_point(m));
}

std::string sweep_csv(const SweepCurve& curve) {
  std::string out(kSweepHeader);
  for (const auto& p : curve.points) out += sweep_row(p);
  return out;
}

Json sweep_json(const SweepCurve& curve) {
  Json arr = Json::array();
  for (const auto& p : curve.points) arr.push_back(ucm_json(p.ucm));
  return arr;
}

std::string sweep_text(const SweepCurve& curve) {
  std::ostringstream os;
  os << "threshold     TC     TU     FU     FC    UAcc   USen   USpe   UPre\n";
  for (const auto& p : curve.points) {
    const auto& m = p.ucm;
    os << pad(fixed(m.threshold, 3), 9) << pad(std::to_string(m.tc), 7)
       << pad(std::to_string(m.tu), 7) << pad(std::to_string(m.fu), 7)
       << pad(std::to_string(m.fc), 7) << pad(percent(p.uacc), 8)
       << pad(fixed(p.usen, 3), 7) << pad(fixed(p.uspe, 3), 7)
       << pad(fixed(p.upre, 3), 7) << '\n';
  }
  return os.str();
}

Json calibration_json(const CalibrationReport& r) {
  Json j;
  j["ece"] = r.ece;
  j["n"] = r.n;
  j["M"] = r.n_bins;
  Json bins = Json::array();
  for (const auto& row : reliability_diagram_data(r)) {
    Json b;
    b["bin"] = row.bin;
    b["lo"] = row.lo;
    b["hi"] = row.hi;
    b["count"] = row.count;
    b["accuracy"] = ratio_json(row.accuracy);
    b["confidence"] = ratio_json(row.confidence);
    b["gap"] = ratio_json(row.gap);
    bins.push_back(std::move(b));
  }
  j["bins"] = std::move(bins);
  return j;
}

std::string calibration_text(const CalibrationReport& r) {
  std::ostringstream os;
  os << "ECE " << fixed(r.ece, 4) << " (" << fixed(100.0 * r.ece, 2) << "%), n = " << r.n
     << ", M = " << r.n_bins << "\n\n";
  os << "  bin        range   count  accuracy  confidence     gap\n";
  for (const auto& row : reliability_diagram_data(r)) {
    os << pad(std::to_string(row.bin), 5) << "  (" << fixed(row.lo, 2) << ", "
       << fixed(row.hi, 2) << ']' << pad(std::to_string(row.count), 8)
       << pad(fixed(row.accuracy, 4), 10) << pad(fixed(row.confidence, 4), 12)
       << pad(fixed(row.gap, 4), 8) << '\n';
  }
  return os.str();
}

Json separation_json(const SeparationReport& r) {
  auto group = [](const std::optional<GroupStats>& g) {
    if (!g) return Json(nullptr);
    Json j;
    j["count"] = g->count;
    j["mean"] = g->mean;
    j["median"] = g->median;
    return j;
  };
  Json j;
  j["correct"] = group(r.correct);
  j["incorrect"] = group(r.incorrect);
  j["mean_difference"] = ratio_json(r.mean_difference);
  j["median_difference"] = ratio_json(r.median_difference);
  return j;
}

std::string separation_text(const SeparationReport& r) {
  std::ostringstream os;
  auto group = [&](const char* name, const std::optional<GroupStats>& g) {
    os << "  " << name;
    if (!g) {
      os << "absent (no samples)\n";
      return;
    }
    os << "n = " << g->count << ", mean " << fixed(g->mean, 4) << ", median "
       << fixed(g->median, 4) << '\n';
  };
  os << "normalized predictive entropy by correctness\n";
  group("correct:   ", r.correct);
  group("incorrect: ", r.incorrect);
  os << "  difference (incorrect - correct): mean " << fixed(r.mean_difference, 4)
     << ", median " << fixed(r.median_difference, 4) << '\n';
  return os.str();
}

Json comparison_json(const MetricComparison& c) {
  Json j;
  j["metric"] = c.metric;
  j["mean_a"] = c.stats_a.mean;
  j["sd_a"] = c.stats_a.sd;
  j["mean_b"] = c.stats_b.mean;
  j["sd_b"] = c.stats_b.sd;
  j["t"] = number_or_string(c.test.t_statistic);
  j["df"] = c.test.degrees_of_freedom;
  j["p"] = c.test.p_value;
  j["degenerate"] = c.test.degenerate;
  return j;
}

Json comparison_json(const ModelComparison& c) {
  Json arr = Json::array();
  arr.push_back(comparison_json(c.accuracy));
  if (c.auc) arr.push_back(comparison_json(*c.auc));
  return arr;
}

std::string comparison_text(const ModelComparison& c) {
  std::ostringstream os;
  auto line = [&](const MetricComparison& m) {
    os << "  " << m.metric << ": A " << fixed(m.stats_a.mean, 4) << " +- "
       << fixed(m.stats_a.sd, 4) << ", B " << fixed(m.stats_b.mean, 4) << " +- "
       << fixed(m.stats_b.sd, 4) << "; paired t = "
       << (std::isinf(m.test.t_statistic) ? std::string(m.test.t_statistic > 0 ? "inf" : "-inf")
                                          : fixed(m.test.t_statistic, 3))
       << ", df = " << m.test.degrees_of_freedom
       << ", p = " << text::format_double(m.test.p_value, 4)
       << (m.test.degenerate ? " (degenerate: zero-variance differences)" : "")
       << (m.test.p_value < 0.05 ? ", significant at 95%" : ", not significant at 95%")
       << '\n';
  };
  os << "paired comparison over " << c.accuracy.a.values.size() << " runs\n";
  line(c.accuracy);
  if (c.auc) line(*c.auc);
  return os.str();
}

std::string distributions_csv(const ModelComparison& c) {
  std::string out = "metric,model,run_seed,value\n";
  auto emit = [&](const MetricDistribution& d, const char* model) {
    for (std::size_t i = 0; i < d.values.size(); ++i)
      out += d.name + ',' + model + ',' + std::to_string(d.run_seeds[i]) + ',' +
             text::format_double(d.values[i], 17) + '\n';
  };
  emit(c.accuracy.a, "A");
  emit(c.accuracy.b, "B");
  if (c.auc) {
    emit(c.auc->a, "A");
    emit(c.auc->b, "B");
  }
  return out;
}

}  // namespace uqeval::report
