#include "uqeval/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace uqeval::svg {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

class Document {
 public:
  Document(int width, int height, std::string_view title, std::string_view digest)
      : width_(width), height_(height) {
    body_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
             "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
             std::to_string(width) + ' ' + std::to_string(height) +
             "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    body_ += "<title>" + escape(title) + "</title>\n";
    body_ += "<metadata>manifest-digest: " + escape(digest) + "</metadata>\n";
    body_ += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" +
             std::to_string(height) + "\" fill=\"white\"/>\n";
  }

  void raw(const std::string& s) { body_ += s; }

  void text(double x, double y, std::string_view s, std::string_view anchor = "middle",
            std::string_view extra = {}) {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" +
             std::string(anchor) + "\"" + (extra.empty() ? "" : " " + std::string(extra)) +
             ">" + escape(s) + "</text>\n";
  }

  void line(double x1, double y1, double x2, double y2, std::string_view style) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
             "\" y2=\"" + num(y2) + "\" " + std::string(style) + "/>\n";
  }

  void rect(double x, double y, double w, double h, std::string_view style) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
             "\" height=\"" + num(h) + "\" " + std::string(style) + "/>\n";
  }

  std::string finish() { return body_ + "</svg>\n"; }

 private:
  int width_;
  int height_;
  std::string body_;
};

// Plot area with data->pixel mapping.
struct Axes {
  double left, top, width, height;
  double xmin, xmax, ymin, ymax;

  double px(double x) const { return left + (x - xmin) / (xmax - xmin) * width; }
  double py(double y) const { return top + height - (y - ymin) / (ymax - ymin) * height; }

  void draw(Document& doc, std::string_view xlabel, std::string_view ylabel,
            std::string_view title, int ticks = 5) const {
    doc.rect(left, top, width, height, "fill=\"none\" stroke=\"#444\"");
    for (int i = 0; i <= ticks; ++i) {
      const double fx = xmin + (xmax - xmin) * i / ticks;
      const double fy = ymin + (ymax - ymin) * i / ticks;
      doc.line(px(fx), top + height, px(fx), top + height + 4, "stroke=\"#444\"");
      doc.text(px(fx), top + height + 16, num(fx).substr(0, 4));
      doc.line(left - 4, py(fy), left, py(fy), "stroke=\"#444\"");
      doc.text(left - 6, py(fy) + 4, num(fy).substr(0, 4), "end");
    }
    doc.text(left + width / 2, top + height + 32, xlabel);
    const double yl = left - 36;
    const double ym = top + height / 2;
    doc.text(yl, ym, ylabel, "middle",
             "transform=\"rotate(-90 " + num(yl) + " " + num(ym) + ")\"");
    if (!title.empty()) doc.text(left + width / 2, top - 8, title, "middle", "font-weight=\"bold\"");
  }
};

std::string polyline(const std::vector<std::pair<double, double>>& pts, const Axes& ax,
                     std::string_view color, std::string_view label) {
  std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                  "\" stroke-width=\"2\" data-series=\"" + escape(label) + "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += num(ax.px(pts[i].first)) + ',' + num(ax.py(pts[i].second));
  }
  return s + "\"/>\n";
}

}  // namespace

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string sweep_panels(std::span<const NamedCurve> curves, std::string_view digest) {
  constexpr int kPanelW = 300;
  constexpr int kHeight = 340;
  Document doc(4 * kPanelW, kHeight, "Uncertainty metrics vs. threshold", digest);
  struct Metric {
    const char* name;
    Ratio SweepPoint::*field;
  };
  static constexpr Metric kMetrics[] = {{"UAcc", &SweepPoint::uacc},
                                        {"USen", &SweepPoint::usen},
                                        {"USpe", &SweepPoint::uspe},
                                        {"UPre", &SweepPoint::upre}};
  for (std::size_t m = 0; m < 4; ++m) {
    const Axes ax{m * kPanelW + 60.0, 40.0, kPanelW - 80.0, kHeight - 110.0, 0.0, 1.0, 0.0, 1.0};
    ax.draw(doc, "threshold", kMetrics[m].name, kMetrics[m].name);
    for (std::size_t c = 0; c < curves.size(); ++c) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& p : curves[c].curve.points) {
        const auto& v = p.*(kMetrics[m].field);
        if (v) pts.emplace_back(p.ucm.threshold, *v);
      }
      doc.raw(polyline(pts, ax, kPalette[c % 5],
                       curves[c].name + ":" + kMetrics[m].name));
    }
  }
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const double x = 60.0 + 140.0 * static_cast<double>(c);
    doc.line(x, kHeight - 18, x + 24, kHeight - 18,
             "stroke=\"" + std::string(kPalette[c % 5]) + "\" stroke-width=\"2\"");
    doc.text(x + 30, kHeight - 14, curves[c].name, "start");
  }
  return doc.finish();
}

std::string reliability_diagram(const CalibrationReport& report, std::string_view title,
                                std::string_view digest) {
  Document doc(440, 440, title, digest);
  const Axes ax{70.0, 40.0, 340.0, 330.0, 0.0, 1.0, 0.0, 1.0};
  ax.draw(doc, "confidence", "accuracy", title);
  for (const auto& row : reliability_diagram_data(report)) {
    if (row.count == 0) continue;
    const double x = ax.px(row.lo);
    const double w = ax.px(row.hi) - x;
    const double acc = *row.accuracy;
    const double conf = *row.confidence;
    doc.rect(x, ax.py(acc), w, ax.py(0.0) - ax.py(acc),
             "fill=\"#1f77b4\" stroke=\"#0b3c66\" class=\"accuracy\"");
    const double lo = std::min(acc, conf);
    const double hi = std::max(acc, conf);
    doc.rect(x, ax.py(hi), w, ax.py(lo) - ax.py(hi),
             "fill=\"#d62728\" fill-opacity=\"0.45\" stroke=\"#d62728\" class=\"gap\"");
  }
  doc.line(ax.px(0), ax.py(0), ax.px(1), ax.py(1),
           "stroke=\"#555\" stroke-dasharray=\"6,4\" class=\"identity\"");
  doc.text(ax.px(0.03), ax.py(0.93), "ECE = " + num(100.0 * report.ece) + "%", "start");
  return doc.finish();
}

std::string separation_histogram(std::span<const ScoredPrediction> scored,
                                 std::string_view title, std::string_view digest) {
  constexpr int kBins = 20;
  std::vector<double> correct(kBins, 0.0), incorrect(kBins, 0.0);
  double n_c = 0, n_i = 0;
  for (const auto& p : scored) {
    const int b = std::clamp(static_cast<int>(p.uncertainty * kBins), 0, kBins - 1);
    (p.correct ? correct : incorrect)[b] += 1.0;
    (p.correct ? n_c : n_i) += 1.0;
  }
  double peak = 1e-12;
  for (int b = 0; b < kBins; ++b) {
    if (n_c > 0) correct[b] *= kBins / n_c;
    if (n_i > 0) incorrect[b] *= kBins / n_i;
    peak = std::max({peak, correct[b], incorrect[b]});
  }
  Document doc(520, 380, title, digest);
  const Axes ax{70.0, 40.0, 420.0, 270.0, 0.0, 1.0, 0.0, peak * 1.1};
  ax.draw(doc, "normalized predictive entropy", "density", title);
  auto bars = [&](const std::vector<double>& h, const char* color, const char* cls) {
    for (int b = 0; b < kBins; ++b) {
      if (h[b] <= 0.0) continue;
      const double x0 = ax.px(static_cast<double>(b) / kBins);
      const double x1 = ax.px(static_cast<double>(b + 1) / kBins);
      doc.rect(x0, ax.py(h[b]), x1 - x0, ax.py(0) - ax.py(h[b]),
               std::string("fill=\"") + color + "\" fill-opacity=\"0.5\" class=\"" + cls + "\"");
    }
  };
  bars(correct, kPalette[0], "correct");
  bars(incorrect, kPalette[1], "incorrect");
  const auto sep = separation_report(scored);
  if (sep.correct)
    doc.line(ax.px(sep.correct->mean), ax.top, ax.px(sep.correct->mean), ax.py(0),
             "stroke=\"#1f77b4\" stroke-dasharray=\"4,3\"");
  if (sep.incorrect)
    doc.line(ax.px(sep.incorrect->mean), ax.top, ax.px(sep.incorrect->mean), ax.py(0),
             "stroke=\"#d62728\" stroke-dasharray=\"4,3\"");
  doc.rect(340, 352, 12, 12, "fill=\"#1f77b4\" fill-opacity=\"0.5\"");
  doc.text(356, 362, "correct", "start");
  doc.rect(420, 352, 12, 12, "fill=\"#d62728\" fill-opacity=\"0.5\"");
  doc.text(436, 362, "misclassified", "start");
  return doc.finish();
}

double silverman_bandwidth(std::span<const double> values) {
  const auto stats = describe(values);
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  const double iqr = v.size() > 1 ? quantile(0.75) - quantile(0.25) : 0.0;
  double spread = stats.sd;
  if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
  const double h = 0.9 * spread * std::pow(static_cast<double>(v.size()), -0.2);
  return h > 0.0 ? h : 1e-3;
}

std::vector<double> kde(std::span<const double> values, std::span<const double> grid) {
  const double h = silverman_bandwidth(values);
  const double norm = 1.0 / (static_cast<double>(values.size()) * h *
                             std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out;
  out.reserve(grid.size());
  for (double g : grid) {
    double s = 0.0;
    for (double v : values) {
      const double z = (g - v) / h;
      s += std::exp(-0.5 * z * z);
    }
    out.push_back(s * norm);
  }
  return out;
}

std::string violin_plot(const ModelComparison& comparison, std::string_view digest) {
  std::vector<const MetricComparison*> metrics{&comparison.accuracy};
  if (comparison.auc) metrics.push_back(&*comparison.auc);
  constexpr int kPanelW = 320;
  const int width = kPanelW * static_cast<int>(metrics.size());
  Document doc(width, 380, "Metric distributions over repeated runs", digest);
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const auto& mc = *metrics[m];
    std::vector<double> all = mc.a.values;
    all.insert(all.end(), mc.b.values.begin(), mc.b.values.end());
    double lo = *std::min_element(all.begin(), all.end());
    double hi = *std::max_element(all.begin(), all.end());
    const double pad = std::max(0.05 * (hi - lo), 0.01);
    lo -= pad;
    hi += pad;
    const Axes ax{m * kPanelW + 70.0, 40.0, kPanelW - 100.0, 270.0, 0.0, 2.0, lo, hi};
    doc.rect(ax.left, ax.top, ax.width, ax.height, "fill=\"none\" stroke=\"#444\"");
    for (int i = 0; i <= 4; ++i) {
      const double fy = lo + (hi - lo) * i / 4;
      doc.line(ax.left - 4, ax.py(fy), ax.left, ax.py(fy), "stroke=\"#444\"");
      doc.text(ax.left - 6, ax.py(fy) + 4, num(fy), "end");
    }
    const double yl = ax.left - 50;
    const double ym = ax.top + ax.height / 2;
    doc.text(yl, ym, mc.metric, "middle",
             "transform=\"rotate(-90 " + num(yl) + " " + num(ym) + ")\"");
    doc.text(ax.left + ax.width / 2, ax.top - 8,
             mc.metric + " (p = " + num(mc.test.p_value) + ")", "middle", "font-weight=\"bold\"");
    constexpr int kGrid = 64;
    std::vector<double> grid(kGrid);
    for (int i = 0; i < kGrid; ++i) grid[i] = lo + (hi - lo) * i / (kGrid - 1);
    const std::vector<double>* sides[] = {&mc.a.values, &mc.b.values};
    const char* names[] = {"model A", "model B"};
    for (int s = 0; s < 2; ++s) {
      const auto dens = kde(*sides[s], grid);
      const double peak = std::max(*std::max_element(dens.begin(), dens.end()), 1e-12);
      const double center = 0.5 + s;
      std::string pts;
      for (int i = 0; i < kGrid; ++i)
        pts += num(ax.px(center + 0.4 * dens[i] / peak)) + ',' + num(ax.py(grid[i])) + ' ';
      for (int i = kGrid; i-- > 0;)
        pts += num(ax.px(center - 0.4 * dens[i] / peak)) + ',' + num(ax.py(grid[i])) + ' ';
      pts.pop_back();
      doc.raw("<polygon class=\"violin\" fill=\"" + std::string(kPalette[s]) +
              "\" fill-opacity=\"0.5\" stroke=\"" + kPalette[s] + "\" points=\"" + pts + "\"/>\n");
      const double mean = describe(*sides[s]).mean;
      doc.line(ax.px(center - 0.2), ax.py(mean), ax.px(center + 0.2), ax.py(mean),
               "stroke=\"black\" stroke-width=\"2\"");
      doc.text(ax.px(center), ax.top + ax.height + 18, names[s]);
    }
    doc.text(ax.left + ax.width / 2, ax.top + ax.height + 36, "model");
  }
  return doc.finish();
}

}  // namespace uqeval::svg
