#include "cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "manifest.hpp"
#include "uqeval/aggregate.hpp"
#include "uqeval/calibration.hpp"
#include "uqeval/demo.hpp"
#include "uqeval/error.hpp"
#include "uqeval/point_metrics.hpp"
#include "uqeval/report.hpp"
#include "uqeval/svg.hpp"
#include "uqeval/text.hpp"
#include "uqeval/ucm.hpp"

namespace uqeval::cli {
namespace fs = std::filesystem;
using report::Json;

namespace {

struct Globals {
  std::uint64_t seed = 7;
  std::string format = "text";
  std::string out = ".";
  std::string log_base = "2";
  bool normalize_entropy = true;
  bool renormalize = false;

  LogBase base() const { return log_base == "e" ? LogBase::E : LogBase::Two; }
  EntropyScale scale() const {
    return normalize_entropy ? EntropyScale::Normalized : EntropyScale::Raw;
  }
  void record(RunManifest& m) const {
    m.flag("format", format);
    m.flag("log_base", log_base);
    m.flag("normalize_entropy", normalize_entropy);
    m.flag("renormalize", renormalize);
    m.seed("seed", seed);
  }
};

struct Style {
  bool color = false;
  std::string bold(std::string_view s) const {
    return color ? "\x1b[1m" + std::string(s) + "\x1b[0m" : std::string(s);
  }
};

fs::path prepare_out(const Globals& g) {
  fs::path dir(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + g.out + "': " + ec.message());
  return dir;
}

void write(const fs::path& dir, const std::string& rel, std::string_view content,
           RunManifest& manifest) {
  const auto path = dir / rel;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  text::write_file(path.string(), content);
  manifest.output(rel);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json with_manifest(Json body, const RunManifest& m) {
  Json j;
  j["manifest"] = m.reference();
  for (auto& [k, v] : body.items()) j[k] = v;
  return j;
}

struct EvalInputs {
  std::vector<PredictiveSummary> summaries;
  LabelSet labels{{}, {}};
};

EvalInputs load_eval_inputs(const std::string& summaries_path, const std::string& labels_path,
                            RunManifest& m) {
  m.input(summaries_path);
  m.input(labels_path);
  return EvalInputs{load_summaries(summaries_path), load_labels(labels_path)};
}

// ---------------------------------------------------------------- aggregate

struct AggregateOpts {
  std::string in;
  std::string input_format;
  std::string scheme;
  std::string partition;
};

int cmd_aggregate(const Globals& g, const AggregateOpts& o, std::ostream& out) {
  RunManifest manifest("aggregate", "aggregate.manifest.json");
  g.record(manifest);
  manifest.flag("in", o.in);
  manifest.flag("scheme", o.scheme);
  manifest.flag("partition", o.partition);

  const auto format = o.input_format.empty() ? format_from_path(o.in)
                      : o.input_format == "jsonl" ? PredictionFormat::Jsonl
                                                  : PredictionFormat::Csv;
  manifest.flag("input_format", format == PredictionFormat::Csv ? "csv" : "jsonl");
  manifest.input(o.in);
  const auto tensor = load_predictions(o.in, format, LoadOptions{g.renormalize});

  const auto kind = parse_scheme_kind(o.scheme);
  AggregationScheme scheme = AggregationScheme::mcd();
  if (kind == SchemeKind::Ensemble) scheme = AggregationScheme::ensemble();
  if (kind == SchemeKind::Emcd) {
    if (o.partition.empty())
      throw ValidationError("--scheme emcd needs --partition (e.g. 4x8 or 1,3)");
    scheme = AggregationScheme::emcd(parse_partition(o.partition));
  } else if (!o.partition.empty()) {
    throw ValidationError("--partition only applies to --scheme emcd");
  }
  const auto summaries = aggregate(tensor, scheme, g.base());

  const auto dir = prepare_out(g);
  const auto csv = render_summaries(summaries);
  write(dir, "summaries.csv", csv, manifest);
  manifest.write(dir);

  if (g.format == "csv") {
    out << csv;
  } else if (g.format == "json") {
    Json rows = Json::array();
    for (const auto& s : summaries) {
      Json r;
      r["sample_id"] = s.sample_id;
      r["predicted_class"] = s.predicted_class;
      r["confidence"] = s.confidence;
      r["entropy"] = s.entropy;
      r["normalized_entropy"] = s.normalized_entropy;
      r["mean"] = s.mean;
      rows.push_back(std::move(r));
    }
    Json j;
    j["scheme"] = o.scheme;
    j["summaries"] = std::move(rows);
    out << dump(with_manifest(std::move(j), manifest));
  } else {
    out << "aggregated " << summaries.size() << " samples x " << tensor.n_passes()
        << " passes (" << o.scheme << ") -> " << (dir / "summaries.csv").string() << "\n";
    for (const auto& s : summaries) {
      out << "  " << s.sample_id << "  class " << s.predicted_class << "  mean [";
      for (std::size_t c = 0; c < s.mean.size(); ++c)
        out << (c ? ", " : "") << text::format_double(s.mean[c], 6);
      out << "]  entropy " << text::format_double(s.entropy, 6) << '\n';
    }
  }
  return kExitOk;
}

// ----------------------------------------------------------------- evaluate

struct EvalOpts {
  std::string summaries;
  std::string labels;
  double threshold = 0.3;
  std::string grid = "0.1:0.1:0.9";
  std::size_t bins = 10;
};

int cmd_evaluate(const Globals& g, const EvalOpts& o, std::ostream& out, const Style& st) {
  RunManifest manifest("evaluate", "evaluate.manifest.json");
  g.record(manifest);
  manifest.flag("threshold", o.threshold);
  validate_threshold(o.threshold);
  const auto in = load_eval_inputs(o.summaries, o.labels, manifest);
  const auto ucm = build_ucm(in.summaries, in.labels, o.threshold, g.scale());

  const auto dir = prepare_out(g);
  write(dir, "evaluate.json", dump(with_manifest(report::ucm_json(ucm), manifest)), manifest);
  manifest.write(dir);

  if (g.format == "json") out << dump(with_manifest(report::ucm_json(ucm), manifest));
  else if (g.format == "csv") out << report::ucm_csv(ucm);
  else out << report::ucm_text(ucm, st.bold("Uncertainty confusion matrix"));
  return kExitOk;
}

int cmd_sweep(const Globals& g, const EvalOpts& o, std::ostream& out, const Style& st) {
  RunManifest manifest("sweep", "sweep.manifest.json");
  g.record(manifest);
  manifest.flag("grid", o.grid);
  const auto grid = parse_grid(o.grid);
  const auto in = load_eval_inputs(o.summaries, o.labels, manifest);
  const auto curve = threshold_sweep(in.summaries, in.labels, grid, g.scale());

  const auto dir = prepare_out(g);
  const auto csv = report::sweep_csv(curve);
  Json body;
  body["points"] = report::sweep_json(curve);
  write(dir, "sweep.csv", csv, manifest);
  write(dir, "sweep.json", dump(with_manifest(body, manifest)), manifest);
  const svg::NamedCurve named[] = {{"sweep", curve}};
  write(dir, "sweep.svg", svg::sweep_panels(named, manifest.digest()), manifest);
  manifest.write(dir);

  if (g.format == "json") out << dump(with_manifest(body, manifest));
  else if (g.format == "csv") out << csv;
  else out << st.bold("Threshold sweep") << '\n' << report::sweep_text(curve);
  return kExitOk;
}

int cmd_ece(const Globals& g, const EvalOpts& o, std::ostream& out, const Style& st) {
  RunManifest manifest("ece", "ece.manifest.json");
  g.record(manifest);
  manifest.flag("bins", o.bins);
  if (o.bins < 1) throw ValidationError("--bins must be >= 1");
  const auto in = load_eval_inputs(o.summaries, o.labels, manifest);
  const auto rep = calibration_report(in.summaries, in.labels, o.bins);
  const auto rows = reliability_diagram_data(rep);

  const auto dir = prepare_out(g);
  const auto csv = render_reliability_csv(rows);
  write(dir, "ece.json", dump(with_manifest(report::calibration_json(rep), manifest)), manifest);
  write(dir, "reliability.csv", csv, manifest);
  write(dir, "reliability.svg",
        svg::reliability_diagram(rep, "Reliability diagram", manifest.digest()), manifest);
  manifest.write(dir);

  if (g.format == "json") out << dump(with_manifest(report::calibration_json(rep), manifest));
  else if (g.format == "csv") out << csv;
  else out << st.bold("Calibration") << '\n' << report::calibration_text(rep);
  return kExitOk;
}

int cmd_separate(const Globals& g, const EvalOpts& o, std::ostream& out, const Style& st) {
  RunManifest manifest("separate", "separate.manifest.json");
  g.record(manifest);
  const auto in = load_eval_inputs(o.summaries, o.labels, manifest);
  const auto scored = score_predictions(in.summaries, in.labels, g.scale());
  const auto rep = separation_report(scored);

  const auto dir = prepare_out(g);
  write(dir, "separation.json", dump(with_manifest(report::separation_json(rep), manifest)),
        manifest);
  write(dir, "separation.svg",
        svg::separation_histogram(scored, "Uncertainty by correctness", manifest.digest()),
        manifest);
  manifest.write(dir);

  if (g.format == "json") {
    out << dump(with_manifest(report::separation_json(rep), manifest));
  } else if (g.format == "csv") {
    out << "group,count,mean,median\n";
    auto row = [&](const char* name, const std::optional<GroupStats>& gs) {
      out << name << ',';
      if (gs)
        out << gs->count << ',' << text::format_double(gs->mean, 17) << ','
            << text::format_double(gs->median, 17) << '\n';
      else
        out << "0,n/a,n/a\n";
    };
    row("correct", rep.correct);
    row("incorrect", rep.incorrect);
  } else {
    out << st.bold("Separation") << '\n' << report::separation_text(rep);
  }
  return kExitOk;
}

// ------------------------------------------------------------------ compare

// <dir>/run_<seed>/{summaries.csv,labels.csv}, ordered by seed.
std::vector<RunEvaluation> load_runs(const std::string& dir, RunManifest& m) {
  if (!fs::is_directory(dir)) throw IoError("run directory '" + dir + "' does not exist");
  std::map<std::uint64_t, fs::path> runs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    const auto name = entry.path().filename().string();
    if (name.rfind("run_", 0) != 0) continue;
    std::uint64_t seed = 0;
    const auto digits = std::string_view(name).substr(4);
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
    if (ec != std::errc() || end != digits.data() + digits.size() || digits.empty())
      throw ValidationError("run directory name '" + name + "' has no seed");
    runs.emplace(seed, entry.path());
  }
  if (runs.empty()) throw ValidationError("no run_<seed> directories in '" + dir + "'");
  std::vector<RunEvaluation> out;
  for (const auto& [seed, path] : runs) {
    const auto s = path / "summaries.csv";
    const auto l = path / "labels.csv";
    m.input(s);
    m.input(l);
    out.push_back(RunEvaluation{seed, load_summaries(s.string()), load_labels(l.string())});
  }
  return out;
}

struct CompareOpts {
  std::string a;
  std::string b;
};

std::string comparison_csv(const ModelComparison& c) {
  std::string s = "metric,mean_a,sd_a,mean_b,sd_b,t,df,p,degenerate\n";
  auto row = [&](const MetricComparison& m) {
    s += m.metric + ',' + text::format_double(m.stats_a.mean, 17) + ',' +
         text::format_double(m.stats_a.sd, 17) + ',' + text::format_double(m.stats_b.mean, 17) +
         ',' + text::format_double(m.stats_b.sd, 17) + ',' +
         text::format_double(m.test.t_statistic, 17) + ',' +
         std::to_string(m.test.degrees_of_freedom) + ',' +
         text::format_double(m.test.p_value, 17) + ',' + (m.test.degenerate ? "true" : "false") +
         '\n';
  };
  row(c.accuracy);
  if (c.auc) row(*c.auc);
  return s;
}

void emit_comparison(const fs::path& dir, const ModelComparison& cmp, RunManifest& manifest,
                     const std::string& prefix = {}) {
  Json body;
  body["comparisons"] = report::comparison_json(cmp);
  write(dir, prefix + "comparison.json", dump(with_manifest(body, manifest)), manifest);
  write(dir, prefix + "distributions.csv", report::distributions_csv(cmp), manifest);
  write(dir, prefix + "violin.svg", svg::violin_plot(cmp, manifest.digest()), manifest);
}

int cmd_compare(const Globals& g, const CompareOpts& o, std::ostream& out, const Style& st) {
  RunManifest manifest("compare", "compare.manifest.json");
  g.record(manifest);
  manifest.flag("a", o.a);
  manifest.flag("b", o.b);
  const auto runs_a = load_runs(o.a, manifest);
  const auto runs_b = load_runs(o.b, manifest);
  const auto cmp = compare_models(runs_a, runs_b);

  const auto dir = prepare_out(g);
  emit_comparison(dir, cmp, manifest);
  manifest.write(dir);

  if (g.format == "json") {
    Json body;
    body["comparisons"] = report::comparison_json(cmp);
    out << dump(with_manifest(body, manifest));
  } else if (g.format == "csv") {
    out << comparison_csv(cmp);
  } else {
    out << st.bold("Model comparison") << '\n' << report::comparison_text(cmp);
  }
  return kExitOk;
}

// --------------------------------------------------------------- train-demo

struct TrainDemoOpts {
  std::string scheme = "mcd";
  std::string dataset = "two-moons";
  std::size_t n = 1000;
  double noise = 0.3;
  int epochs = 100;
  std::size_t passes = 0;
  std::size_t members = 0;
  bool quick = false;
};

void record_demo_config(RunManifest& m, const DemoConfig& c) {
  m.flag("dataset", std::string(to_string(c.dataset)));
  m.flag("n_points", c.n_points);
  m.flag("noise", c.noise);
  m.flag("epochs", c.epochs);
  m.flag("batch_size", c.batch_size);
  m.flag("learning_rate", c.learning_rate);
  m.flag("dropout_rate", c.dropout_rate);
  m.flag("mcd_hidden", c.mcd_hidden);
  m.flag("mcd_passes", c.mcd_passes);
  m.flag("ensemble_members", c.ensemble.members);
  m.flag("emcd_passes_per_member", c.emcd_passes_per_member);
}

int cmd_train_demo(const Globals& g, const TrainDemoOpts& o, std::ostream& out) {
  RunManifest manifest("train-demo", "train-demo.manifest.json");
  g.record(manifest);
  manifest.flag("scheme", o.scheme);
  manifest.flag("quick", o.quick);

  auto config = DemoConfig::preset(o.quick, g.seed);
  config.dataset = parse_dataset_kind(o.dataset);
  if (!o.quick) {
    config.n_points = o.n;
    config.epochs = o.epochs;
  }
  config.noise = o.noise;
  if (o.passes) {
    config.mcd_passes = o.passes;
    config.emcd_passes_per_member = o.passes;
  }
  if (o.members) config.ensemble.members = o.members;
  record_demo_config(manifest, config);
  const auto kind = parse_scheme_kind(o.scheme);

  const auto seeds = DemoSeeds::from(g.seed);
  manifest.seed("data", seeds.data);
  const auto data = generate_dataset(config.dataset, config.n_points, config.noise, seeds.data);
  const auto train = data.train();
  const auto test = data.test();
  TrainConfig tc;
  tc.learning_rate = config.learning_rate;
  tc.epochs = config.epochs;
  tc.batch_size = config.batch_size;

  const auto dir = prepare_out(g);
  write(dir, "dataset.csv", render_dataset_csv(data), manifest);
  write(dir, "labels.csv", render_labels(labels_of(test)), manifest);

  std::string partition;
  if (kind == SchemeKind::Mcd) {
    manifest.seed("mcd_init", seeds.mcd_init);
    manifest.seed("mcd_train", seeds.mcd_train);
    manifest.seed("mcd_passes", seeds.mcd_passes);
    std::vector<std::size_t> w{2};
    w.insert(w.end(), config.mcd_hidden.begin(), config.mcd_hidden.end());
    w.push_back(2);
    tc.seed = seeds.mcd_train;
    const auto model = train_mlp(MlpSpec{w, config.dropout_rate, seeds.mcd_init}, tc, train).model;
    write(dir, "model.json", render_model_json(model), manifest);
    write(dir, "predictions.csv",
          render_predictions(mc_dropout_predict(model, test, config.mcd_passes, seeds.mcd_passes),
                             PredictionFormat::Csv),
          manifest);
  } else {
    manifest.seed("ensemble", seeds.ensemble);
    EnsembleSpec spec = config.ensemble;
    spec.dropout_rate = config.dropout_rate;
    spec.master_seed = seeds.ensemble;
    const auto members = train_ensemble(spec, tc, train);
    for (std::size_t k = 0; k < members.size(); ++k) {
      char name[48];
      std::snprintf(name, sizeof name, "models/member_%02zu.json", k);
      write(dir, name, render_model_json(members[k]), manifest);
    }
    if (kind == SchemeKind::Ensemble) {
      write(dir, "predictions.csv",
            render_predictions(ensemble_predict(members, test), PredictionFormat::Csv), manifest);
    } else {
      manifest.seed("emcd_passes", seeds.emcd_passes);
      const auto emcd = emcd_predict(members, test, config.emcd_passes_per_member, seeds.emcd_passes);
      partition = std::to_string(members.size()) + "x" + std::to_string(config.emcd_passes_per_member);
      manifest.flag("partition", partition);
      write(dir, "predictions.csv", render_predictions(emcd.tensor, PredictionFormat::Csv),
            manifest);
    }
  }
  manifest.write(dir);

  if (g.format == "json") {
    Json j;
    j["manifest"] = manifest.reference();
    j["out"] = dir.string();
    j["scheme"] = o.scheme;
    if (!partition.empty()) j["partition"] = partition;
    out << dump(j);
  } else {
    out << "trained " << o.scheme << " demo model(s); wrote " << (dir / "predictions.csv").string()
        << " and " << (dir / "labels.csv").string() << '\n';
    if (!partition.empty()) out << "aggregate with: --scheme emcd --partition " << partition << '\n';
  }
  return kExitOk;
}

// --------------------------------------------------------------------- demo

struct DemoOpts {
  bool quick = false;
};

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string demo_report(const DemoResult& r, const Style& st) {
  std::ostringstream os;
  const auto& c = r.config;
  os << st.bold("uqeval demo") << " (seed " << c.seed << ", " << to_string(c.dataset) << ", n = "
     << c.n_points << ", noise " << c.noise << ")\n";
  os << "test samples: " << r.test_labels.size() << ", threshold " << c.threshold
     << " on normalized entropy\n\n";
  os << "scheme      accuracy   UAcc    USen   USpe   UPre    ECE    sep.mean\n";
  auto opt = [](const Ratio& v, int d) { return v ? fmt(*v, d) : std::string("n/a"); };
  for (const auto& s : r.schemes) {
    std::string name(to_string(s.kind));
    name.resize(10, ' ');
    os << name << "  " << fmt(s.accuracy, 3) << "    "
       << (uacc(s.ucm) ? fmt(100.0 * *uacc(s.ucm), 1) + "%" : "n/a") << "  "
       << opt(usen(s.ucm), 3) << "  " << opt(uspe(s.ucm), 3) << "  " << opt(upre(s.ucm), 3)
       << "  " << fmt(s.calibration.ece, 3) << "  " << opt(s.separation.mean_difference, 3)
       << '\n';
  }
  os << '\n';
  for (const auto& s : r.schemes) {
    os << report::ucm_text(s.ucm, st.bold(std::string(to_string(s.kind)))) << '\n';
  }
  os << st.bold("Rank correlation with threshold (sweep ") << c.grid.front() << ".."
     << c.grid.back() << ")\n";
  for (const auto& s : r.schemes) {
    os << "  " << to_string(s.kind) << ": UAcc " << opt(s.uacc_trend, 2) << ", USen "
       << opt(s.usen_trend, 2) << ", USpe " << opt(s.uspe_trend, 2) << ", UPre "
       << opt(s.upre_trend, 2) << '\n';
  }
  os << '\n' << st.bold("Separation") << '\n';
  for (const auto& s : r.schemes)
    os << to_string(s.kind) << ":\n" << report::separation_text(s.separation);
  os << '\n'
     << st.bold("Pretrained start (A) vs. random start (B)") << '\n'
     << report::comparison_text(r.comparison);
  return os.str();
}

void write_run_dirs(const fs::path& dir, const std::string& rel,
                    std::span<const RunEvaluation> runs, RunManifest& manifest) {
  for (const auto& run : runs) {
    const std::string base = rel + "/run_" + std::to_string(run.seed) + "/";
    write(dir, base + "summaries.csv", render_summaries(run.summaries), manifest);
    write(dir, base + "labels.csv", render_labels(run.labels), manifest);
  }
}

int cmd_demo(const Globals& g, const DemoOpts& o, std::ostream& out, const Style& st) {
  RunManifest manifest("demo", "manifest.json");
  g.record(manifest);
  manifest.flag("quick", o.quick);
  auto config = DemoConfig::preset(o.quick, g.seed);
  config.log_base = g.base();
  record_demo_config(manifest, config);
  const auto seeds = DemoSeeds::from(g.seed);
  manifest.seed("data", seeds.data);
  manifest.seed("mcd_init", seeds.mcd_init);
  manifest.seed("mcd_train", seeds.mcd_train);
  manifest.seed("mcd_passes", seeds.mcd_passes);
  manifest.seed("ensemble", seeds.ensemble);
  manifest.seed("emcd_passes", seeds.emcd_passes);
  manifest.seed("compare", seeds.compare);
  for (const auto& a : demo_artifacts())
    if (a != "manifest.json") manifest.output(a);

  const auto result = run_demo(config);
  const auto dir = prepare_out(g);
  const auto digest = manifest.digest();

  Json ucm, sweep, ece, sep;
  std::vector<svg::NamedCurve> curves;
  for (const auto& s : result.schemes) {
    const std::string name(to_string(s.kind));
    ucm[name] = report::ucm_json(s.ucm);
    sweep[name] = report::sweep_json(s.sweep);
    ece[name] = report::calibration_json(s.calibration);
    Json sj = report::separation_json(s.separation);
    sj["threshold_rank_correlation"] = {{"uacc", report::ratio_json(s.uacc_trend)},
                                        {"usen", report::ratio_json(s.usen_trend)},
                                        {"uspe", report::ratio_json(s.uspe_trend)},
                                        {"upre", report::ratio_json(s.upre_trend)}};
    sep[name] = std::move(sj);
    curves.push_back({name, s.sweep});

    const auto scored = score_predictions(s.summaries, result.test_labels);
    write(dir, name + "/predictions.csv", render_predictions(s.predictions, PredictionFormat::Csv),
          manifest);
    write(dir, name + "/summaries.csv", render_summaries(s.summaries), manifest);
    write(dir, name + "/sweep.csv", report::sweep_csv(s.sweep), manifest);
    write(dir, name + "/reliability.csv",
          render_reliability_csv(reliability_diagram_data(s.calibration)), manifest);
    write(dir, name + "/reliability.svg",
          svg::reliability_diagram(s.calibration, "Reliability diagram: " + name, digest), manifest);
    write(dir, name + "/separation.svg",
          svg::separation_histogram(scored, "Uncertainty by correctness: " + name, digest),
          manifest);
  }
  if (result.schemes.front().scheme.kind() == SchemeKind::Mcd)
    write(dir, "mcd/model.json", render_model_json(result.mcd_model), manifest);

  const auto ref = manifest.reference();
  auto wrap = [&](const char* key, Json payload, Json extra = Json::object()) {
    Json j;
    j["manifest"] = ref;
    for (auto& [k, v] : extra.items()) j[k] = v;
    j[key] = std::move(payload);
    return dump(j);
  };
  text::write_file((dir / "dataset.csv").string(), render_dataset_csv(result.dataset));
  text::write_file((dir / "labels.csv").string(), render_labels(result.test_labels));
  text::write_file((dir / "ucm.json").string(),
                   wrap("schemes", ucm, {{"threshold", config.threshold}}));
  text::write_file((dir / "sweep.json").string(), wrap("schemes", sweep, {{"grid", config.grid}}));
  text::write_file((dir / "ece.json").string(), wrap("schemes", ece, {{"M", config.bins}}));
  text::write_file((dir / "separation.json").string(), wrap("schemes", sep));
  text::write_file((dir / "comparison.json").string(),
                   wrap("comparisons", report::comparison_json(result.comparison),
                        {{"runs", config.compare_runs}}));
  const Style plain;
  text::write_file((dir / "report.txt").string(), demo_report(result, plain));

  write(dir, "plots/sweep.svg", svg::sweep_panels(curves, digest), manifest);
  write(dir, "plots/violin.svg", svg::violin_plot(result.comparison, digest), manifest);
  write(dir, "runs/distributions.csv", report::distributions_csv(result.comparison), manifest);
  write_run_dirs(dir, "runs/a", result.runs_a, manifest);
  write_run_dirs(dir, "runs/b", result.runs_b, manifest);
  manifest.write(dir);

  if (g.format == "json") {
    Json j;
    j["manifest"] = ref;
    j["out"] = dir.string();
    j["ucm"] = ucm;
    j["comparisons"] = report::comparison_json(result.comparison);
    out << dump(j);
  } else {
    out << demo_report(result, st) << "\nartifacts written to " << dir.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

const std::vector<std::string>& demo_artifacts() {
  static const std::vector<std::string> kArtifacts{
      "manifest.json", "dataset.csv",     "labels.csv",      "ucm.json",  "sweep.json",
      "ece.json",      "separation.json", "comparison.json", "report.txt"};
  return kArtifacts;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"uqeval: evaluate predictive uncertainty of stochastic classifiers"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Master seed; all sub-seeds derive from it");
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"text", "json", "csv"}));
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--log-base", g.log_base, "Entropy log base")->check(CLI::IsMember({"2", "e"}));
  app.add_option("--normalize-entropy", g.normalize_entropy,
                 "Threshold normalized entropy (true) or raw entropy (false)");
  app.add_flag("--renormalize", g.renormalize,
               "Rescale rows summing to within 1e-3 of one");

  AggregateOpts agg;
  auto* c_agg = app.add_subcommand("aggregate", "Aggregate a prediction tensor into summaries");
  c_agg->add_option("--in", agg.in, "Predictions file (CSV or JSONL)")->required();
  c_agg->add_option("--input-format", agg.input_format, "csv or jsonl (default: by extension)")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  c_agg->add_option("--scheme", agg.scheme, "mcd, ensemble or emcd")
      ->required()
      ->check(CLI::IsMember({"mcd", "ensemble", "emcd"}));
  c_agg->add_option("--partition", agg.partition, "EMCD members x passes, e.g. 4x8 or 1,3");

  EvalOpts ev;
  auto add_eval_inputs = [&](CLI::App* sub) {
    sub->add_option("--summaries", ev.summaries, "Summary CSV from aggregate")->required();
    sub->add_option("--labels", ev.labels, "Labels CSV (sample_id,label)")->required();
  };
  auto* c_eval = app.add_subcommand("evaluate", "Uncertainty confusion matrix at one threshold");
  add_eval_inputs(c_eval);
  c_eval->add_option("--threshold", ev.threshold, "Uncertainty threshold in [0,1]");
  auto* c_sweep = app.add_subcommand("sweep", "Uncertainty metrics over a threshold grid");
  add_eval_inputs(c_sweep);
  c_sweep->add_option("--grid", ev.grid, "start:step:stop");
  auto* c_ece = app.add_subcommand("ece", "Expected calibration error and reliability diagram");
  add_eval_inputs(c_ece);
  c_ece->add_option("--bins", ev.bins, "Number of equal-width bins");
  auto* c_sep = app.add_subcommand("separate", "Uncertainty of correct vs. misclassified samples");
  add_eval_inputs(c_sep);

  CompareOpts cmp;
  auto* c_cmp = app.add_subcommand("compare", "Paired t-test of accuracy and AUC over runs");
  c_cmp->add_option("--a", cmp.a, "Run directory of model A")->required();
  c_cmp->add_option("--b", cmp.b, "Run directory of model B")->required();

  TrainDemoOpts td;
  auto* c_td = app.add_subcommand("train-demo", "Train a toy model and emit its predictions");
  c_td->add_option("--scheme", td.scheme, "mcd, ensemble or emcd")
      ->check(CLI::IsMember({"mcd", "ensemble", "emcd"}));
  c_td->add_option("--dataset", td.dataset, "two-moons or gaussian-blobs")
      ->check(CLI::IsMember({"two-moons", "moons", "gaussian-blobs", "blobs"}));
  c_td->add_option("--n", td.n, "Number of points");
  c_td->add_option("--noise", td.noise, "Noise level");
  c_td->add_option("--epochs", td.epochs, "Training epochs (300 reproduces the full recipe)");
  c_td->add_option("--passes", td.passes, "MC passes (per member for emcd)");
  c_td->add_option("--members", td.members, "Ensemble members");
  c_td->add_flag("--quick", td.quick, "Small, fast preset");

  DemoOpts demo;
  auto* c_demo = app.add_subcommand("demo", "Run the full pipeline on synthetic data");
  c_demo->add_flag("--quick", demo.quick, "Small, fast preset");

  std::vector<std::string> argv_store{"uqeval"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run 'uqeval --help' for usage\n";
    return kExitUsage;
  }

  Style st;
  st.color = &out == &std::cout && std::getenv("UQEVAL_NO_COLOR") == nullptr &&
             ::isatty(STDOUT_FILENO);
  try {
    if (c_agg->parsed()) return cmd_aggregate(g, agg, out);
    if (c_eval->parsed()) return cmd_evaluate(g, ev, out, st);
    if (c_sweep->parsed()) return cmd_sweep(g, ev, out, st);
    if (c_ece->parsed()) return cmd_ece(g, ev, out, st);
    if (c_sep->parsed()) return cmd_separate(g, ev, out, st);
    if (c_cmp->parsed()) return cmd_compare(g, cmp, out, st);
    if (c_td->parsed()) return cmd_train_demo(g, td, out);
    if (c_demo->parsed()) return cmd_demo(g, demo, out, st);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace uqeval::cli
