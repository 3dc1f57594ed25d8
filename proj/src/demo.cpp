#include "uqeval/demo.hpp"

#include "uqeval/error.hpp"

namespace uqeval {
namespace {

std::optional<double> trend(const SweepCurve& curve, Ratio SweepPoint::*field) {
  std::vector<double> x, y;
  for (const auto& p : curve.points) {
    if (const auto& v = p.*field) {
      x.push_back(p.ucm.threshold);
      y.push_back(*v);
    }
  }
  return spearman(x, y);
}

TrainConfig train_config(const DemoConfig& c, int epochs, std::uint64_t seed) {
  TrainConfig t;
  t.learning_rate = c.learning_rate;
  t.epochs = epochs;
  t.batch_size = c.batch_size;
  t.seed = seed;
  return t;
}

std::vector<std::size_t> widths(std::size_t in, const std::vector<std::size_t>& hidden,
                                std::size_t out) {
  std::vector<std::size_t> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

}  // namespace

DemoConfig DemoConfig::preset(bool quick, std::uint64_t seed) {
  DemoConfig c;
  c.seed = seed;
  if (quick) {
    c.n_points = 600;
    c.epochs = 60;
    c.mcd_passes = 20;
    c.ensemble.members = 8;
    c.emcd_passes_per_member = 4;
    c.compare_runs = 10;
    c.pretrain_epochs = 30;
  }
  return c;
}

DemoSeeds DemoSeeds::from(std::uint64_t master) {
  return DemoSeeds{derive_seed(master, 1), derive_seed(master, 2), derive_seed(master, 3),
                   derive_seed(master, 4), derive_seed(master, 5), derive_seed(master, 6),
                   derive_seed(master, 7)};
}

const SchemeResult& DemoResult::scheme(SchemeKind kind) const {
  for (const auto& s : schemes)
    if (s.kind == kind) return s;
  throw ValidationError("demo result has no scheme '" + std::string(to_string(kind)) + "'");
}

LabelSet labels_of(const LabeledData& data) { return LabelSet(data.ids, data.y); }

std::vector<PredictiveSummary> deterministic_summaries(const Mlp& model,
                                                       const LabeledData& inputs,
                                                       LogBase base) {
  const Mlp single[] = {model};
  return aggregate(ensemble_predict(single, inputs), AggregationScheme::ensemble(), base);
}

SchemeResult evaluate_scheme(SchemeKind kind, PredictionTensor predictions,
                             AggregationScheme scheme, const LabelSet& labels,
                             const DemoConfig& config) {
  auto summaries = aggregate(predictions, scheme, config.log_base);
  SchemeResult r{.kind = kind,
                 .predictions = std::move(predictions),
                 .scheme = std::move(scheme),
                 .summaries = std::move(summaries)};
  r.accuracy = accuracy(r.summaries, labels);
  const auto scored = score_predictions(r.summaries, labels);
  r.ucm = build_ucm(scored, config.threshold);
  r.sweep = threshold_sweep(scored, config.grid);
  r.calibration = calibration_report(r.summaries, labels, config.bins);
  r.separation = separation_report(scored);
  r.uacc_trend = trend(r.sweep, &SweepPoint::uacc);
  r.usen_trend = trend(r.sweep, &SweepPoint::usen);
  r.uspe_trend = trend(r.sweep, &SweepPoint::uspe);
  r.upre_trend = trend(r.sweep, &SweepPoint::upre);
  return r;
}

DemoResult run_demo(const DemoConfig& config) {
  const auto seeds = DemoSeeds::from(config.seed);
  auto dataset = generate_dataset(config.dataset, config.n_points, config.noise, seeds.data);
  const auto train = dataset.train();
  const auto test = dataset.test();
  auto test_labels = labels_of(test);

  // MC dropout.
  MlpSpec mcd_spec{widths(2, config.mcd_hidden, 2), config.dropout_rate, seeds.mcd_init};
  auto mcd = train_mlp(mcd_spec, train_config(config, config.epochs, seeds.mcd_train), train);

  DemoResult result{.config = config,
                    .seeds = seeds,
                    .dataset = std::move(dataset),
                    .test_labels = std::move(test_labels),
                    .mcd_model = std::move(mcd.model)};

  result.schemes.push_back(evaluate_scheme(
      SchemeKind::Mcd,
      mc_dropout_predict(result.mcd_model, test, config.mcd_passes, seeds.mcd_passes),
      AggregationScheme::mcd(), result.test_labels, config));

  // One trained ensemble serves both the plain and the MC-dropout evaluation.
  EnsembleSpec ens = config.ensemble;
  ens.dropout_rate = config.dropout_rate;
  ens.master_seed = seeds.ensemble;
  const auto members =
      train_ensemble(ens, train_config(config, config.epochs, 0), train, config.threads);
  result.schemes.push_back(evaluate_scheme(SchemeKind::Ensemble, ensemble_predict(members, test),
                                           AggregationScheme::ensemble(),
                                           result.test_labels, config));
  auto emcd = emcd_predict(members, test, config.emcd_passes_per_member, seeds.emcd_passes);
  result.schemes.push_back(evaluate_scheme(SchemeKind::Emcd, std::move(emcd.tensor),
                                           std::move(emcd.scheme), result.test_labels,
                                           config));

  // Pretrained start (A) vs. random start (B), both briefly trained per run.
  const auto cmp_widths = widths(2, config.compare_hidden, 2);
  const auto pre_data = generate_dataset(config.dataset, 3 * config.compare_points,
                                         config.noise, derive_seed(seeds.compare, 0));
  const auto pretrained =
      train_mlp(MlpSpec{cmp_widths, config.dropout_rate, derive_seed(seeds.compare, 1)},
                train_config(config, config.pretrain_epochs, derive_seed(seeds.compare, 2)),
                pre_data.train())
          .model;
  for (std::size_t r = 0; r < config.compare_runs; ++r) {
    const std::uint64_t run_seed = derive_seed(seeds.compare, 100 + r);
    const auto data =
        generate_dataset(config.dataset, config.compare_points, config.noise, run_seed);
    const auto run_train = data.train();
    const auto run_test = data.test();
    const auto cfg = train_config(config, config.finetune_epochs, derive_seed(run_seed, 1));
    const auto a = train_mlp(pretrained, cfg, run_train).model;
    const auto b =
        train_mlp(MlpSpec{cmp_widths, config.dropout_rate, derive_seed(run_seed, 2)}, cfg,
                  run_train)
            .model;
    result.runs_a.push_back(RunEvaluation{run_seed, deterministic_summaries(a, run_test,
                                                                            config.log_base),
                                          labels_of(run_test)});
    result.runs_b.push_back(RunEvaluation{run_seed, deterministic_summaries(b, run_test,
                                                                            config.log_base),
                                          labels_of(run_test)});
  }
  result.comparison = compare_models(result.runs_a, result.runs_b);
  return result;
}

}  // namespace uqeval
