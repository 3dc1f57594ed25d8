#pragma once

// End-to-end toy pipeline: synthetic data, an MC-dropout MLP, a
// heterogeneous ensemble evaluated plainly and with MC dropout, and the full
// evaluation suite on the held-out split, plus a repeated-run comparison of a
// pretrained-start vs. a random-start network.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uqeval/aggregate.hpp"
#include "uqeval/calibration.hpp"
#include "uqeval/dataset.hpp"
#include "uqeval/ensemble.hpp"
#include "uqeval/mlp.hpp"
#include "uqeval/point_metrics.hpp"
#include "uqeval/ucm.hpp"

namespace uqeval {

struct DemoConfig {
  std::uint64_t seed = 7;
  DatasetKind dataset = DatasetKind::TwoMoons;
  std::size_t n_points = 1000;
  double noise = 0.3;
  int epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  double dropout_rate = 0.25;
  std::vector<std::size_t> mcd_hidden{32, 16, 8};
  std::size_t mcd_passes = 50;
  EnsembleSpec ensemble{};
  std::size_t emcd_passes_per_member = 8;
  double threshold = 0.3;
  std::vector<double> grid = threshold_grid(0.1, 0.1, 0.9);
  std::size_t bins = 10;
  LogBase log_base = LogBase::Two;
  // Repeated-run comparison.
  std::size_t compare_runs = 20;
  std::size_t compare_points = 200;
  int pretrain_epochs = 60;
  int finetune_epochs = 5;
  std::vector<std::size_t> compare_hidden{16, 16};
  unsigned threads = 0;

  // Default preset, or a smaller/faster one.
  static DemoConfig preset(bool quick, std::uint64_t seed);
};

// Sub-seeds, each derive_seed(master, stream id).
struct DemoSeeds {
  std::uint64_t data, mcd_init, mcd_train, mcd_passes, ensemble, emcd_passes, compare;
  static DemoSeeds from(std::uint64_t master);
};

struct SchemeResult {
  SchemeKind kind = SchemeKind::Mcd;
  PredictionTensor predictions;
  AggregationScheme scheme;
  std::vector<PredictiveSummary> summaries;
  double accuracy = 0.0;
  UncertaintyConfusion ucm;
  SweepCurve sweep;
  CalibrationReport calibration;
  SeparationReport separation;
  // Rank correlation of each metric with the threshold along the sweep.
  std::optional<double> uacc_trend, usen_trend, uspe_trend, upre_trend;
};

struct DemoResult {
  DemoConfig config;
  DemoSeeds seeds{};
  SyntheticDataset dataset;
  LabelSet test_labels{{}, {}};
  Mlp mcd_model;
  std::vector<SchemeResult> schemes;  // mcd, ensemble, emcd
  std::vector<RunEvaluation> runs_a;  // pretrained start
  std::vector<RunEvaluation> runs_b;  // random start
  ModelComparison comparison;

  const SchemeResult& scheme(SchemeKind kind) const;
};

// Evaluates one prediction tensor with every metric in the toolkit.
SchemeResult evaluate_scheme(SchemeKind kind, PredictionTensor predictions,
                             AggregationScheme scheme, const LabelSet& labels,
                             const DemoConfig& config);

DemoResult run_demo(const DemoConfig& config);

// Deterministic single-model predictions as a T=1 tensor, aggregated.
std::vector<PredictiveSummary> deterministic_summaries(const Mlp& model,
                                                       const LabeledData& inputs,
                                                       LogBase base = LogBase::Two);

LabelSet labels_of(const LabeledData& data);

}  // namespace uqeval
