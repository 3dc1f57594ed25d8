#pragma once

// Heterogeneous MLP ensembles and their ensemble / ensemble-of-MC-dropout
// prediction tensors.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "uqeval/aggregate.hpp"
#include "uqeval/dataset.hpp"
#include "uqeval/mlp.hpp"

namespace uqeval {

struct WidthRange {
  std::size_t lo = 1;
  std::size_t hi = 1;  // inclusive
};

struct EnsembleSpec {
  std::size_t members = 30;
  std::vector<std::size_t> depth_choices{2, 3};
  // Range for hidden layer j; a member of depth k uses the first k ranges.
  std::vector<WidthRange> width_ranges{{32, 64}, {8, 32}, {2, 8}};
  std::size_t input_dim = 2;
  std::size_t n_classes = 2;
  double dropout_rate = 0.25;
  std::uint64_t master_seed = 0;

  void validate() const;
};

// Member architectures and init seeds, a pure function of the spec.
std::vector<MlpSpec> member_specs(const EnsembleSpec& spec);

// Training seed used for a member: derived from its init seed.
TrainConfig member_config(const MlpSpec& member, const TrainConfig& base);

// Trains each member on `data` with member_config(); members are
// independent, so they run on up to `threads` threads (0 = hardware).
std::vector<Mlp> train_members(std::span<const MlpSpec> members,
                               const TrainConfig& base, const LabeledData& data,
                               unsigned threads = 0);
std::vector<Mlp> train_ensemble(const EnsembleSpec& spec, const TrainConfig& base,
                                const LabeledData& data, unsigned threads = 0);

// Deterministic member outputs; pass k of every sample is member k.
PredictionTensor ensemble_predict(std::span<const Mlp> models,
                                  const LabeledData& inputs);

struct EmcdPrediction {
  PredictionTensor tensor;
  AggregationScheme scheme;  // EMCD partition: one block per member
};

// Member-major pass axis: member k contributes passes
// [k*T, (k+1)*T) drawn with the stream derive_seed(seed, k).
EmcdPrediction emcd_predict(std::span<const Mlp> models, const LabeledData& inputs,
                            std::size_t passes_per_member, std::uint64_t seed);

}  // namespace uqeval
