#pragma once

// Fully connected ReLU network with a softmax head, inverted dropout on
// hidden activations, and Adam training on cross entropy.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uqeval/dataset.hpp"
#include "uqeval/rng.hpp"
#include "uqeval/tensor.hpp"

namespace uqeval {

struct MlpSpec {
  // input, hidden..., output (number of classes).
  std::vector<std::size_t> widths;
  double dropout_rate = 0.25;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainConfig {
  double learning_rate = 0.001;
  int epochs = 300;
  std::size_t batch_size = 32;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Drives the shuffle and dropout streams.
  std::uint64_t seed = 0;

  void validate() const;
};

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;     // out

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

class Mlp {
 public:
  // Uniform init in +-sqrt(6 / fan_in) drawn from spec.seed; zero biases.
  explicit Mlp(const MlpSpec& spec);
  Mlp(double dropout_rate, std::vector<DenseLayer> layers);

  std::vector<std::size_t> widths() const;
  double dropout_rate() const noexcept { return dropout_rate_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::size_t input_dim() const noexcept { return layers_.front().in; }
  std::size_t n_classes() const noexcept { return layers_.back().out; }
  std::size_t parameter_count() const;

  // Deterministic forward pass (dropout off).
  std::vector<double> predict(std::span<const double> x) const;
  // One stochastic pass: each hidden unit is kept with probability 1-p and
  // scaled by 1/(1-p).
  std::vector<double> predict(std::span<const double> x, Rng& dropout) const;

  // Pre-activations z = W a + b of every layer for one input; dropout masks
  // are drawn from `dropout` when given.
  std::vector<std::vector<double>> preactivations(std::span<const double> x,
                                                  Rng* dropout = nullptr) const;

  // Mean cross entropy over the rows of x (dropout off).
  double loss(std::span<const double> x, std::span<const int> y) const;

  // Mean cross entropy and its gradient w.r.t. parameters() (dropout off).
  std::vector<double> gradient(std::span<const double> x, std::span<const int> y,
                               double* loss_out = nullptr) const;

  // Flat view: per layer, weights then bias.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  friend class MlpTrainer;
  double dropout_rate_;
  std::vector<DenseLayer> layers_;
};

struct TrainingHistory {
  double initial_loss = 0.0;       // full training set, dropout off
  double final_loss = 0.0;         // full training set, dropout off
  std::vector<double> epoch_loss;  // mean minibatch loss with dropout on
};

struct TrainResult {
  Mlp model;
  TrainingHistory history;
};

// Throws DivergenceError (with the epoch index) on a non-finite loss.
TrainResult train_mlp(const MlpSpec& spec, const TrainConfig& config,
                      const LabeledData& data);
// Continues training from `initial` (e.g. a pretrained network).
TrainResult train_mlp(Mlp initial, const TrainConfig& config,
                      const LabeledData& data);

// T stochastic passes per input. Samples are visited in order and all T
// passes of a sample are drawn before the next sample.
PredictionTensor mc_dropout_predict(const Mlp& model, const LabeledData& inputs,
                                    std::size_t passes, std::uint64_t seed);

// Versioned JSON weight file, numbers at 17 significant digits.
std::string render_model_json(const Mlp& model);
Mlp parse_model_json(std::string_view content);
void save_model(const Mlp& model, const std::string& path);
Mlp load_model(const std::string& path);

}  // namespace uqeval
