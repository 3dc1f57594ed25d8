#include "uqeval/mlp.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "uqeval/error.hpp"
#include "uqeval/text.hpp"

namespace uqeval {
namespace {

constexpr int kModelFormatVersion = 1;
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kDropoutStream = 2;

// Activations and gradients for one sample.
struct Workspace {
  std::vector<std::vector<double>> z;     // pre-activation per layer
  std::vector<std::vector<double>> a;     // a[0] input, a[l+1] output of layer l
  std::vector<std::vector<double>> mask;  // per hidden layer: 0 or 1/(1-p)
  std::vector<std::vector<double>> dz;

  explicit Workspace(const std::vector<DenseLayer>& layers) {
    a.emplace_back(layers.front().in);
    for (const auto& l : layers) {
      z.emplace_back(l.out);
      a.emplace_back(l.out);
      mask.emplace_back(l.out, 1.0);
      dz.emplace_back(l.out);
    }
  }
};

void softmax_inplace(std::span<const double> z, std::span<double> out) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
}

// Fills ws for input x. When `dropout` is non-null masks are resampled.
void forward(const std::vector<DenseLayer>& layers, double rate,
             std::span<const double> x, Rng* dropout, Workspace& ws) {
  std::copy(x.begin(), x.end(), ws.a[0].begin());
  const std::size_t L = layers.size();
  const double keep_scale = rate > 0.0 ? 1.0 / (1.0 - rate) : 1.0;
  for (std::size_t l = 0; l < L; ++l) {
    const auto& layer = layers[l];
    const auto& in = ws.a[l];
    auto& z = ws.z[l];
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* w = layer.weights.data() + o * layer.in;
      double acc = layer.bias[o];
      for (std::size_t i = 0; i < layer.in; ++i) acc += w[i] * in[i];
      z[o] = acc;
    }
    if (l + 1 == L) {
      softmax_inplace(z, ws.a[l + 1]);
      break;
    }
    auto& mask = ws.mask[l];
    for (std::size_t o = 0; o < layer.out; ++o) {
      if (dropout != nullptr && rate > 0.0)
        mask[o] = dropout->uniform() < rate ? 0.0 : keep_scale;
      else
        mask[o] = 1.0;
      ws.a[l + 1][o] = std::max(z[o], 0.0) * mask[o];
    }
  }
}

double sample_loss(const Workspace& ws, int label) {
  const auto& z = ws.z.back();
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  return m + std::log(sum) - z[static_cast<std::size_t>(label)];
}

// Accumulates d(loss)/d(params) of the sample in ws into grad (flat layout).
void backward(const std::vector<DenseLayer>& layers, int label, Workspace& ws,
              std::span<double> grad) {
  const std::size_t L = layers.size();
  auto& top = ws.dz[L - 1];
  for (std::size_t c = 0; c < top.size(); ++c)
    top[c] = ws.a[L][c] - (static_cast<int>(c) == label ? 1.0 : 0.0);

  std::vector<std::size_t> offsets(L);
  std::size_t off = 0;
  for (std::size_t l = 0; l < L; ++l) {
    offsets[l] = off;
    off += layers[l].weights.size() + layers[l].bias.size();
  }

  for (std::size_t l = L; l-- > 0;) {
    const auto& layer = layers[l];
    const auto& dz = ws.dz[l];
    const auto& in = ws.a[l];
    double* gw = grad.data() + offsets[l];
    double* gb = gw + layer.weights.size();
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double d = dz[o];
      gb[o] += d;
      if (d == 0.0) continue;
      double* row = gw + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) row[i] += d * in[i];
    }
    if (l == 0) break;
    auto& below = ws.dz[l - 1];
    std::fill(below.begin(), below.end(), 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double d = dz[o];
      if (d == 0.0) continue;
      const double* w = layer.weights.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) below[i] += w[i] * d;
    }
    const auto& z_below = ws.z[l - 1];
    const auto& mask_below = ws.mask[l - 1];
    for (std::size_t i = 0; i < below.size(); ++i)
      below[i] = z_below[i] > 0.0 ? below[i] * mask_below[i] : 0.0;
  }
}

void check_input(const Mlp& m, std::span<const double> x) {
  if (x.size() != m.input_dim())
    throw ValidationError("input has " + std::to_string(x.size()) +
                          " features, model expects " +
                          std::to_string(m.input_dim()));
}

void check_data(const LabeledData& d, std::size_t dim, std::size_t n_classes) {
  if (d.size() == 0) throw ValidationError("empty dataset");
  if (d.dim != dim || d.x.size() != d.size() * dim)
    throw ValidationError("dataset feature width does not match the model");
  for (int y : d.y)
    if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
      throw ValidationError("label out of range for the model head");
}

}  // namespace

void MlpSpec::validate() const {
  if (widths.size() < 3)
    throw ValidationError("MLP needs input, at least one hidden layer, and output");
  for (auto w : widths)
    if (w < 1) throw ValidationError("layer widths must be >= 1");
  if (widths.back() < 2) throw ValidationError("output width must be >= 2");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw ValidationError("dropout rate must be in [0,1)");
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("learning rate must be finite and >= 0");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0))
    throw ValidationError("invalid Adam moments");
}

Mlp::Mlp(const MlpSpec& spec) : dropout_rate_(spec.dropout_rate) {
  spec.validate();
  Rng rng(spec.seed);
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    DenseLayer layer;
    layer.in = spec.widths[l];
    layer.out = spec.widths[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in));
    layer.weights.resize(layer.in * layer.out);
    for (double& w : layer.weights) w = rng.uniform(-limit, limit);
    layer.bias.assign(layer.out, 0.0);
    layers_.push_back(std::move(layer));
  }
}

Mlp::Mlp(double dropout_rate, std::vector<DenseLayer> layers)
    : dropout_rate_(dropout_rate), layers_(std::move(layers)) {
  if (layers_.size() < 2) throw ValidationError("MLP needs at least one hidden layer");
  if (!(dropout_rate_ >= 0.0 && dropout_rate_ < 1.0))
    throw ValidationError("dropout rate must be in [0,1)");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.in < 1 || layer.out < 1 || layer.weights.size() != layer.in * layer.out ||
        layer.bias.size() != layer.out)
      throw ValidationError("layer " + std::to_string(l) + " has inconsistent shape");
    if (l > 0 && layers_[l - 1].out != layer.in)
      throw ValidationError("layer " + std::to_string(l) + " input width mismatch");
  }
  if (layers_.back().out < 2) throw ValidationError("output width must be >= 2");
}

std::vector<std::size_t> Mlp::widths() const {
  std::vector<std::size_t> w{layers_.front().in};
  for (const auto& l : layers_) w.push_back(l.out);
  return w;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<double> Mlp::predict(std::span<const double> x) const {
  check_input(*this, x);
  Workspace ws(layers_);
  forward(layers_, dropout_rate_, x, nullptr, ws);
  return ws.a.back();
}

std::vector<double> Mlp::predict(std::span<const double> x, Rng& dropout) const {
  check_input(*this, x);
  Workspace ws(layers_);
  forward(layers_, dropout_rate_, x, &dropout, ws);
  return ws.a.back();
}

std::vector<std::vector<double>> Mlp::preactivations(std::span<const double> x,
                                                     Rng* dropout) const {
  check_input(*this, x);
  Workspace ws(layers_);
  forward(layers_, dropout_rate_, x, dropout, ws);
  return ws.z;
}

double Mlp::loss(std::span<const double> x, std::span<const int> y) const {
  const std::size_t d = input_dim();
  if (y.empty() || x.size() != y.size() * d)
    throw ValidationError("loss input shape mismatch");
  Workspace ws(layers_);
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    forward(layers_, dropout_rate_, x.subspan(i * d, d), nullptr, ws);
    total += sample_loss(ws, y[i]);
  }
  return total / static_cast<double>(y.size());
}

std::vector<double> Mlp::gradient(std::span<const double> x, std::span<const int> y,
                                  double* loss_out) const {
  const std::size_t d = input_dim();
  if (y.empty() || x.size() != y.size() * d)
    throw ValidationError("gradient input shape mismatch");
  std::vector<double> grad(parameter_count(), 0.0);
  Workspace ws(layers_);
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    forward(layers_, dropout_rate_, x.subspan(i * d, d), nullptr, ws);
    total += sample_loss(ws, y[i]);
    backward(layers_, y[i], ws, grad);
  }
  const double inv = 1.0 / static_cast<double>(y.size());
  for (double& g : grad) g *= inv;
  if (loss_out) *loss_out = total * inv;
  return grad;
}

std::vector<double> Mlp::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.weights.begin(), l.weights.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void Mlp::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count())
    throw ValidationError("parameter vector has the wrong length");
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (double& w : l.weights) w = flat[k++];
    for (double& b : l.bias) b = flat[k++];
  }
}

class MlpTrainer {
 public:
  static TrainResult run(Mlp model, const TrainConfig& config, const LabeledData& data) {
    config.validate();
    check_data(data, model.input_dim(), model.n_classes());

    TrainResult result{std::move(model), {}};
    Mlp& m = result.model;
    result.history.initial_loss = m.loss(data.x, data.y);

    Rng shuffle_rng(derive_seed(config.seed, kShuffleStream));
    Rng dropout_rng(derive_seed(config.seed, kDropoutStream));

    const std::size_t P = m.parameter_count();
    const std::size_t d = m.input_dim();
    std::vector<double> params = m.parameters();
    std::vector<double> grad(P), first(P, 0.0), second(P, 0.0);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Workspace ws(m.layers_);
    double beta1_t = 1.0, beta2_t = 1.0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      shuffle_rng.shuffle(order);
      double epoch_loss = 0.0;
      std::size_t batches = 0;
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t end = std::min(order.size(), start + config.batch_size);
        std::fill(grad.begin(), grad.end(), 0.0);
        double batch_loss = 0.0;
        for (std::size_t k = start; k < end; ++k) {
          const std::size_t i = order[k];
          forward(m.layers_, m.dropout_rate_,
                  std::span<const double>(data.x).subspan(i * d, d), &dropout_rng, ws);
          batch_loss += sample_loss(ws, data.y[i]);
          backward(m.layers_, data.y[i], ws, grad);
        }
        const double inv = 1.0 / static_cast<double>(end - start);
        batch_loss *= inv;
        if (!std::isfinite(batch_loss))
          throw DivergenceError(epoch, "training diverged (non-finite loss) at epoch " +
                                           std::to_string(epoch));

        beta1_t *= config.beta1;
        beta2_t *= config.beta2;
        for (std::size_t p = 0; p < P; ++p) {
          const double g = grad[p] * inv;
          first[p] = config.beta1 * first[p] + (1.0 - config.beta1) * g;
          second[p] = config.beta2 * second[p] + (1.0 - config.beta2) * g * g;
          const double m_hat = first[p] / (1.0 - beta1_t);
          const double v_hat = second[p] / (1.0 - beta2_t);
          params[p] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
        }
        m.set_parameters(params);
        epoch_loss += batch_loss;
        ++batches;
      }
      result.history.epoch_loss.push_back(epoch_loss / static_cast<double>(batches));
    }
    result.history.final_loss = m.loss(data.x, data.y);
    if (!std::isfinite(result.history.final_loss))
      throw DivergenceError(config.epochs - 1, "training diverged (non-finite final loss)");
    return result;
  }
};

TrainResult train_mlp(const MlpSpec& spec, const TrainConfig& config,
                      const LabeledData& data) {
  return MlpTrainer::run(Mlp(spec), config, data);
}

TrainResult train_mlp(Mlp initial, const TrainConfig& config, const LabeledData& data) {
  return MlpTrainer::run(std::move(initial), config, data);
}

PredictionTensor mc_dropout_predict(const Mlp& model, const LabeledData& inputs,
                                    std::size_t passes, std::uint64_t seed) {
  if (passes < 1) throw ValidationError("need at least one forward pass");
  check_data(inputs, model.input_dim(), model.n_classes());
  const std::size_t d = model.input_dim();
  const std::size_t C = model.n_classes();
  Rng rng(seed);
  std::vector<double> probs;
  probs.reserve(inputs.size() * passes * C);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto x = std::span<const double>(inputs.x).subspan(i * d, d);
    for (std::size_t t = 0; t < passes; ++t) {
      const auto p = model.predict(x, rng);
      probs.insert(probs.end(), p.begin(), p.end());
    }
  }
  return PredictionTensor(inputs.ids, passes, C, std::move(probs));
}

std::string render_model_json(const Mlp& model) {
  auto array = [](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      s += text::format_double(v[i], 17);
    }
    return s + "]";
  };
  std::string out = "{\n  \"format\": \"uqeval-mlp\",\n  \"version\": " +
                    std::to_string(kModelFormatVersion) + ",\n  \"dropout_rate\": " +
                    text::format_double(model.dropout_rate(), 17) + ",\n  \"widths\": [";
  const auto w = model.widths();
  for (std::size_t i = 0; i < w.size(); ++i) out += (i ? ", " : "") + std::to_string(w[i]);
  out += "],\n  \"layers\": [\n";
  const auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    out += "    {\"in\": " + std::to_string(layers[l].in) +
           ", \"out\": " + std::to_string(layers[l].out) +
           ",\n     \"weights\": " + array(layers[l].weights) +
           ",\n     \"bias\": " + array(layers[l].bias) + "}";
    out += l + 1 < layers.size() ? ",\n" : "\n";
  }
  out += "  ]\n}\n";
  return out;
}

Mlp parse_model_json(std::string_view content) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "uqeval-mlp")
      throw ParseError("not a uqeval-mlp model file");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw ParseError("unsupported model file version");
    std::vector<DenseLayer> layers;
    for (const auto& jl : j.at("layers")) {
      DenseLayer l;
      l.in = jl.at("in").get<std::size_t>();
      l.out = jl.at("out").get<std::size_t>();
      l.weights = jl.at("weights").get<std::vector<double>>();
      l.bias = jl.at("bias").get<std::vector<double>>();
      layers.push_back(std::move(l));
    }
    Mlp m(j.at("dropout_rate").get<double>(), std::move(layers));
    if (j.at("widths").get<std::vector<std::size_t>>() != m.widths())
      throw ParseError("model widths disagree with layer shapes");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const Mlp& model, const std::string& path) {
  text::write_file(path, render_model_json(model));
}

Mlp load_model(const std::string& path) {
  std::string content;
  for (const auto& l : text::read_lines(path)) content += l + '\n';
  return parse_model_json(content);
}

}  // namespace uqeval
