#include "uqeval/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "uqeval/error.hpp"

namespace uqeval {
namespace {

constexpr std::uint64_t kMemberTrainStream = 0x7a11;

void check_models(std::span<const Mlp> models) {
  if (models.empty()) throw ValidationError("need at least one model");
  for (const auto& m : models) {
    if (m.input_dim() != models.front().input_dim() ||
        m.n_classes() != models.front().n_classes())
      throw ValidationError("ensemble members disagree on input or output width");
  }
}

}  // namespace

void EnsembleSpec::validate() const {
  if (members < 2) throw ValidationError("an ensemble needs at least 2 members");
  if (depth_choices.empty()) throw ValidationError("no hidden depth choices");
  for (auto d : depth_choices) {
    if (d < 1 || d > width_ranges.size())
      throw ValidationError("hidden depth without a width range");
  }
  for (const auto& r : width_ranges)
    if (r.lo < 1 || r.hi < r.lo) throw ValidationError("empty width range");
  if (input_dim < 1 || n_classes < 2) throw ValidationError("invalid ensemble io widths");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw ValidationError("dropout rate must be in [0,1)");
}

std::vector<MlpSpec> member_specs(const EnsembleSpec& spec) {
  spec.validate();
  Rng arch(spec.master_seed);
  std::vector<MlpSpec> out;
  for (std::size_t k = 0; k < spec.members; ++k) {
    MlpSpec m;
    m.dropout_rate = spec.dropout_rate;
    m.seed = derive_seed(spec.master_seed, k + 1);
    const std::size_t depth = spec.depth_choices[arch.below(spec.depth_choices.size())];
    m.widths.push_back(spec.input_dim);
    for (std::size_t j = 0; j < depth; ++j) {
      const auto& r = spec.width_ranges[j];
      m.widths.push_back(r.lo + arch.below(r.hi - r.lo + 1));
    }
    m.widths.push_back(spec.n_classes);
    out.push_back(std::move(m));
  }
  return out;
}

TrainConfig member_config(const MlpSpec& member, const TrainConfig& base) {
  TrainConfig c = base;
  c.seed = derive_seed(member.seed, kMemberTrainStream);
  return c;
}

std::vector<Mlp> train_members(std::span<const MlpSpec> members,
                               const TrainConfig& base, const LabeledData& data,
                               unsigned threads) {
  if (members.empty()) throw ValidationError("no members to train");
  std::vector<std::optional<Mlp>> trained(members.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(members.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= members.size()) return;
      try {
        trained[k] = train_mlp(members[k], member_config(members[k], base), data).model;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Mlp> out;
  out.reserve(members.size());
  for (auto& m : trained) out.push_back(std::move(*m));
  return out;
}

std::vector<Mlp> train_ensemble(const EnsembleSpec& spec, const TrainConfig& base,
                                const LabeledData& data, unsigned threads) {
  const auto specs = member_specs(spec);
  return train_members(specs, base, data, threads);
}

PredictionTensor ensemble_predict(std::span<const Mlp> models,
                                  const LabeledData& inputs) {
  check_models(models);
  const std::size_t d = models.front().input_dim();
  const std::size_t C = models.front().n_classes();
  if (inputs.dim != d || inputs.x.size() != inputs.size() * d)
    throw ValidationError("input width does not match the ensemble");
  std::vector<double> probs;
  probs.reserve(inputs.size() * models.size() * C);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto x = std::span<const double>(inputs.x).subspan(i * d, d);
    for (const auto& m : models) {
      const auto p = m.predict(x);
      probs.insert(probs.end(), p.begin(), p.end());
    }
  }
  return PredictionTensor(inputs.ids, models.size(), C, std::move(probs));
}

EmcdPrediction emcd_predict(std::span<const Mlp> models, const LabeledData& inputs,
                            std::size_t passes_per_member, std::uint64_t seed) {
  check_models(models);
  if (passes_per_member < 1) throw ValidationError("need at least one pass per member");
  const std::size_t K = models.size();
  const std::size_t T = passes_per_member;
  const std::size_t C = models.front().n_classes();
  const std::size_t n = inputs.size();

  std::vector<double> probs(n * K * T * C);
  for (std::size_t k = 0; k < K; ++k) {
    const auto member = mc_dropout_predict(models[k], inputs, T, derive_seed(seed, k));
    for (std::size_t i = 0; i < n; ++i) {
      const auto rows = member.sample_rows(i);
      std::copy(rows.begin(), rows.end(),
                probs.begin() + static_cast<std::ptrdiff_t>((i * K * T + k * T) * C));
    }
  }
  return EmcdPrediction{PredictionTensor(inputs.ids, K * T, C, std::move(probs)),
                        AggregationScheme::emcd(std::vector<std::size_t>(K, T))};
}

}  // namespace uqeval
