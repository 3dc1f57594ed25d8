#include "uqeval/dataset.hpp"

#include <cmath>
#include <numbers>

#include "uqeval/error.hpp"
#include "uqeval/rng.hpp"
#include "uqeval/text.hpp"

namespace uqeval {

std::string_view to_string(DatasetKind kind) {
  return kind == DatasetKind::TwoMoons ? "two-moons" : "gaussian-blobs";
}

DatasetKind parse_dataset_kind(std::string_view s) {
  if (s == "two-moons" || s == "moons") return DatasetKind::TwoMoons;
  if (s == "gaussian-blobs" || s == "blobs") return DatasetKind::GaussianBlobs;
  throw ValidationError("unknown dataset kind '" + std::string(s) + "'");
}

namespace {

LabeledData subset(const SyntheticDataset& d, bool train) {
  LabeledData out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.is_train[i] != train) continue;
    out.x.push_back(d.points[2 * i]);
    out.x.push_back(d.points[2 * i + 1]);
    out.y.push_back(d.labels[i]);
    out.ids.push_back("s" + std::to_string(i));
  }
  return out;
}

}  // namespace

LabeledData SyntheticDataset::train() const { return subset(*this, true); }
LabeledData SyntheticDataset::test() const { return subset(*this, false); }

SyntheticDataset generate_dataset(DatasetKind kind, std::size_t n, double noise,
                                  std::uint64_t seed, double train_fraction) {
  if (n < 20) throw ValidationError("dataset needs at least 20 points");
  if (!(noise >= 0.0)) throw ValidationError("noise must be >= 0");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("train fraction must be in (0,1)");

  SyntheticDataset d;
  d.kind = kind;
  d.noise = noise;
  d.seed = seed;
  Rng rng(seed);

  const std::size_t n0 = (n + 1) / 2;
  const std::size_t n1 = n - n0;
  d.points.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i < n0 ? 0 : 1;
    double x0 = 0.0, x1 = 0.0;
    if (kind == DatasetKind::TwoMoons) {
      const std::size_t k = label == 0 ? i : i - n0;
      const std::size_t count = label == 0 ? n0 : n1;
      const double t = std::numbers::pi * static_cast<double>(k) /
                       static_cast<double>(count - 1);
      if (label == 0) {
        x0 = std::cos(t);
        x1 = std::sin(t);
      } else {
        x0 = 1.0 - std::cos(t);
        x1 = 0.5 - std::sin(t);
      }
    } else {
      x0 = label == 0 ? -3.0 : 3.0;
    }
    x0 += noise * rng.normal();
    x1 += noise * rng.normal();
    d.points.push_back(x0);
    d.points.push_back(x1);
    d.labels.push_back(label);
  }

  // Stratified split.
  d.is_train.assign(n, false);
  for (int label = 0; label < 2; ++label) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (d.labels[i] == label) idx.push_back(i);
    rng.shuffle(idx);
    auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(idx.size())));
    n_train = std::min(std::max<std::size_t>(n_train, 1), idx.size() - 1);
    for (std::size_t k = 0; k < n_train; ++k) d.is_train[idx[k]] = true;
  }
  return d;
}

std::string render_dataset_csv(const SyntheticDataset& d) {
  std::string out = "x0,x1,label,split\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    out += text::format_double(d.points[2 * i], 17) + ',' +
           text::format_double(d.points[2 * i + 1], 17) + ',' +
           std::to_string(d.labels[i]) + ',' + (d.is_train[i] ? "train" : "test") +
           '\n';
  }
  return out;
}

}  // namespace uqeval
