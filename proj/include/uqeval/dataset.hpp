#pragma once

// Synthetic 2-D binary datasets for the toy classifiers.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace uqeval {

enum class DatasetKind { TwoMoons, GaussianBlobs };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view s);

// Feature rows plus labels and stable sample ids.
struct LabeledData {
  std::size_t dim = 2;
  std::vector<double> x;  // row-major size() x dim
  std::vector<int> y;
  std::vector<std::string> ids;

  std::size_t size() const noexcept { return y.size(); }
};

struct SyntheticDataset {
  DatasetKind kind = DatasetKind::TwoMoons;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> points;  // n x 2
  std::vector<int> labels;
  std::vector<bool> is_train;

  std::size_t size() const noexcept { return labels.size(); }
  LabeledData train() const;
  LabeledData test() const;
};

// n >= 20 points, half per class; the split is stratified per class with
// `train_fraction` of each class in the training subset. `noise` is the
// standard deviation of the Gaussian jitter (two-moons) or of each cluster
// (blobs, centers at (-3, 0) and (3, 0)).
SyntheticDataset generate_dataset(DatasetKind kind, std::size_t n, double noise,
                                  std::uint64_t seed, double train_fraction = 0.75);

// CSV "x0,x1,label,split" with split in {train,test}.
std::string render_dataset_csv(const SyntheticDataset& d);

}  // namespace uqeval
