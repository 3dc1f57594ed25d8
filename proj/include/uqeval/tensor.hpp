#pragma once

// Prediction data model: the raw stochastic output of a classifier
// (sample x pass x class probability rows) and the ground-truth labels it is
// evaluated against.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace uqeval {

enum class PredictionFormat { Csv, Jsonl };

// Picks the format from the file extension (".jsonl" / ".json" -> Jsonl,
// everything else Csv).
PredictionFormat format_from_path(std::string_view path);

struct LoadOptions {
  // Rows within kRenormalizeBand of 1 are rescaled by their sum. Rows outside
  // the band are rejected regardless.
  bool renormalize = false;
};

// Dense (sample, pass, class) probability tensor. Immutable once constructed;
// the constructor enforces every invariant.
class PredictionTensor {
 public:
  static constexpr double kRowSumTolerance = 1e-6;
  static constexpr double kRenormalizeBand = 1e-3;

  // `probs` is row-major over (sample, pass, class). Throws ValidationError.
  PredictionTensor(std::vector<std::string> sample_ids, std::size_t n_passes,
                   std::size_t n_classes, std::vector<double> probs);

  std::size_t n_samples() const noexcept { return sample_ids_.size(); }
  std::size_t n_passes() const noexcept { return n_passes_; }
  std::size_t n_classes() const noexcept { return n_classes_; }

  const std::vector<std::string>& sample_ids() const noexcept {
    return sample_ids_;
  }
  std::span<const double> data() const noexcept { return probs_; }

  // One probability row of length C.
  std::span<const double> row(std::size_t sample, std::size_t pass) const;
  // All T rows of one sample, contiguous (T*C values).
  std::span<const double> sample_rows(std::size_t sample) const;

  friend bool operator==(const PredictionTensor&,
                         const PredictionTensor&) = default;

 private:
  std::vector<std::string> sample_ids_;
  std::size_t n_passes_;
  std::size_t n_classes_;
  std::vector<double> probs_;
};

// Ground-truth class index per sample id.
class LabelSet {
 public:
  // Throws ValidationError on duplicate ids, negative labels or size mismatch.
  LabelSet(std::vector<std::string> sample_ids, std::vector<int> labels);

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& sample_ids() const noexcept { return ids_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  std::optional<int> label_of(const std::string& id) const;

 private:
  std::vector<std::string> ids_;
  std::vector<int> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Labels reordered to follow `ids`. Throws AlignmentError naming the
// symmetric difference of the id sets, and ValidationError when a label is
// >= n_classes (if given).
std::vector<int> align_labels(std::span<const std::string> ids,
                              const LabelSet& labels,
                              std::optional<std::size_t> n_classes = {});

// A tensor joined with its labels; labels[i] belongs to tensor sample i.
struct AlignedView {
  const PredictionTensor* tensor;
  std::vector<int> labels;
};

AlignedView align(const PredictionTensor& t, const LabelSet& l);

// Text-level codecs. `source` names the input in error messages.
PredictionTensor parse_predictions(std::string_view content,
                                   PredictionFormat format,
                                   const LoadOptions& options = {},
                                   const std::string& source = "<memory>");
std::string render_predictions(const PredictionTensor& t,
                               PredictionFormat format);

PredictionTensor load_predictions(const std::string& path,
                                  PredictionFormat format,
                                  const LoadOptions& options = {});
void save_predictions(const PredictionTensor& t, const std::string& path,
                      PredictionFormat format);

LabelSet parse_labels(std::string_view content,
                      const std::string& source = "<memory>");
std::string render_labels(const LabelSet& labels);
LabelSet load_labels(const std::string& path);
void save_labels(const LabelSet& labels, const std::string& path);

}  // namespace uqeval
