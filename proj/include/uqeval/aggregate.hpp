#pragma once

// Collapses stochastic forward passes into a per-sample predictive mean and
// its predictive entropy, under the MC-dropout, ensemble and
// ensemble-of-MC-dropout schemes.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uqeval/tensor.hpp"

namespace uqeval {

enum class LogBase { Two, E };

enum class SchemeKind { Mcd, Ensemble, Emcd };

std::string_view to_string(SchemeKind kind);
// Accepts "mcd", "ensemble", "emcd"; throws ValidationError otherwise.
SchemeKind parse_scheme_kind(std::string_view s);

class AggregationScheme {
 public:
  static AggregationScheme mcd() { return AggregationScheme(SchemeKind::Mcd, {}); }
  static AggregationScheme ensemble() {
    return AggregationScheme(SchemeKind::Ensemble, {});
  }
  // The pass axis is split into consecutive blocks, one per member; each
  // count must be >= 1.
  static AggregationScheme emcd(std::vector<std::size_t> member_pass_counts);

  SchemeKind kind() const noexcept { return kind_; }
  const std::vector<std::size_t>& member_pass_counts() const noexcept {
    return parts_;
  }

  // Throws ValidationError if the EMCD partition does not cover n_passes.
  void validate_for(std::size_t n_passes) const;

 private:
  AggregationScheme(SchemeKind kind, std::vector<std::size_t> parts)
      : kind_(kind), parts_(std::move(parts)) {}
  SchemeKind kind_;
  std::vector<std::size_t> parts_;
};

// "KxT" (K members of T passes each) or a comma list "1,3,2".
std::vector<std::size_t> parse_partition(std::string_view spec);

struct PredictiveSummary {
  std::string sample_id;
  std::vector<double> mean;
  int predicted_class = 0;
  double confidence = 0.0;
  double entropy = 0.0;
  double normalized_entropy = 0.0;

  friend bool operator==(const PredictiveSummary&,
                         const PredictiveSummary&) = default;
};

// Arithmetic mean of T rows of length n_classes, stored contiguously.
// Summation runs pass by pass in index order.
std::vector<double> predictive_mean(std::span<const double> rows,
                                    std::size_t n_classes);

// -sum p log p with 0 log 0 = 0. Throws ValidationError for vectors that are
// not probability distributions (tolerance 1e-6).
double predictive_entropy(std::span<const double> mean, LogBase base);

// log_base(C): the entropy of the uniform distribution.
double max_entropy(std::size_t n_classes, LogBase base);

// Lowest index among the maxima.
std::size_t argmax(std::span<const double> v);

PredictiveSummary summarize(std::string sample_id, std::vector<double> mean,
                            LogBase base);

std::vector<PredictiveSummary> aggregate(const PredictionTensor& t,
                                         const AggregationScheme& scheme,
                                         LogBase base = LogBase::Two);

// Unbiased per-class variance across the T rows; requires T >= 2.
std::vector<double> pass_variance(std::span<const double> rows,
                                  std::size_t n_classes);

// Summary CSV: sample_id,predicted_class,confidence,entropy,
// normalized_entropy,p_0..p_{C-1}; values rendered at 17 significant digits.
std::string render_summaries(std::span<const PredictiveSummary> summaries);
std::vector<PredictiveSummary> parse_summaries(
    std::string_view content, const std::string& source = "<memory>");
void save_summaries(std::span<const PredictiveSummary> summaries,
                    const std::string& path);
std::vector<PredictiveSummary> load_summaries(const std::string& path);

std::vector<std::string> summary_ids(std::span<const PredictiveSummary> s);

}  // namespace uqeval
