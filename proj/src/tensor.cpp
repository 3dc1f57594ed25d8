#include "uqeval/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "uqeval/error.hpp"
#include "uqeval/text.hpp"

namespace uqeval {
namespace {

constexpr int kProbabilityDigits = 9;

double row_sum(std::span<const double> row) {
  double s = 0.0;
  for (double v : row) s += v;
  return s;
}

std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    const auto nl = content.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < content.size()) lines.push_back(content.substr(start));
      break;
    }
    lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  return lines;
}

bool blank(std::string_view line) { return text::trim(line).empty(); }

struct RawRow {
  std::string sample_id;
  long long pass_id;
  std::vector<double> probs;
  std::size_t line_no;
};

// Checks one parsed row in place (optionally renormalizing it).
void check_row(std::vector<double>& probs, const LoadOptions& options,
               const std::string& ctx) {
  for (double v : probs) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw ParseError(ctx + "probability " + text::format_double(v, 17) +
                            " outside [0,1]");
    }
  }
  const double sum = row_sum(probs);
  const double dev = std::abs(sum - 1.0);
  if (dev <= PredictionTensor::kRowSumTolerance && !options.renormalize) return;
  if (options.renormalize && dev <= PredictionTensor::kRenormalizeBand) {
    for (double& v : probs) v /= sum;
    return;
  }
  std::string msg = ctx + "row sums to " + text::format_double(sum, 17) +
                    ", not 1 within " +
                    text::format_double(PredictionTensor::kRowSumTolerance, 3);
  if (!options.renormalize && dev <= PredictionTensor::kRenormalizeBand)
    msg += " (use --renormalize to rescale rows within 1e-3)";
  throw ParseError(msg);
}

PredictionTensor assemble(std::vector<RawRow> rows, const LoadOptions& options,
                          const std::string& source) {
  if (rows.empty()) throw ParseError(source + ": no prediction rows");
  const std::size_t n_classes = rows.front().probs.size();

  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::map<long long, const RawRow*>> passes;
  for (auto& r : rows) {
    const std::string ctx = text::where(source, r.line_no);
    if (r.probs.size() != n_classes) {
      throw ParseError(ctx + "expected " + std::to_string(n_classes) +
                       " probabilities, got " + std::to_string(r.probs.size()));
    }
    if (r.pass_id < 0) throw ParseError(ctx + "negative pass_id");
    check_row(r.probs, options, ctx);
    auto [it, inserted] = index.emplace(r.sample_id, ids.size());
    if (inserted) {
      ids.push_back(r.sample_id);
      passes.emplace_back();
    }
    auto& per_sample = passes[it->second];
    if (!per_sample.emplace(r.pass_id, &r).second) {
      throw ParseError(ctx + "duplicate (sample_id, pass_id) = (" + r.sample_id +
                       ", " + std::to_string(r.pass_id) + ")");
    }
  }

  const std::size_t n_passes = passes.front().size();
  std::vector<double> probs;
  probs.reserve(ids.size() * n_passes * n_classes);
  for (std::size_t s = 0; s < ids.size(); ++s) {
    if (passes[s].size() != n_passes) {
      throw ParseError(source + ": ragged pass counts: sample '" + ids[s] +
                            "' has " + std::to_string(passes[s].size()) +
                            " passes, sample '" + ids.front() + "' has " +
                            std::to_string(n_passes));
    }
    long long expected = 0;
    for (const auto& [pass_id, row] : passes[s]) {
      if (pass_id != expected) {
        throw ParseError(source + ": sample '" + ids[s] +
                              "' is missing pass_id " +
                              std::to_string(expected));
      }
      probs.insert(probs.end(), row->probs.begin(), row->probs.end());
      ++expected;
    }
  }
  return PredictionTensor(std::move(ids), n_passes, n_classes, std::move(probs));
}

std::vector<RawRow> parse_csv_rows(std::string_view content,
                                   const std::string& source) {
  const auto lines = split_lines(content);
  std::size_t i = 0;
  while (i < lines.size() && blank(lines[i])) ++i;
  if (i == lines.size()) throw ParseError(source + ": empty file");

  const auto header = text::split_csv(lines[i]);
  if (header.size() < 4 || text::trim(header[0]) != "sample_id" ||
      text::trim(header[1]) != "pass_id") {
    throw ParseError(text::where(source, i + 1) +
                     "header must be sample_id,pass_id,p_0,...,p_{C-1}");
  }
  for (std::size_t c = 2; c < header.size(); ++c) {
    if (text::trim(header[c]) != "p_" + std::to_string(c - 2)) {
      throw ParseError(text::where(source, i + 1) + "unexpected column '" +
                       std::string(header[c]) + "'");
    }
  }
  const std::size_t n_classes = header.size() - 2;

  std::vector<RawRow> rows;
  for (++i; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const std::string ctx = text::where(source, i + 1);
    const auto fields = text::split_csv(lines[i]);
    if (fields.size() != n_classes + 2) {
      throw ParseError(ctx + "expected " + std::to_string(n_classes + 2) +
                       " fields, got " + std::to_string(fields.size()));
    }
    RawRow row;
    row.sample_id = std::string(text::trim(fields[0]));
    if (row.sample_id.empty()) throw ParseError(ctx + "empty sample_id");
    const auto pass = text::parse_int(fields[1]);
    if (!pass) throw ParseError(ctx + "malformed pass_id '" + std::string(fields[1]) + "'");
    row.pass_id = *pass;
    for (std::size_t c = 0; c < n_classes; ++c) {
      const auto v = text::parse_double(fields[c + 2]);
      if (!v) {
        throw ParseError(ctx + "malformed probability '" +
                         std::string(fields[c + 2]) + "'");
      }
      row.probs.push_back(*v);
    }
    row.line_no = i + 1;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RawRow> parse_jsonl_rows(std::string_view content,
                                     const std::string& source) {
  const auto lines = split_lines(content);
  std::vector<RawRow> rows;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const std::string ctx = text::where(source, i + 1);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(ctx + "invalid JSON: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("sample_id") ||
        !obj.contains("pass_id") || !obj.contains("p")) {
      throw ParseError(ctx + "expected {\"sample_id\", \"pass_id\", \"p\"}");
    }
    const auto& sid = obj["sample_id"];
    const auto& pid = obj["pass_id"];
    const auto& p = obj["p"];
    if (!sid.is_string() || !pid.is_number_integer() || !p.is_array()) {
      throw ParseError(ctx + "field types must be string, int, array");
    }
    RawRow row;
    row.sample_id = sid.get<std::string>();
    if (row.sample_id.empty()) throw ParseError(ctx + "empty sample_id");
    row.pass_id = pid.get<long long>();
    for (const auto& v : p) {
      if (!v.is_number()) throw ParseError(ctx + "non-numeric probability");
      row.probs.push_back(v.get<double>());
    }
    row.line_no = i + 1;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

PredictionFormat format_from_path(std::string_view path) {
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() &&
           path.substr(path.size() - suffix.size()) == suffix;
  };
  return (ends_with(".jsonl") || ends_with(".json")) ? PredictionFormat::Jsonl
                                                     : PredictionFormat::Csv;
}

PredictionTensor::PredictionTensor(std::vector<std::string> sample_ids,
                                   std::size_t n_passes, std::size_t n_classes,
                                   std::vector<double> probs)
    : sample_ids_(std::move(sample_ids)),
      n_passes_(n_passes),
      n_classes_(n_classes),
      probs_(std::move(probs)) {
  if (sample_ids_.empty()) throw ValidationError("tensor has no samples");
  if (n_passes_ < 1) throw ValidationError("tensor needs at least one pass");
  if (n_classes_ < 2) throw ValidationError("tensor needs at least two classes");
  if (probs_.size() != sample_ids_.size() * n_passes_ * n_classes_) {
    throw ValidationError("probability buffer size does not match shape");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : sample_ids_) {
    if (id.empty()) throw ValidationError("empty sample id");
    if (!seen.insert(id).second)
      throw ValidationError("duplicate sample id '" + id + "'");
  }
  for (std::size_t s = 0; s < n_samples(); ++s) {
    for (std::size_t t = 0; t < n_passes_; ++t) {
      const auto r = row(s, t);
      for (double v : r) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
          throw ValidationError("sample '" + sample_ids_[s] + "' pass " +
                                std::to_string(t) +
                                ": probability outside [0,1]");
        }
      }
      if (std::abs(row_sum(r) - 1.0) > kRowSumTolerance) {
        throw ValidationError("sample '" + sample_ids_[s] + "' pass " +
                              std::to_string(t) + ": row does not sum to 1");
      }
    }
  }
}

std::span<const double> PredictionTensor::row(std::size_t sample,
                                              std::size_t pass) const {
  return std::span<const double>(probs_).subspan(
      (sample * n_passes_ + pass) * n_classes_, n_classes_);
}

std::span<const double> PredictionTensor::sample_rows(std::size_t sample) const {
  return std::span<const double>(probs_).subspan(
      sample * n_passes_ * n_classes_, n_passes_ * n_classes_);
}

LabelSet::LabelSet(std::vector<std::string> sample_ids, std::vector<int> labels)
    : ids_(std::move(sample_ids)), labels_(std::move(labels)) {
  if (ids_.size() != labels_.size())
    throw ValidationError("label ids and values differ in length");
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i].empty()) throw ValidationError("empty sample id in labels");
    if (labels_[i] < 0) {
      throw ValidationError("negative label for sample '" + ids_[i] + "'");
    }
    if (!index_.emplace(ids_[i], i).second)
      throw ValidationError("duplicate label sample id '" + ids_[i] + "'");
  }
}

std::optional<int> LabelSet::label_of(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return labels_[it->second];
}

std::vector<int> align_labels(std::span<const std::string> ids,
                              const LabelSet& labels,
                              std::optional<std::size_t> n_classes) {
  std::vector<int> out;
  out.reserve(ids.size());
  std::vector<std::string> missing_labels;
  for (const auto& id : ids) {
    const auto l = labels.label_of(id);
    if (!l) {
      missing_labels.push_back(id);
      continue;
    }
    if (n_classes && static_cast<std::size_t>(*l) >= *n_classes) {
      throw ValidationError("label " + std::to_string(*l) + " of sample '" + id +
                            "' is out of range for " +
                            std::to_string(*n_classes) + " classes");
    }
    out.push_back(*l);
  }
  std::vector<std::string> extra_labels;
  if (labels.size() != ids.size() - missing_labels.size()) {
    std::unordered_set<std::string_view> known(ids.begin(), ids.end());
    for (const auto& id : labels.sample_ids())
      if (!known.count(id)) extra_labels.push_back(id);
  }
  if (!missing_labels.empty() || !extra_labels.empty()) {
    std::ostringstream msg;
    msg << "sample id mismatch between predictions and labels;";
    auto list = [&](const char* what, const std::vector<std::string>& v) {
      if (v.empty()) return;
      msg << ' ' << what << ":";
      const std::size_t shown = std::min<std::size_t>(v.size(), 10);
      for (std::size_t i = 0; i < shown; ++i) msg << " '" << v[i] << "'";
      if (v.size() > shown) msg << " (+" << v.size() - shown << " more)";
    };
    list("no label for", missing_labels);
    list("label without prediction for", extra_labels);
    throw AlignmentError(msg.str());
  }
  return out;
}

AlignedView align(const PredictionTensor& t, const LabelSet& l) {
  return AlignedView{&t, align_labels(t.sample_ids(), l, t.n_classes())};
}

PredictionTensor parse_predictions(std::string_view content,
                                   PredictionFormat format,
                                   const LoadOptions& options,
                                   const std::string& source) {
  auto rows = format == PredictionFormat::Csv ? parse_csv_rows(content, source)
                                              : parse_jsonl_rows(content, source);
  return assemble(std::move(rows), options, source);
}

std::string render_predictions(const PredictionTensor& t,
                               PredictionFormat format) {
  std::string out;
  const std::size_t C = t.n_classes();
  if (format == PredictionFormat::Csv) {
    out += "sample_id,pass_id";
    for (std::size_t c = 0; c < C; ++c) out += ",p_" + std::to_string(c);
    out += '\n';
  }
  for (std::size_t s = 0; s < t.n_samples(); ++s) {
    for (std::size_t p = 0; p < t.n_passes(); ++p) {
      const auto r = t.row(s, p);
      if (format == PredictionFormat::Csv) {
        out += t.sample_ids()[s];
        out += ',';
        out += std::to_string(p);
        for (double v : r) {
          out += ',';
          out += text::format_double(v, kProbabilityDigits);
        }
      } else {
        out += "{\"sample_id\": ";
        out += nlohmann::json(t.sample_ids()[s]).dump();
        out += ", \"pass_id\": " + std::to_string(p) + ", \"p\": [";
        for (std::size_t c = 0; c < C; ++c) {
          if (c) out += ", ";
          out += text::format_double(r[c], kProbabilityDigits);
        }
        out += "]}";
      }
      out += '\n';
    }
  }
  return out;
}

PredictionTensor load_predictions(const std::string& path,
                                  PredictionFormat format,
                                  const LoadOptions& options) {
  std::string content;
  for (const auto& line : text::read_lines(path)) {
    content += line;
    content += '\n';
  }
  return parse_predictions(content, format, options, path);
}

void save_predictions(const PredictionTensor& t, const std::string& path,
                      PredictionFormat format) {
  text::write_file(path, render_predictions(t, format));
}

LabelSet parse_labels(std::string_view content, const std::string& source) {
  const auto lines = split_lines(content);
  std::size_t i = 0;
  while (i < lines.size() && blank(lines[i])) ++i;
  if (i == lines.size()) throw ParseError(source + ": empty label file");
  const auto header = text::split_csv(lines[i]);
  if (header.size() != 2 || text::trim(header[0]) != "sample_id" ||
      text::trim(header[1]) != "label") {
    throw ParseError(text::where(source, i + 1) + "header must be sample_id,label");
  }
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::unordered_set<std::string> seen;
  for (++i; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const std::string ctx = text::where(source, i + 1);
    const auto fields = text::split_csv(lines[i]);
    if (fields.size() != 2) throw ParseError(ctx + "expected 2 fields");
    std::string id(text::trim(fields[0]));
    if (id.empty()) throw ParseError(ctx + "empty sample_id");
    const auto label = text::parse_int(fields[1]);
    if (!label || *label < 0 || *label > 1'000'000) {
      throw ParseError(ctx + "malformed label '" + std::string(fields[1]) + "'");
    }
    if (!seen.insert(id).second)
      throw ParseError(ctx + "duplicate sample_id '" + id + "'");
    ids.push_back(std::move(id));
    labels.push_back(static_cast<int>(*label));
  }
  return LabelSet(std::move(ids), std::move(labels));
}

std::string render_labels(const LabelSet& labels) {
  std::string out = "sample_id,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += labels.sample_ids()[i];
    out += ',';
    out += std::to_string(labels.labels()[i]);
    out += '\n';
  }
  return out;
}

LabelSet load_labels(const std::string& path) {
  std::string content;
  for (const auto& line : text::read_lines(path)) {
    content += line;
    content += '\n';
  }
  return parse_labels(content, path);
}

void save_labels(const LabelSet& labels, const std::string& path) {
  text::write_file(path, render_labels(labels));
}

}  // namespace uqeval
