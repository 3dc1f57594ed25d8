#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uqeval/aggregate.hpp"
#include "uqeval/calibration.hpp"
#include "uqeval/demo.hpp"
#include "uqeval/error.hpp"
#include "uqeval/point_metrics.hpp"
#include "uqeval/ucm.hpp"

namespace py = pybind11;
using namespace uqeval;

namespace {

LogBase log_base(const std::string& b) {
  if (b == "2") return LogBase::Two;
  if (b == "e") return LogBase::E;
  throw ValidationError("log base must be '2' or 'e'");
}

// probs[sample][pass][class] -> tensor.
PredictionTensor to_tensor(const std::vector<std::vector<std::vector<double>>>& probs,
                           std::vector<std::string> ids) {
  if (probs.empty()) throw ValidationError("empty prediction tensor");
  if (ids.empty())
    for (std::size_t i = 0; i < probs.size(); ++i) ids.push_back("s" + std::to_string(i));
  const std::size_t T = probs[0].size();
  const std::size_t C = T ? probs[0][0].size() : 0;
  std::vector<double> flat;
  for (const auto& sample : probs) {
    if (sample.size() != T) throw ValidationError("ragged pass axis");
    for (const auto& row : sample) {
      if (row.size() != C) throw ValidationError("ragged class axis");
      flat.insert(flat.end(), row.begin(), row.end());
    }
  }
  return PredictionTensor(std::move(ids), T, C, std::move(flat));
}

std::vector<ScoredPrediction> to_scored(const std::vector<bool>& correct,
                                        const std::vector<double>& uncertainty) {
  if (correct.size() != uncertainty.size())
    throw ValidationError("correct and uncertainty differ in length");
  std::vector<ScoredPrediction> s;
  for (std::size_t i = 0; i < correct.size(); ++i) s.push_back({correct[i], uncertainty[i]});
  return s;
}

py::object ratio(const Ratio& r) { return r ? py::object(py::float_(*r)) : py::none(); }

py::dict ucm_dict(const UncertaintyConfusion& m) {
  py::dict d;
  d["threshold"] = m.threshold;
  d["tc"] = m.tc;
  d["tu"] = m.tu;
  d["fu"] = m.fu;
  d["fc"] = m.fc;
  d["n"] = m.n();
  d["uacc"] = ratio(uacc(m));
  d["usen"] = ratio(usen(m));
  d["uspe"] = ratio(uspe(m));
  d["upre"] = ratio(upre(m));
  return d;
}

py::dict summary_dict(const PredictiveSummary& s) {
  py::dict d;
  d["sample_id"] = s.sample_id;
  d["mean"] = s.mean;
  d["predicted_class"] = s.predicted_class;
  d["confidence"] = s.confidence;
  d["entropy"] = s.entropy;
  d["normalized_entropy"] = s.normalized_entropy;
  return d;
}

py::dict separation_dict(const SeparationReport& r) {
  auto group = [](const std::optional<GroupStats>& g) -> py::object {
    if (!g) return py::none();
    py::dict d;
    d["count"] = g->count;
    d["mean"] = g->mean;
    d["median"] = g->median;
    return d;
  };
  py::dict d;
  d["correct"] = group(r.correct);
  d["incorrect"] = group(r.incorrect);
  d["mean_difference"] = ratio(r.mean_difference);
  d["median_difference"] = ratio(r.median_difference);
  return d;
}

py::dict test_dict(const PairedTestResult& r) {
  py::dict d;
  d["t"] = r.t_statistic;
  d["df"] = r.degrees_of_freedom;
  d["p"] = r.p_value;
  d["mean_difference"] = r.mean_difference;
  d["degenerate"] = r.degenerate;
  return d;
}

}  // namespace

PYBIND11_MODULE(_uqeval, m) {
  m.doc() = "Uncertainty evaluation for stochastic classifiers";

  auto base_error = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", base_error.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base_error.ptr());
  py::register_exception<AlignmentError>(m, "AlignmentError", base_error.ptr());
  py::register_exception<IoError>(m, "IoError", base_error.ptr());

  m.def("predictive_entropy",
        [](const std::vector<double>& p, const std::string& base) {
          return predictive_entropy(p, log_base(base));
        },
        py::arg("p"), py::arg("base") = "2");
  m.def("predictive_mean",
        [](const std::vector<std::vector<double>>& rows) {
          if (rows.empty()) throw ValidationError("no rows");
          std::vector<double> flat;
          for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
          return predictive_mean(flat, rows[0].size());
        },
        py::arg("rows"));

  m.def("aggregate",
        [](const std::vector<std::vector<std::vector<double>>>& probs, const std::string& scheme,
           std::vector<std::size_t> partition, std::vector<std::string> ids,
           const std::string& base) {
          const auto t = to_tensor(probs, std::move(ids));
          const auto kind = parse_scheme_kind(scheme);
          const auto s = kind == SchemeKind::Emcd   ? AggregationScheme::emcd(std::move(partition))
                         : kind == SchemeKind::Mcd ? AggregationScheme::mcd()
                                                   : AggregationScheme::ensemble();
          py::list out;
          for (const auto& x : aggregate(t, s, log_base(base))) out.append(summary_dict(x));
          return out;
        },
        py::arg("probs"), py::arg("scheme") = "mcd",
        py::arg("partition") = std::vector<std::size_t>{},
        py::arg("sample_ids") = std::vector<std::string>{}, py::arg("base") = "2");

  m.def("classify_outcome",
        [](bool correct, double u, double thr) { return std::string(to_string(classify_outcome(correct, u, thr))); },
        py::arg("correct"), py::arg("uncertainty"), py::arg("threshold"));
  m.def("build_ucm",
        [](const std::vector<bool>& correct, const std::vector<double>& u, double thr) {
          return ucm_dict(build_ucm(to_scored(correct, u), thr));
        },
        py::arg("correct"), py::arg("uncertainty"), py::arg("threshold") = 0.3);
  m.def("threshold_sweep",
        [](const std::vector<bool>& correct, const std::vector<double>& u,
           const std::vector<double>& thresholds) {
          py::list out;
          for (const auto& p : threshold_sweep(to_scored(correct, u), thresholds).points)
            out.append(ucm_dict(p.ucm));
          return out;
        },
        py::arg("correct"), py::arg("uncertainty"),
        py::arg("thresholds") = threshold_grid(0.1, 0.1, 0.9));
  m.def("threshold_grid", &threshold_grid, py::arg("start"), py::arg("step"), py::arg("stop"));
  m.def("separation_report",
        [](const std::vector<bool>& correct, const std::vector<double>& u) {
          return separation_dict(separation_report(to_scored(correct, u)));
        },
        py::arg("correct"), py::arg("uncertainty"));

  m.def("calibration_report",
        [](const std::vector<double>& confidence, const std::vector<bool>& correct,
           std::size_t bins) {
          if (confidence.size() != correct.size())
            throw ValidationError("confidence and correct differ in length");
          std::vector<CalibrationSample> s;
          for (std::size_t i = 0; i < correct.size(); ++i) s.push_back({confidence[i], correct[i]});
          const auto r = calibration_report(s, bins);
          py::list rows;
          for (const auto& b : r.bins) {
            py::dict d;
            d["bin"] = b.index;
            d["lo"] = b.lo;
            d["hi"] = b.hi;
            d["count"] = b.count;
            d["accuracy"] = ratio(b.accuracy);
            d["confidence"] = ratio(b.confidence);
            rows.append(d);
          }
          py::dict d;
          d["ece"] = r.ece;
          d["n"] = r.n;
          d["M"] = r.n_bins;
          d["bins"] = rows;
          return d;
        },
        py::arg("confidence"), py::arg("correct"), py::arg("bins") = 10);
  m.def("bin_assign", &bin_assign, py::arg("confidence"), py::arg("bins"));

  m.def("accuracy",
        [](const std::vector<int>& predicted, const std::vector<int>& labels) {
          return accuracy(predicted, labels);
        },
        py::arg("predicted"), py::arg("labels"));
  m.def("auc_binary",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
          return auc_binary(scores, labels);
        },
        py::arg("scores"), py::arg("labels"));
  m.def("paired_t_test",
        [](std::vector<double> a, std::vector<double> b) {
          MetricDistribution da{"a", std::move(a), {}}, db{"b", std::move(b), {}};
          for (std::size_t i = 0; i < da.values.size(); ++i) da.run_seeds.push_back(i);
          for (std::size_t i = 0; i < db.values.size(); ++i) db.run_seeds.push_back(i);
          return test_dict(paired_t_test(da, db));
        },
        py::arg("a"), py::arg("b"));
  m.def("student_t_cdf", &student_t_cdf, py::arg("t"), py::arg("df"));

  m.def("run_demo",
        [](bool quick, std::uint64_t seed) {
          DemoResult r = [&] {
            py::gil_scoped_release release;
            return run_demo(DemoConfig::preset(quick, seed));
          }();
          py::dict schemes;
          for (const auto& s : r.schemes) {
            py::dict d;
            d["accuracy"] = s.accuracy;
            d["ucm"] = ucm_dict(s.ucm);
            d["ece"] = s.calibration.ece;
            d["separation"] = separation_dict(s.separation);
            schemes[py::str(std::string(to_string(s.kind)))] = d;
          }
          py::dict out;
          out["seed"] = seed;
          out["n_test"] = r.test_labels.size();
          out["schemes"] = schemes;
          out["accuracy_test"] = test_dict(r.comparison.accuracy.test);
          if (r.comparison.auc) out["auc_test"] = test_dict(r.comparison.auc->test);
          return out;
        },
        py::arg("quick") = true, py::arg("seed") = 7);
}
