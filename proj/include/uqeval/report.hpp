#pragma once

// Machine (JSON, CSV) and human (text) renderings of evaluation results.
// Undefined ratios become JSON null, CSV/text "n/a".

#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "uqeval/calibration.hpp"
#include "uqeval/point_metrics.hpp"
#include "uqeval/ucm.hpp"

namespace uqeval::report {

using Json = nlohmann::ordered_json;

Json ratio_json(const Ratio& r);

Json ucm_json(const UncertaintyConfusion& m);
// 2x2 matrix in correct/incorrect x certain/uncertain layout, then the four
// metrics with UAcc as a percentage.
std::string ucm_text(const UncertaintyConfusion& m, std::string_view title = {});
std::string ucm_csv(const UncertaintyConfusion& m);

// "threshold,tc,tu,fu,fc,uacc,usen,uspe,upre".
std::string sweep_csv(const SweepCurve& curve);
Json sweep_json(const SweepCurve& curve);
std::string sweep_text(const SweepCurve& curve);

Json calibration_json(const CalibrationReport& r);
std::string calibration_text(const CalibrationReport& r);

Json separation_json(const SeparationReport& r);
std::string separation_text(const SeparationReport& r);

// {metric, mean_a, sd_a, mean_b, sd_b, t, df, p, degenerate}; an infinite t
// is written as the string "inf" / "-inf".
Json comparison_json(const MetricComparison& c);
Json comparison_json(const ModelComparison& c);
std::string comparison_text(const ModelComparison& c);
// Raw per-run values: "metric,model,run_seed,value".
std::string distributions_csv(const ModelComparison& c);

}  // namespace uqeval::report
