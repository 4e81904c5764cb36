#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <string_view>

#include "nnq/estimator.h"
#include "nnq/harness.h"

namespace nnq {

// Structured report documents. Undefined values (rho of a constant
// predictor, an unscored item's estimate) are written as JSON null or an
// empty CSV cell.

nlohmann::json to_json(const EstimatorConfig& config);
nlohmann::json to_json(const Prediction& prediction);
nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const SweepResult& result);
nlohmann::json to_json(const CurveResult& result);
nlohmann::json to_json(const AnnotatorBaselines& baselines);
nlohmann::json to_json(const SubsetComparison& comparison);

Prediction prediction_from_json(const nlohmann::json& j);
EvalReport eval_report_from_json(const nlohmann::json& j);
SweepResult sweep_result_from_json(const nlohmann::json& j);
CurveResult curve_result_from_json(const nlohmann::json& j);

// One row per item / grid point / curve point.
std::string to_csv(const EvalReport& report);
std::string to_csv(const SweepResult& result);
std::string to_csv(const CurveResult& result);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

}  // namespace nnq
