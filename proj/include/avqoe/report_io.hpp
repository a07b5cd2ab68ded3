#pragma once

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "avqoe/cross_validation.hpp"
#include "json.hpp"

namespace avqoe {

inline constexpr std::string_view kReportFormat = "avqoe-report";
inline constexpr int kReportFormatVersion = 1;
inline constexpr std::string_view kScatterCsvHeader = "condition_id,actual_mos,predicted_mos,repetition";
inline constexpr std::string_view kImportanceCsvHeader = "feature,importance";

inline nlohmann::json to_json(const CvConfig& cv) {
  return {{"k", cv.k}, {"repetitions", cv.repetitions}, {"seed", cv.seed}, {"stratify", cv.stratify}};
}

inline nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

/// Metrics, per-repetition and per-fold tables, and importances. Prediction pairs
/// go to the scatter CSV instead.
inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["kind"] = r.kind;
  j["rmse"] = r.rmse;
  j["pearson_r"] = r.pearson;
  j["abs_err_p95"] = r.abs_err_p95;
  j["outlier_ratio"] = optional_number(r.outlier_ratio);
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& rep : r.repetitions) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : rep.folds) folds.push_back({{"fold", f.fold}, {"n_test", f.n_test}, {"rmse", f.rmse}});
    reps.push_back({{"repetition", rep.repetition},
                    {"rmse", rep.rmse},
                    {"pearson_r", rep.pearson},
                    {"abs_err_p95", rep.abs_err_p95},
                    {"outlier_ratio", optional_number(rep.outlier_ratio)},
                    {"folds", folds}});
  }
  j["repetitions"] = std::move(reps);
  if (!r.importances.empty()) {
    nlohmann::json imp = nlohmann::json::object();
    for (const auto& fi : r.importances) imp[fi.feature] = fi.importance;
    j["feature_importance"] = std::move(imp);
  }
  return j;
}

/// Report document: {format, version, cv, ranking, <model name>: report...}.
inline nlohmann::json to_json(const ComparisonTable& table) {
  nlohmann::json j;
  j["format"] = kReportFormat;
  j["version"] = kReportFormatVersion;
  j["cv"] = to_json(table.cv);
  nlohmann::json ranking = nlohmann::json::array();
  for (auto i : table.ranking) ranking.push_back(table.reports[i].model);
  j["ranking"] = std::move(ranking);
  for (const auto& r : table.reports) {
    if (j.contains(r.model)) throw Error(ErrorCode::InvalidConfig, "model name '" + r.model + "' is reserved or repeated");
    j[r.model] = to_json(r);
  }
  return j;
}

inline void write_scatter_csv(std::ostream& os, const EvalReport& report) {
  os << kScatterCsvHeader << '\n';
  auto old = os.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : report.predictions)
    os << p.condition_id << ',' << p.actual_mos << ',' << p.predicted_mos << ',' << p.repetition << '\n';
  os.precision(old);
}

/// Highest importance first; ties keep feature order.
inline std::vector<FeatureImportance> ranked(std::vector<FeatureImportance> importances) {
  std::stable_sort(importances.begin(), importances.end(),
                   [](const FeatureImportance& a, const FeatureImportance& b) { return a.importance > b.importance; });
  return importances;
}

inline void write_importance_csv(std::ostream& os, const std::vector<FeatureImportance>& importances) {
  os << kImportanceCsvHeader << '\n';
  auto old = os.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& fi : ranked(importances)) os << fi.feature << ',' << fi.importance << '\n';
  os.precision(old);
}

}  // namespace avqoe
