#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include "avqoe/dataset.hpp"
#include "avqoe/forest.hpp"
#include "avqoe/metrics.hpp"
#include "avqoe/mlp.hpp"
#include "avqoe/random.hpp"

namespace avqoe {

struct CvConfig {
  std::size_t k = 10;
  std::size_t repetitions = 10;
  std::uint64_t seed = 0;
  bool stratify = false;  // stratify by target quintile

  void validate(std::size_t n) const {
    if (k < 2) throw Error(ErrorCode::InvalidConfig, "k must be >= 2");
    if (repetitions < 1) throw Error(ErrorCode::InvalidConfig, "repetitions must be >= 1");
    if (n < k)
      throw Error(ErrorCode::TooFewRows, std::to_string(n) + " rows cannot fill " + std::to_string(k) + " folds");
  }
};

using ModelConfig = std::variant<ForestConfig, MlpConfig>;

struct ModelSpec {
  std::string name;
  ModelConfig config;
};

inline std::string_view model_kind(const ModelConfig& c) {
  return std::holds_alternative<ForestConfig>(c) ? "forest" : "mlp";
}

struct FoldMetrics {
  std::size_t fold = 0;
  std::size_t n_test = 0;
  double rmse = 0.0;
};

struct RepetitionMetrics {
  std::size_t repetition = 0;
  double rmse = 0.0;
  double pearson = 0.0;
  double abs_err_p95 = 0.0;
  std::optional<double> outlier_ratio;
  std::vector<FoldMetrics> folds;
  std::vector<std::size_t> fold_of_row;
};

struct PredictionRecord {
  std::string condition_id;
  double actual_mos = 0.0;
  double predicted_mos = 0.0;
  std::size_t repetition = 0;
};

struct EvalReport {
  std::string model;
  std::string kind;
  double rmse = 0.0;
  double pearson = 0.0;
  double abs_err_p95 = 0.0;
  std::optional<double> outlier_ratio;
  std::vector<RepetitionMetrics> repetitions;
  std::vector<PredictionRecord> predictions;
  std::vector<FeatureImportance> importances;  // forest only
};

struct ComparisonTable {
  CvConfig cv;
  std::vector<EvalReport> reports;
  std::vector<std::size_t> ranking;  // report indices, lowest RMSE first
};

/// Fold index for each of n rows. Rows are shuffled with `seed`, optionally grouped by
/// target quintile, then dealt round-robin, so fold sizes differ by at most one.
inline std::vector<std::size_t> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed,
                                             std::span<const double> targets = {}, bool stratify = false) {
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  if (stratify) {
    if (targets.size() != n) throw Error(ErrorCode::LengthMismatch, "stratification needs one target per row");
    std::vector<std::size_t> by_target(n);
    std::iota(by_target.begin(), by_target.end(), std::size_t{0});
    std::stable_sort(by_target.begin(), by_target.end(),
                     [&](std::size_t a, std::size_t b) { return targets[a] < targets[b]; });
    std::vector<std::size_t> bin(n);
    for (std::size_t rank = 0; rank < n; ++rank) bin[by_target[rank]] = rank * 5 / n;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return bin[a] < bin[b]; });
  }

  std::vector<std::size_t> fold_of(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold_of[order[pos]] = pos % k;
  return fold_of;
}

namespace detail {

struct FoldOutcome {
  std::vector<double> predictions;
  std::vector<FeatureImportance> importances;
};

inline FoldOutcome fit_and_predict(const ModelConfig& config, const Matrix& x_train, std::span<const double> y_train,
                                   const Matrix& x_test, const std::vector<std::string>& names, std::uint64_t seed) {
  return std::visit(
      [&](auto cfg) -> FoldOutcome {
        cfg.seed = seed;
        if constexpr (std::is_same_v<decltype(cfg), ForestConfig>) {
          auto model = train_forest(x_train, y_train, names, cfg);
          return {model.predict(x_test), model.feature_importance()};
        } else {
          auto model = train_mlp(x_train, y_train, names, cfg);
          return {model.predict(x_test), {}};
        }
      },
      config);
}

inline EvalReport evaluate_on_folds(const Dataset& dataset, const ModelSpec& spec, const CvConfig& cv,
                                    const std::vector<std::vector<std::size_t>>& fold_plans) {
  const std::size_t n = dataset.size();
  const Matrix x = dataset.features();
  const std::vector<double> y = dataset.targets();
  const auto ci = dataset.ci95_halfwidths();
  const std::uint64_t base_seed = std::visit([](const auto& c) { return c.seed; }, spec.config);

  EvalReport report;
  report.model = spec.name;
  report.kind = std::string(model_kind(spec.config));
  std::vector<double> importance_sum(dataset.dimension(), 0.0);
  std::size_t importance_count = 0;

  for (std::size_t r = 0; r < fold_plans.size(); ++r) {
    const auto& fold_of = fold_plans[r];
    RepetitionMetrics rep;
    rep.repetition = r;
    rep.fold_of_row = fold_of;
    std::vector<double> pred(n, 0.0);

    for (std::size_t f = 0; f < cv.k; ++f) {
      std::vector<std::size_t> train_idx, test_idx;
      for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? test_idx : train_idx).push_back(i);
      std::vector<double> y_train, y_test;
      for (auto i : train_idx) y_train.push_back(y[i]);
      for (auto i : test_idx) y_test.push_back(y[i]);

      auto outcome = fit_and_predict(spec.config, x.select_rows(train_idx), y_train, x.select_rows(test_idx),
                                     dataset.feature_names(), derive_seed(base_seed, r * cv.k + f));
      for (std::size_t t = 0; t < test_idx.size(); ++t) pred[test_idx[t]] = outcome.predictions[t];
      rep.folds.push_back({f, test_idx.size(), rmse(outcome.predictions, y_test)});

      if (!outcome.importances.empty()) {
        for (std::size_t d = 0; d < importance_sum.size(); ++d) importance_sum[d] += outcome.importances[d].importance;
        ++importance_count;
      }
    }

    rep.rmse = rmse(pred, y);
    rep.pearson = pearson(pred, y);
    rep.abs_err_p95 = abs_err_p95(pred, y);
    if (ci) rep.outlier_ratio = outlier_ratio(pred, y, *ci);
    for (std::size_t i = 0; i < n; ++i) report.predictions.push_back({dataset.rows()[i].condition_id, y[i], pred[i], r});
    report.repetitions.push_back(std::move(rep));
  }

  const double reps = static_cast<double>(report.repetitions.size());
  double outlier_total = 0.0;
  for (const auto& rep : report.repetitions) {
    report.rmse += rep.rmse;
    report.pearson += rep.pearson;
    report.abs_err_p95 += rep.abs_err_p95;
    if (rep.outlier_ratio) outlier_total += *rep.outlier_ratio;
  }
  report.rmse /= reps;
  report.pearson /= reps;
  report.abs_err_p95 /= reps;
  if (ci) report.outlier_ratio = outlier_total / reps;

  if (importance_count > 0) {
    double total = 0.0;
    for (double v : importance_sum) total += v;
    for (std::size_t d = 0; d < importance_sum.size(); ++d)
      report.importances.push_back({dataset.feature_names()[d], total > 0.0 ? importance_sum[d] / total : 0.0});
  }
  return report;
}

inline std::vector<std::vector<std::size_t>> plan_folds(const Dataset& dataset, const CvConfig& cv) {
  cv.validate(dataset.size());
  const auto y = dataset.targets();
  std::vector<std::vector<std::size_t>> plans;
  plans.reserve(cv.repetitions);
  for (std::size_t r = 0; r < cv.repetitions; ++r)
    plans.push_back(assign_folds(dataset.size(), cv.k, derive_seed(cv.seed, r), y, cv.stratify));
  return plans;
}

}  // namespace detail

/// Repeated shuffled k-fold evaluation. Metrics are computed per repetition on the pooled
/// hold-out predictions, then averaged over repetitions.
inline EvalReport cross_validate(const Dataset& dataset, const ModelSpec& spec, const CvConfig& cv) {
  return detail::evaluate_on_folds(dataset, spec, cv, detail::plan_folds(dataset, cv));
}

/// Evaluates every spec on the same fold assignments and ranks them by RMSE.
inline ComparisonTable compare_models(const Dataset& dataset, const std::vector<ModelSpec>& specs,
                                      const CvConfig& cv) {
  if (specs.empty()) throw Error(ErrorCode::InvalidConfig, "compare_models needs at least one model");
  const auto plans = detail::plan_folds(dataset, cv);
  ComparisonTable table;
  table.cv = cv;
  for (const auto& spec : specs) table.reports.push_back(detail::evaluate_on_folds(dataset, spec, cv, plans));
  table.ranking.resize(table.reports.size());
  std::iota(table.ranking.begin(), table.ranking.end(), std::size_t{0});
  std::stable_sort(table.ranking.begin(), table.ranking.end(),
                   [&](std::size_t a, std::size_t b) { return table.reports[a].rmse < table.reports[b].rmse; });
  return table;
}

}  // namespace avqoe
