#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "avqoe/error.hpp"

namespace avqoe {

namespace detail {

inline void check_paired(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::LengthMismatch,
                "series lengths differ (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  if (a.empty()) throw Error(ErrorCode::EmptyInput, "metric needs at least one pair");
}

}  // namespace detail

inline double rmse(std::span<const double> pred, std::span<const double> actual) {
  detail::check_paired(pred, actual);
  double ss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) ss += (pred[i] - actual[i]) * (pred[i] - actual[i]);
  return std::sqrt(ss / static_cast<double>(pred.size()));
}

/// Sample Pearson correlation. Throws ConstantSeries when either side has zero variance.
inline double pearson(std::span<const double> pred, std::span<const double> actual) {
  detail::check_paired(pred, actual);
  if (pred.size() < 2) throw Error(ErrorCode::EmptyInput, "pearson needs at least two pairs");
  const double n = static_cast<double>(pred.size());
  double mp = 0.0, ma = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mp += pred[i];
    ma += actual[i];
  }
  mp /= n;
  ma /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dp = pred[i] - mp, da = actual[i] - ma;
    sxy += dp * da;
    sxx += dp * dp;
    syy += da * da;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::ConstantSeries, "pearson undefined for a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Percentile with linear interpolation between order statistics (rank p * (n - 1)).
inline double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "percentile of an empty series");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidConfig, "percentile must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double rank = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

inline double abs_err_p95(std::span<const double> pred, std::span<const double> actual) {
  detail::check_paired(pred, actual);
  std::vector<double> err(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) err[i] = std::abs(pred[i] - actual[i]);
  return percentile(std::move(err), 0.95);
}

/// Share of predictions whose absolute error exceeds the condition's 95% CI half-width.
inline double outlier_ratio(std::span<const double> pred, std::span<const double> actual,
                            std::span<const double> ci_halfwidths) {
  detail::check_paired(pred, actual);
  if (ci_halfwidths.size() != pred.size())
    throw Error(ErrorCode::LengthMismatch, "CI half-widths do not align with predictions");
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (std::abs(pred[i] - actual[i]) > ci_halfwidths[i]) ++count;
  return static_cast<double>(count) / static_cast<double>(pred.size());
}

}  // namespace avqoe
