#pragma once

#include "exportcast/error.hpp"
#include "exportcast/metrics.hpp"
#include "exportcast/mlp.hpp"
#include "exportcast/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace exportcast {

/// Y = slope * X + intercept, with Pearson r between X and Y.
struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
};

/// Ordinary least squares of actuals (Y) on predictions (X).
inline RegressionFit fit_regression(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw std::invalid_argument("fit_regression: length mismatch");
  if (predicted.size() < 2) throw std::invalid_argument("fit_regression: need >= 2 points");

  const double n = static_cast<double>(predicted.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    mx += predicted[i];
    my += actual[i];
  }
  mx /= n;
  my /= n;

  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double dx = predicted[i] - mx;
    const double dy = actual[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_regression: predictions are constant");

  RegressionFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r = syy > 0.0 ? std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0) : 0.0;
  return fit;
}

/// Scores normalized predictions: MSE, RMSE and MAE on the normalized scale,
/// MAPE on the denormalized scale (normalized actuals reach 0 at the minimum).
inline MetricsReport score(std::span<const double> predicted, std::span<const double> actual,
                           const NormParams& norm) {
  const double m = mse(predicted, actual);
  const auto raw_pred = denormalize(predicted, norm);
  const auto raw_true = denormalize(actual, norm);
  return {m, std::sqrt(m), mape(raw_pred, raw_true), mae(predicted, actual), predicted.size()};
}

/// fold_of[i] is the fold holding sample i. Folds are contiguous in time; the
/// first (n mod k) folds hold one extra sample.
struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;

  [[nodiscard]] std::vector<std::size_t> members(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] == fold) out.push_back(i);
    }
    return out;
  }
};

inline FoldPlan make_fold_plan(std::size_t n, std::size_t k) {
  if (k < 2 || k > n) {
    throw std::invalid_argument("k-fold: need 2 <= k <= sample count (k=" + std::to_string(k) +
                                ", n=" + std::to_string(n) + ")");
  }
  FoldPlan plan{k, std::vector<std::size_t>(n)};
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t i = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t s = 0; s < size; ++s) plan.fold_of[i++] = f;
  }
  return plan;
}

struct FoldResult {
  MetricsReport metrics;
  RegressionFit fit;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
};

struct KFoldReport {
  std::vector<FoldResult> folds;
  MetricsReport mean_metrics;
  RegressionFit mean_fit;  // unweighted means over folds with >= 2 samples
};

/// Trains a fresh network per fold on the other folds and scores it on the
/// held-out fold. Fold f uses seed cfg.seed + f. MAPE is taken on values
/// denormalized with `norm`.
inline KFoldReport kfold_evaluate(std::span<const Sample> samples, std::size_t k,
                                  const NetworkConfig& cfg, const NormParams& norm) {
  const auto plan = make_fold_plan(samples.size(), k);
  KFoldReport report;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<Sample> train_set, test_set;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      (plan.fold_of[i] == f ? test_set : train_set).push_back(samples[i]);
    }

    NetworkConfig fold_cfg = cfg;
    fold_cfg.seed = cfg.seed + f;
    auto [net, state] = init_network(fold_cfg);
    train(net, state, train_set, {}, fold_cfg);

    const auto predicted = predict_all(net, test_set);
    const auto actual = targets_of(test_set);
    FoldResult r;
    r.metrics = score(predicted, actual, norm);
    r.train_count = train_set.size();
    r.test_count = test_set.size();
    if (test_set.size() >= 2) {
      // A constant-prediction fold has no defined regression; r stays 0.
      try {
        r.fit = fit_regression(predicted, actual);
      } catch (const std::invalid_argument&) {
        r.fit = {};
      }
    } else {
      r.fit = {std::nan(""), std::nan(""), std::nan("")};
    }
    report.folds.push_back(r);
  }

  const double kk = static_cast<double>(k);
  std::size_t fitted = 0;
  for (const auto& f : report.folds) {
    report.mean_metrics.mse += f.metrics.mse / kk;
    report.mean_metrics.rmse += f.metrics.rmse / kk;
    report.mean_metrics.mape += f.metrics.mape / kk;
    report.mean_metrics.mae += f.metrics.mae / kk;
    report.mean_metrics.count += f.metrics.count;
    if (std::isfinite(f.fit.r)) {
      report.mean_fit.slope += f.fit.slope;
      report.mean_fit.intercept += f.fit.intercept;
      report.mean_fit.r += f.fit.r;
      ++fitted;
    }
  }
  // Single-sample folds (leave-one-out) carry no regression.
  if (fitted == 0) {
    report.mean_fit = {std::nan(""), std::nan(""), std::nan("")};
  } else {
    const double m = static_cast<double>(fitted);
    report.mean_fit = {report.mean_fit.slope / m, report.mean_fit.intercept / m, report.mean_fit.r / m};
  }
  return report;
}

}  // namespace exportcast
