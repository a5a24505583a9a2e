#pragma once

#include "exportcast/error.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace exportcast {

namespace detail {

inline void check_pair(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) {
    throw std::invalid_argument("metric: predicted and actual lengths differ");
  }
  if (predicted.empty()) throw std::invalid_argument("metric: empty input");
}

}  // namespace detail

// Error criteria over predictions P and actuals A, T = |P| = |A|.

/// (1/T) sum (P - A)^2
inline double mse(std::span<const double> predicted, std::span<const double> actual) {
  detail::check_pair(predicted, actual);
  double sum = 0.0;
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    const double e = predicted[t] - actual[t];
    sum += e * e;
  }
  return sum / static_cast<double>(predicted.size());
}

inline double rmse(std::span<const double> predicted, std::span<const double> actual) {
  return std::sqrt(mse(predicted, actual));
}

/// (1/T) sum |(P - A) / A| * 100, undefined when any actual is zero.
inline double mape(std::span<const double> predicted, std::span<const double> actual) {
  detail::check_pair(predicted, actual);
  double sum = 0.0;
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    if (actual[t] == 0.0) throw std::domain_error("MAPE undefined at zero actual");
    sum += std::abs((predicted[t] - actual[t]) / actual[t]);
  }
  return sum / static_cast<double>(predicted.size()) * 100.0;
}

/// (1/T) sum |P - A|
inline double mae(std::span<const double> predicted, std::span<const double> actual) {
  detail::check_pair(predicted, actual);
  double sum = 0.0;
  for (std::size_t t = 0; t < predicted.size(); ++t) sum += std::abs(predicted[t] - actual[t]);
  return sum / static_cast<double>(predicted.size());
}

struct MetricsReport {
  double mse = 0.0;
  double rmse = 0.0;
  double mape = 0.0;  // percent
  double mae = 0.0;
  std::size_t count = 0;
};

/// All four criteria over the same vectors.
inline MetricsReport compute_metrics(std::span<const double> predicted, std::span<const double> actual) {
  const double m = mse(predicted, actual);
  return {m, std::sqrt(m), mape(predicted, actual), mae(predicted, actual), predicted.size()};
}

}  // namespace exportcast
