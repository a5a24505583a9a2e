#pragma once

#include "exportcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace exportcast {

/// Min-max scaling parameters: x_norm = (x - x_min) / (x_max - x_min).
struct NormParams {
  double x_min = 0.0;
  double x_max = 1.0;

  [[nodiscard]] double range() const { return x_max - x_min; }
  [[nodiscard]] double normalize(double x) const { return (x - x_min) / range(); }
  [[nodiscard]] double denormalize(double v) const { return x_min + v * range(); }

  friend bool operator==(const NormParams&, const NormParams&) = default;
};

inline void check(const NormParams& p) {
  if (!std::isfinite(p.x_min) || !std::isfinite(p.x_max) || !(p.x_max > p.x_min)) {
    throw std::invalid_argument("invalid normalization parameters (need finite x_max > x_min)");
  }
}

inline NormParams fit_norm(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("fit_norm: need >= 2 values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  NormParams p{*lo, *hi};
  if (!(p.x_max > p.x_min)) throw std::invalid_argument("fit_norm: degenerate range (all values equal)");
  check(p);
  return p;
}

/// Values outside [x_min, x_max] map outside [0, 1]; nothing is clamped.
inline std::vector<double> normalize(std::span<const double> values, const NormParams& p) {
  check(p);
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [&](double x) { return p.normalize(x); });
  return out;
}

inline std::vector<double> denormalize(std::span<const double> values, const NormParams& p) {
  check(p);
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(),
                 [&](double v) { return p.denormalize(v); });
  return out;
}

/// Which part of the series the normalization range is fitted on.
enum class NormFit { full, train_only };

inline NormFit parse_norm_fit(std::string_view s) {
  if (s == "full") return NormFit::full;
  if (s == "train_only") return NormFit::train_only;
  throw std::invalid_argument("unknown norm_fit '" + std::string(s) + "' (expected full or train_only)");
}

inline std::string_view to_string(NormFit f) { return f == NormFit::full ? "full" : "train_only"; }

/// One supervised example: w lagged values (oldest first) and the next value.
struct Sample {
  std::vector<double> lags;
  double target = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Time-ordered samples; the first `split_index` are the training set.
struct Dataset {
  std::vector<Sample> samples;
  std::size_t split_index = 0;

  [[nodiscard]] std::span<const Sample> train() const {
    return std::span(samples).first(split_index);
  }
  [[nodiscard]] std::span<const Sample> test() const {
    return std::span(samples).subspan(split_index);
  }
};

/// Sample i has lags = values[i, i+w) and target = values[i+w].
inline std::vector<Sample> make_windows(std::span<const double> series, std::size_t window) {
  if (window == 0) throw std::invalid_argument("make_windows: window must be >= 1");
  if (series.size() <= window) {
    throw std::invalid_argument("make_windows: series length " + std::to_string(series.size()) +
                                " must exceed window " + std::to_string(window));
  }
  std::vector<Sample> out;
  out.reserve(series.size() - window);
  for (std::size_t i = 0; i + window < series.size(); ++i) {
    out.push_back({{series.begin() + static_cast<std::ptrdiff_t>(i),
                    series.begin() + static_cast<std::ptrdiff_t>(i + window)},
                   series[i + window]});
  }
  return out;
}

inline std::size_t split_point(std::size_t count, double train_frac) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw std::invalid_argument("train_frac must lie strictly between 0 and 1");
  }
  const auto split = static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(count)));
  if (split == 0 || split >= count) {
    throw std::invalid_argument("chrono_split: " + std::to_string(count) +
                                " samples leave an empty train or test set at fraction " +
                                std::to_string(train_frac));
  }
  return split;
}

/// Earliest floor(train_frac * n) samples train, the rest test. No shuffling.
inline Dataset chrono_split(std::vector<Sample> samples, double train_frac) {
  const auto split = split_point(samples.size(), train_frac);
  return {std::move(samples), split};
}

}  // namespace exportcast
