#pragma once

#include "exportcast/detail/text.hpp"
#include "exportcast/disaggregate.hpp"
#include "exportcast/error.hpp"
#include "exportcast/ingest.hpp"
#include "exportcast/mlp.hpp"
#include "exportcast/preprocess.hpp"

#include <cmath>
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace exportcast {

/// Iterated one-step forecasting. Each prediction is appended to the
/// (normalized) window and the oldest value dropped; results are returned
/// denormalized.
inline std::vector<double> recursive_forecast(const Network& net, std::span<const double> last_window,
                                              std::size_t horizon, const NormParams& norm) {
  if (horizon == 0) throw std::invalid_argument("recursive_forecast: horizon must be >= 1");
  if (last_window.size() != net.input_size()) {
    throw std::invalid_argument("recursive_forecast: window length " +
                                std::to_string(last_window.size()) + " does not match network input " +
                                std::to_string(net.input_size()));
  }
  check(norm);

  std::vector<double> window(last_window.begin(), last_window.end());
  std::vector<double> out;
  out.reserve(horizon);
  for (std::size_t step = 1; step <= horizon; ++step) {
    const double y = predict(net, window);
    if (!std::isfinite(y)) throw Error("forecast diverged at step " + std::to_string(step));
    out.push_back(norm.denormalize(y));
    window.erase(window.begin());
    window.push_back(y);
  }
  return out;
}

/// Forecast levels (current US$) for several countries over the same
/// consecutive quarters. values[c][h] belongs to countries[c] at start + h.
struct ForecastTable {
  std::vector<CountryCode> countries;
  QuarterStamp start;
  std::size_t horizon = 0;
  std::vector<std::vector<double>> values;
};

inline void validate(const ForecastTable& t) {
  if (t.values.size() != t.countries.size()) throw Error("forecast table: country/column count mismatch");
  for (std::size_t c = 0; c < t.countries.size(); ++c) {
    if (t.values[c].size() != t.horizon) {
      throw Error("forecast table: " + t.countries[c].str() + " has " +
                  std::to_string(t.values[c].size()) + " values, expected " + std::to_string(t.horizon));
    }
    for (std::size_t h = 0; h < t.horizon; ++h) {
      const double v = t.values[c][h];
      if (!std::isfinite(v) || v <= 0.0) {
        const auto at = t.start.advanced(static_cast<long>(h));
        throw Error("forecast table: non-positive forecast for " + t.countries[c].str() + " at " +
                    std::to_string(at.year) + " q" + std::to_string(at.quarter));
      }
    }
  }
}

/// year,quarter,<codes...> with one row per quarter; values as %.6E.
inline std::string emit_forecast_csv(const ForecastTable& t) {
  validate(t);
  std::string out = "year,quarter";
  for (const auto& c : t.countries) out += ',' + c.str();
  out += '\n';
  for (std::size_t h = 0; h < t.horizon; ++h) {
    const auto at = t.start.advanced(static_cast<long>(h));
    out += std::to_string(at.year) + ',' + std::to_string(at.quarter);
    for (std::size_t c = 0; c < t.countries.size(); ++c) {
      out += ',' + detail::format_scientific(t.values[c][h], 6);
    }
    out += '\n';
  }
  return out;
}

inline ForecastTable parse_forecast_csv(std::string_view content) {
  const auto lines = detail::split_lines(content);
  if (lines.empty()) throw Error("forecast file: empty");
  const auto header = detail::split_csv_record(lines[0]);
  if (header.size() < 2 || header[0] != "year" || header[1] != "quarter") {
    throw Error("forecast file: expected header year,quarter,<countries>");
  }
  ForecastTable t;
  for (std::size_t i = 2; i < header.size(); ++i) t.countries.emplace_back(header[i]);
  t.values.resize(t.countries.size());

  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (detail::trim(lines[li]).empty()) continue;
    const auto f = detail::split_csv_record(lines[li]);
    const auto where = " at line " + std::to_string(li + 1);
    if (f.size() != header.size()) throw Error("forecast file: wrong field count" + where);
    const auto y = detail::parse_int(f[0]);
    const auto q = detail::parse_int(f[1]);
    if (!y || !q || *q < 1 || *q > 4) throw Error("forecast file: bad year/quarter" + where);
    const QuarterStamp at(static_cast<int>(*y), static_cast<int>(*q));
    if (t.horizon == 0) {
      t.start = at;
    } else if (t.start.advanced(static_cast<long>(t.horizon)) != at) {
      throw Error("forecast file: non-consecutive quarter" + where);
    }
    for (std::size_t c = 0; c < t.countries.size(); ++c) {
      const auto v = detail::parse_double(f[c + 2]);
      if (!v) throw Error("forecast file: unparseable value" + where);
      t.values[c].push_back(*v);
    }
    ++t.horizon;
  }
  return t;
}

}  // namespace exportcast
