#pragma once

#include "exportcast/detail/text.hpp"
#include "exportcast/error.hpp"
#include "exportcast/ingest.hpp"

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace exportcast {

struct QuarterStamp {
  int year = 0;
  int quarter = 1;  // 1..4

  QuarterStamp() = default;
  QuarterStamp(int y, int q) : year(y), quarter(q) {
    if (q < 1 || q > 4) throw std::invalid_argument("quarter must be in 1..4");
  }

  /// Stamp `n` quarters later (n may be negative).
  [[nodiscard]] QuarterStamp advanced(long n) const {
    const long index = static_cast<long>(year) * 4 + (quarter - 1) + n;
    const long y = index >= 0 ? index / 4 : (index - 3) / 4;
    return {static_cast<int>(y), static_cast<int>(index - y * 4) + 1};
  }

  friend auto operator<=>(const QuarterStamp&, const QuarterStamp&) = default;
};

struct QuarterlySeries {
  CountryCode country;
  QuarterStamp start;
  std::vector<double> values;

  [[nodiscard]] QuarterStamp last_stamp() const {
    return start.advanced(static_cast<long>(values.size()) - 1);
  }

  friend bool operator==(const QuarterlySeries&, const QuarterlySeries&) = default;
};

enum class Disaggregation { flat, linear, cubic };

inline Disaggregation parse_disaggregation(std::string_view name) {
  if (name == "flat") return Disaggregation::flat;
  if (name == "linear") return Disaggregation::linear;
  if (name == "cubic") return Disaggregation::cubic;
  throw std::invalid_argument("unknown disaggregation method '" + std::string(name) +
                              "' (expected flat, linear or cubic)");
}

inline std::string_view to_string(Disaggregation m) {
  switch (m) {
    case Disaggregation::flat: return "flat";
    case Disaggregation::linear: return "linear";
    case Disaggregation::cubic: return "cubic";
  }
  return "?";
}

namespace detail {

inline constexpr std::array<double, 4> kQuarterOffsets{0.0, 0.25, 0.5, 0.75};

// Second derivatives of the natural cubic spline through (i, y[i]), unit knot
// spacing. Thomas algorithm on M[i-1] + 4 M[i] + M[i+1] = 6 (y[i+1] - 2 y[i] + y[i-1]).
inline std::vector<double> natural_spline_moments(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;

  const std::size_t k = n - 2;  // interior knots
  std::vector<double> c(k), d(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double rhs = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]);
    if (i == 0) {
      c[i] = 1.0 / 4.0;
      d[i] = rhs / 4.0;
    } else {
      const double denom = 4.0 - c[i - 1];
      c[i] = 1.0 / denom;
      d[i] = (rhs - d[i - 1]) / denom;
    }
  }
  m[k] = d[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) m[i + 1] = d[i] - c[i] * m[i + 2];
  return m;
}

}  // namespace detail

/// Expands an annual series to four quarterly points per year on the annual
/// level scale. Quarter offsets 0, 1/4, 1/2, 3/4 within each year; the final
/// year is held flat for the interpolating methods.
inline QuarterlySeries to_quarterly(const AnnualSeries& s,
                                    Disaggregation method = Disaggregation::linear) {
  const auto& y = s.values;
  if (y.empty()) throw Error(s.country.str() + ": cannot disaggregate an empty series");

  QuarterlySeries q{s.country, QuarterStamp(s.start_year, 1), {}};
  q.values.reserve(4 * y.size());
  const std::size_t n = y.size();

  switch (method) {
    case Disaggregation::flat:
      for (double v : y) q.values.insert(q.values.end(), 4, v);
      break;

    case Disaggregation::linear:
      for (std::size_t i = 0; i < n; ++i) {
        const double next = i + 1 < n ? y[i + 1] : y[i];
        for (double t : detail::kQuarterOffsets) q.values.push_back(y[i] + t * (next - y[i]));
      }
      break;

    case Disaggregation::cubic: {
      const auto m = detail::natural_spline_moments(y);
      for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 == n) {
          q.values.insert(q.values.end(), 4, y[i]);
          break;
        }
        for (double t : detail::kQuarterOffsets) {
          const double u = 1.0 - t;
          q.values.push_back(u * y[i] + t * y[i + 1] + (u * u * u - u) * m[i] / 6.0 +
                             (t * t * t - t) * m[i + 1] / 6.0);
        }
      }
      break;
    }
  }

  for (std::size_t i = 0; i < q.values.size(); ++i) {
    const double v = q.values[i];
    if (!std::isfinite(v) || v <= 0.0) {
      const auto at = q.start.advanced(static_cast<long>(i));
      throw Error(s.country.str() + ": " + std::string(to_string(method)) +
                  " disaggregation produced a non-positive value at " + std::to_string(at.year) +
                  " q" + std::to_string(at.quarter));
    }
  }
  return q;
}

/// Intermediate long layout: country,year,quarter,value.
inline std::string emit_quarterly_csv(const std::vector<QuarterlySeries>& series) {
  std::string out = "country,year,quarter,value\n";
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      const auto at = s.start.advanced(static_cast<long>(i));
      out += s.country.str() + ',' + std::to_string(at.year) + ',' + std::to_string(at.quarter) +
             ',' + detail::format_exact(s.values[i]) + '\n';
    }
  }
  return out;
}

/// Reads emit_quarterly_csv output. Series come back in first-seen order and
/// must be consecutive quarters.
inline std::vector<QuarterlySeries> parse_quarterly_csv(std::string_view content) {
  const auto lines = detail::split_lines(content);
  if (lines.empty() || detail::split_csv_record(lines[0]) !=
                           std::vector<std::string>{"country", "year", "quarter", "value"}) {
    throw Error("quarterly file: expected header country,year,quarter,value");
  }

  std::vector<QuarterlySeries> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (detail::trim(lines[li]).empty()) continue;
    const auto f = detail::split_csv_record(lines[li]);
    const auto where = " at line " + std::to_string(li + 1);
    if (f.size() != 4) throw Error("quarterly file: expected 4 fields" + where);
    const auto year = detail::parse_int(f[1]);
    const auto quarter = detail::parse_int(f[2]);
    const auto value = detail::parse_double(f[3]);
    if (!year || !quarter || !value || *quarter < 1 || *quarter > 4) {
      throw Error("quarterly file: malformed row" + where);
    }
    const QuarterStamp at(static_cast<int>(*year), static_cast<int>(*quarter));

    auto [it, fresh] = index.emplace(f[0], out.size());
    if (fresh) {
      out.push_back({CountryCode(f[0]), at, {}});
    } else if (out[it->second].last_stamp().advanced(1) != at) {
      throw Error("quarterly file: non-consecutive quarter for " + f[0] + where);
    }
    out[it->second].values.push_back(*value);
  }
  return out;
}

}  // namespace exportcast
