#pragma once

#include "exportcast/detail/text.hpp"
#include "exportcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace exportcast {

inline constexpr std::string_view kDefaultIndicator = "NE.EXP.GNFS.CD";

/// ISO-3166 alpha-3 style country code: exactly three characters A-Z.
class CountryCode {
 public:
  CountryCode() = default;

  explicit CountryCode(std::string_view code) : code_(code) {
    const bool ok = code.size() == 3 && std::all_of(code.begin(), code.end(), [](char c) {
                      return c >= 'A' && c <= 'Z';
                    });
    if (!ok) throw std::invalid_argument("invalid country code '" + std::string(code) + "'");
  }

  [[nodiscard]] const std::string& str() const { return code_; }

  friend auto operator<=>(const CountryCode&, const CountryCode&) = default;

 private:
  std::string code_;
};

/// Inclusive calendar-year range.
struct YearSpan {
  int first = 1970;
  int last = 2019;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(last - first + 1); }
  [[nodiscard]] bool contains(int year) const { return year >= first && year <= last; }

  friend bool operator==(const YearSpan&, const YearSpan&) = default;
};

/// Annual export values (current US$) for one country, oldest first.
struct AnnualSeries {
  CountryCode country;
  int start_year = 0;
  std::vector<double> values;

  friend bool operator==(const AnnualSeries&, const AnnualSeries&) = default;
};

/// Returns `s` unchanged if every value is finite and positive and the series
/// covers exactly `span`; throws exportcast::Error otherwise.
inline AnnualSeries validate_series(AnnualSeries s, const YearSpan& span) {
  const std::string who = s.country.str();
  if (s.values.size() != span.size()) {
    throw Error(who + ": expected " + std::to_string(span.size()) + " values, got " +
                std::to_string(s.values.size()));
  }
  if (s.start_year != span.first) {
    throw Error(who + ": series starts in " + std::to_string(s.start_year) + ", expected " +
                std::to_string(span.first));
  }
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double v = s.values[i];
    const std::string year = std::to_string(s.start_year + static_cast<int>(i));
    if (!std::isfinite(v)) throw Error(who + " " + year + ": non-finite export value");
    if (v <= 0.0) throw Error(who + " " + year + ": non-positive export value");
  }
  return s;
}

namespace detail {

struct CsvCell {
  std::size_t line;    // 1-based
  std::size_t column;  // 1-based
};

inline std::string position(const CsvCell& at) {
  return "line " + std::to_string(at.line) + ", column " + std::to_string(at.column);
}

inline double parse_cell(std::string_view text, const CsvCell& at) {
  const auto v = parse_double(text);
  if (!v) throw Error("unparseable numeric cell '" + std::string(text) + "' at " + position(at));
  return *v;
}

// Indexed lookup of year -> value for each country, shared by both layouts.
using YearTable = std::map<std::string, std::map<int, double>, std::less<>>;

inline std::vector<AnnualSeries> assemble(const YearTable& table,
                                          const std::vector<CountryCode>& countries,
                                          const YearSpan& span, std::string_view indicator) {
  std::vector<AnnualSeries> out;
  out.reserve(countries.size());
  for (const auto& c : countries) {
    const auto it = table.find(c.str());
    if (it == table.end()) {
      throw Error("country " + c.str() + " not found (indicator " + std::string(indicator) + ")");
    }
    AnnualSeries s{c, span.first, {}};
    s.values.reserve(span.size());
    for (int y = span.first; y <= span.last; ++y) {
      const auto v = it->second.find(y);
      if (v == it->second.end()) {
        throw Error("missing value for " + c.str() + " in " + std::to_string(y));
      }
      s.values.push_back(v->second);
    }
    out.push_back(validate_series(std::move(s), span));
  }
  return out;
}

inline std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                              std::string_view name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == name) return i;
  }
  return std::nullopt;
}

inline bool is_wanted(const std::vector<CountryCode>& countries, std::string_view code) {
  return std::any_of(countries.begin(), countries.end(),
                     [&](const CountryCode& c) { return c.str() == code; });
}

inline YearTable read_wide(const std::vector<std::string_view>& lines, std::size_t header_line,
                           const std::vector<CountryCode>& countries, const YearSpan& span,
                           std::string_view indicator) {
  const auto header = split_csv_record(lines[header_line]);
  const auto code_col = *find_column(header, "Country Code");
  const auto ind_col = *find_column(header, "Indicator Code");

  std::map<int, std::size_t> year_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (const auto y = parse_int(header[i]); y && span.contains(static_cast<int>(*y))) {
      year_cols.emplace(static_cast<int>(*y), i);
    }
  }

  YearTable table;
  for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto fields = split_csv_record(lines[li]);
    if (fields.size() <= std::max(code_col, ind_col)) continue;
    const auto code = trim(fields[code_col]);
    if (trim(fields[ind_col]) != indicator || !is_wanted(countries, code)) continue;

    auto& row = table[std::string(code)];
    for (const auto& [year, col] : year_cols) {
      if (col >= fields.size() || trim(fields[col]).empty()) continue;
      row[year] = parse_cell(fields[col], {li + 1, col + 1});
    }
  }
  return table;
}

inline YearTable read_long(const std::vector<std::string_view>& lines, std::size_t header_line,
                           const std::vector<CountryCode>& countries, const YearSpan& span,
                           std::string_view indicator) {
  const auto header = split_csv_record(lines[header_line]);
  const auto country_col = *find_column(header, "country");
  const auto year_col = *find_column(header, "year");
  const auto value_col = *find_column(header, "value");
  const auto ind_col = find_column(header, "indicator");
  const auto needed = std::max({country_col, year_col, value_col});

  YearTable table;
  for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto fields = split_csv_record(lines[li]);
    if (fields.size() <= needed) {
      throw Error("too few fields at line " + std::to_string(li + 1));
    }
    if (ind_col && *ind_col < fields.size() && trim(fields[*ind_col]) != indicator) continue;
    const auto code = trim(fields[country_col]);
    if (!is_wanted(countries, code)) continue;

    const auto year = parse_int(fields[year_col]);
    if (!year) {
      throw Error("unparseable year '" + fields[year_col] + "' at " +
                  position({li + 1, year_col + 1}));
    }
    if (!span.contains(static_cast<int>(*year))) continue;
    if (trim(fields[value_col]).empty()) continue;
    const double v = parse_cell(fields[value_col], {li + 1, value_col + 1});
    auto& row = table[std::string(code)];
    if (!row.emplace(static_cast<int>(*year), v).second) {
      throw Error("duplicate entry for " + std::string(code) + " in " + std::to_string(*year) +
                  " at line " + std::to_string(li + 1));
    }
  }
  return table;
}

}  // namespace detail

/// Parses export series from either the World Bank wide CSV layout (metadata
/// preamble, then "Country Name","Country Code","Indicator Name","Indicator
/// Code",<years...>) or a long layout with columns country,year,value and an
/// optional indicator column. Returns one validated series per requested
/// country, in the requested order.
inline std::vector<AnnualSeries> parse_worldbank_csv(std::string_view content,
                                                     std::string_view indicator,
                                                     const std::vector<CountryCode>& countries,
                                                     const YearSpan& span = {}) {
  if (span.last < span.first) throw std::invalid_argument("empty year span");
  const auto lines = detail::split_lines(content);

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    const auto header = detail::split_csv_record(lines[i]);
    if (detail::find_column(header, "Country Code") && detail::find_column(header, "Indicator Code")) {
      return detail::assemble(detail::read_wide(lines, i, countries, span, indicator), countries,
                              span, indicator);
    }
    if (detail::find_column(header, "country") && detail::find_column(header, "year") &&
        detail::find_column(header, "value")) {
      return detail::assemble(detail::read_long(lines, i, countries, span, indicator), countries,
                              span, indicator);
    }
  }
  throw Error("no recognizable header row (expected World Bank wide or country,year,value)");
}

/// Long-layout emission; parse_worldbank_csv reads it back exactly.
inline std::string emit_long_csv(const std::vector<AnnualSeries>& series) {
  std::string out = "country,year,value\n";
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      out += s.country.str();
      out += ',';
      out += std::to_string(s.start_year + static_cast<int>(i));
      out += ',';
      out += detail::format_exact(s.values[i]);
      out += '\n';
    }
  }
  return out;
}

}  // namespace exportcast
