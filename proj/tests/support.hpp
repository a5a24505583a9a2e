#pragma once

// Test-only oracles and fixtures. Nothing here calls into the code path it is
// used to check.

#include "exportcast/exportcast.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace exportcast::testing {

// ---- metric oracles: plain loops written out from the definitions ----------

inline double oracle_mse(const std::vector<double>& p, const std::vector<double>& a) {
  long double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (long double)(p[i] - a[i]) * (p[i] - a[i]);
  return static_cast<double>(s / p.size());
}

inline double oracle_rmse(const std::vector<double>& p, const std::vector<double>& a) {
  return static_cast<double>(std::sqrt((long double)oracle_mse(p, a)));
}

inline double oracle_mape(const std::vector<double>& p, const std::vector<double>& a) {
  long double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs((long double)(p[i] - a[i]) / a[i]);
  return static_cast<double>(s * 100 / p.size());
}

inline double oracle_mae(const std::vector<double>& p, const std::vector<double>& a) {
  long double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs((long double)p[i] - a[i]);
  return static_cast<double>(s / p.size());
}

inline double rel_err(double got, double want) {
  if (got == want) return 0.0;
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// ---- gradient oracle: central differences of 0.5 (predict - target)^2 -----

inline Gradients finite_difference_gradients(Network net, const std::vector<double>& x, double target,
                                             double h) {
  Gradients g{zeros_like(net.layers)};
  auto loss = [&] {
    const double e = predict(net, x) - target;
    return 0.5 * e * e;
  };
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    auto probe = [&](std::vector<double>& params, std::vector<double>& out) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double keep = params[i];
        params[i] = keep + h;
        const double up = loss();
        params[i] = keep - h;
        const double down = loss();
        params[i] = keep;
        out[i] = (up - down) / (2 * h);
      }
    };
    probe(net.layers[k].weights, g.layers[k].weights);
    probe(net.layers[k].biases, g.layers[k].biases);
  }
  return g;
}

// ---- natural cubic spline by dense Gaussian elimination -------------------

inline std::vector<double> dense_spline_moments(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
  A[0][0] = 1;
  A[n - 1][n - 1] = 1;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    A[i][i - 1] = 1;
    A[i][i] = 4;
    A[i][i + 1] = 1;
    A[i][n] = 6 * (y[i + 1] - 2 * y[i] + y[i - 1]);
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k <= n; ++k) A[r][k] -= f * A[c][k];
    }
  }
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = A[i][n] / A[i][i];
  return m;
}

// ---- fixtures ---------------------------------------------------------------

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path = std::filesystem::temp_directory_path() / ("exportcast_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

// Export-like annual series: compound growth with deterministic wobble and a
// few downturns, starting from `base` US$.
inline std::vector<double> synthetic_exports(double base, std::uint64_t seed, std::size_t years = 50) {
  std::mt19937_64 rng(seed);
  std::vector<double> v;
  double level = base;
  for (std::size_t i = 0; i < years; ++i) {
    v.push_back(level);
    double growth = 0.07 + 0.04 * (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5);
    if (i == 38) growth = -0.12;  // 2008-like shock
    if (i == 11) growth = -0.04;
    level *= 1.0 + growth;
  }
  return v;
}

// World Bank wide layout with the usual four-line preamble.
inline std::string worldbank_wide_csv(const std::vector<std::pair<std::string, std::vector<double>>>& rows,
                                      int first_year, const std::string& indicator = "NE.EXP.GNFS.CD") {
  std::string s =
      "\"Data Source\",\"World Development Indicators\",\n\n\"Last Updated Date\",\"2024-01-01\",\n\n"
      "\"Country Name\",\"Country Code\",\"Indicator Name\",\"Indicator Code\",";
  const int last_year = first_year + static_cast<int>(rows.front().second.size()) - 1;
  for (int y = first_year; y <= last_year; ++y) s += "\"" + std::to_string(y) + "\",";
  s += "\n";
  for (const auto& [code, values] : rows) {
    s += "\"Name, of " + code + "\",\"" + code + "\",\"Exports of goods and services (current US$)\",\"" +
         indicator + "\",";
    for (double v : values) s += "\"" + detail::format_exact(v) + "\",";
    s += "\n";
  }
  return s;
}

}  // namespace exportcast::testing

namespace exportcast::testing {

// Writes a 1970-2019 World Bank style file for the default countries plus a
// config pointing at it; returns the config path.
inline std::filesystem::path write_pipeline_fixture(const std::filesystem::path& dir,
                                                    const std::string& extra_json = "") {
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  std::uint64_t seed = 100;
  double base = 4e10;
  for (const auto& c : kDefaultCountries) {
    rows.emplace_back(c, synthetic_exports(base, seed++));
    base *= 0.7;
  }
  write_file_atomic(dir / "wb.csv", worldbank_wide_csv(rows, 1970));
  const auto cfg = dir / "run.json";
  write_file_atomic(cfg, "{\"data_path\": \"wb.csv\", \"output_dir\": \"out\"" + extra_json + "}\n");
  return cfg;
}

}  // namespace exportcast::testing
