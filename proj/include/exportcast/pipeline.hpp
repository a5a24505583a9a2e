#pragma once

#include "exportcast/config.hpp"
#include "exportcast/detail/text.hpp"
#include "exportcast/disaggregate.hpp"
#include "exportcast/error.hpp"
#include "exportcast/evaluate.hpp"
#include "exportcast/forecast.hpp"
#include "exportcast/ingest.hpp"
#include "exportcast/io.hpp"
#include "exportcast/mlp.hpp"
#include "exportcast/persist.hpp"
#include "exportcast/plot.hpp"
#include "exportcast/preprocess.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace exportcast {

/// Quarters run through the recursion but dropped between the last
/// observation and the first reported forecast (data end Q4 of year Y,
/// reporting starts Q1 of Y + 2).
inline constexpr std::size_t kBridgeQuarters = 4;

/// Output layout below RunConfig::output_dir.
struct OutputPaths {
  std::filesystem::path root;

  [[nodiscard]] std::filesystem::path quarterly() const { return root / "quarterly.csv"; }
  [[nodiscard]] std::filesystem::path model(const CountryCode& c) const {
    return root / "models" / (c.str() + ".model");
  }
  [[nodiscard]] std::filesystem::path report(const CountryCode& c) const {
    return root / "reports" / (c.str() + ".json");
  }
  [[nodiscard]] std::filesystem::path metrics() const { return root / "metrics.csv"; }
  [[nodiscard]] std::filesystem::path regression() const { return root / "regression.csv"; }
  [[nodiscard]] std::filesystem::path forecast() const { return root / "forecast.csv"; }
  [[nodiscard]] std::filesystem::path plots() const { return root / "plots"; }
};

/// A country's series after normalization, windowing and the chronological split.
struct PreparedSeries {
  QuarterlySeries raw;
  NormParams norm;
  std::vector<double> normalized;
  Dataset dataset;
};

inline PreparedSeries prepare(const QuarterlySeries& q, const RunConfig& cfg) {
  PreparedSeries p;
  p.raw = q;
  if (q.values.size() <= cfg.window) {
    throw Error(q.country.str() + ": " + std::to_string(q.values.size()) +
                " quarterly points do not cover window " + std::to_string(cfg.window));
  }
  const std::size_t samples = q.values.size() - cfg.window;
  const std::size_t split = split_point(samples, cfg.train_frac);
  if (cfg.norm_fit == NormFit::full) {
    p.norm = fit_norm(q.values);
  } else {
    // Training targets end at index split - 1 + window.
    p.norm = fit_norm(std::span(q.values).first(split + cfg.window));
  }
  p.normalized = normalize(q.values, p.norm);
  p.dataset = {make_windows(p.normalized, cfg.window), split};
  return p;
}

namespace detail {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. If any call throws, the
// exception from the lowest index is rethrown after all workers finish.
inline void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Prefixes an error with the country it concerns, keeping IoError distinct.
template <typename Fn>
auto with_country(const CountryCode& c, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const IoError& e) {
    throw IoError(c.str() + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(c.str() + ": " + e.what());
  }
}

inline std::string metrics_row(const std::string& country, const std::string& split,
                               const MetricsReport& m) {
  return country + ',' + split + ',' + format_exact(m.mse) + ',' + format_exact(m.rmse) + ',' +
         format_exact(m.mape) + ',' + format_exact(m.mae) + '\n';
}

inline std::string fit_row(const std::string& country, const std::string& split, const RegressionFit& f) {
  return country + ',' + split + ',' + format_exact(f.slope) + ',' + format_exact(f.intercept) + ',' +
         format_exact(f.r) + '\n';
}

}  // namespace detail

inline std::vector<QuarterlySeries> load_quarterly(const RunConfig& cfg, const OutputPaths& out) {
  const auto all = parse_quarterly_csv(read_file(out.quarterly()));
  std::vector<QuarterlySeries> picked;
  for (const auto& c : cfg.countries) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const auto& q) { return q.country == c; });
    if (it == all.end()) {
      throw Error("country " + c.str() + " not present in " + out.quarterly().string() +
                  " (run ingest first)");
    }
    picked.push_back(*it);
  }
  return picked;
}

inline StoredModel load_country_model(const RunConfig& cfg, const OutputPaths& out, const CountryCode& c) {
  const auto path = out.model(c);
  if (!std::filesystem::exists(path)) {
    throw IoError("missing model for " + c.str() + " at " + path.string() + " (run train first)");
  }
  auto m = load_model(read_file(path));
  if (m.network.input_size() != cfg.window) {
    throw Error("model for " + c.str() + " expects " + std::to_string(m.network.input_size()) +
                " inputs but window is " + std::to_string(cfg.window));
  }
  return m;
}

// ---------------------------------------------------------------- commands

struct IngestSummary {
  std::vector<std::pair<CountryCode, std::size_t>> counts;
};

/// Reads the annual file, disaggregates every country and writes
/// quarterly.csv (country,year,quarter,value).
inline IngestSummary cmd_ingest(const RunConfig& cfg, std::ostream& log) {
  const OutputPaths out{cfg.output_dir};
  const auto annual = parse_worldbank_csv(read_file(cfg.data_path), cfg.indicator, cfg.countries, cfg.years);
  std::vector<QuarterlySeries> quarterly;
  IngestSummary summary;
  for (const auto& a : annual) {
    quarterly.push_back(detail::with_country(a.country, [&] { return to_quarterly(a, cfg.disaggregation); }));
    summary.counts.emplace_back(a.country, quarterly.back().values.size());
  }
  write_file_atomic(out.quarterly(), emit_quarterly_csv(quarterly));

  for (const auto& [c, n] : summary.counts) log << c.str() << ": " << n << " quarterly points\n";
  const bool uniform = std::all_of(summary.counts.begin(), summary.counts.end(),
                                   [&](const auto& p) { return p.second == summary.counts.front().second; });
  if (uniform && !summary.counts.empty()) {
    log << summary.counts.front().second << " points x " << summary.counts.size() << " countries -> "
        << out.quarterly().string() << '\n';
  }
  return summary;
}

/// Trains one network per country and writes models/<CC>.model and
/// reports/<CC>.json.
inline std::vector<TrainReport> cmd_train(const RunConfig& cfg, std::size_t jobs, std::ostream& log) {
  const OutputPaths out{cfg.output_dir};
  const auto series = load_quarterly(cfg, out);
  std::vector<TrainReport> reports(series.size());

  detail::parallel_for(series.size(), jobs, [&](std::size_t i) {
    const auto& c = series[i].country;
    detail::with_country(c, [&] {
      const auto prepared = prepare(series[i], cfg);
      auto [net, state] = init_network(cfg.network);
      reports[i] = train(net, state, prepared.dataset, cfg.network);
      write_file_atomic(out.model(c), save_model(net, cfg.network.seed));
      write_file_atomic(out.report(c), to_json(reports[i]).dump(2) + '\n');
    });
  });

  for (std::size_t i = 0; i < series.size(); ++i) {
    log << series[i].country.str() << ": train MSE " << detail::format_scientific(reports[i].train_mse, 4)
        << ", test MSE " << detail::format_scientific(reports[i].test_mse, 4) << '\n';
  }
  return reports;
}

struct CountryEvaluation {
  CountryCode country;
  MetricsReport train;
  MetricsReport test;
  RegressionFit train_fit;
  RegressionFit test_fit;
  std::optional<KFoldReport> kfold;
};

/// Scores the trained models on their train and test windows. Writes
/// metrics.csv (country,split,mse,rmse,mape,mae) and regression.csv
/// (country,split,slope,intercept,r); with `kfold`, adds one row per fold.
inline std::vector<CountryEvaluation> cmd_evaluate(const RunConfig& cfg, std::size_t jobs, bool kfold,
                                                   std::ostream& log) {
  const OutputPaths out{cfg.output_dir};
  const auto series = load_quarterly(cfg, out);
  std::vector<CountryEvaluation> results(series.size());

  detail::parallel_for(series.size(), jobs, [&](std::size_t i) {
    const auto& c = series[i].country;
    detail::with_country(c, [&] {
      const auto prepared = prepare(series[i], cfg);
      const auto model = load_country_model(cfg, out, c);
      const auto& d = prepared.dataset;

      auto& r = results[i];
      r.country = c;
      const auto train_pred = predict_all(model.network, d.train());
      const auto train_true = targets_of(d.train());
      const auto test_pred = predict_all(model.network, d.test());
      const auto test_true = targets_of(d.test());
      r.train = score(train_pred, train_true, prepared.norm);
      r.test = score(test_pred, test_true, prepared.norm);
      r.train_fit = fit_regression(train_pred, train_true);
      r.test_fit = fit_regression(test_pred, test_true);
      if (kfold) r.kfold = kfold_evaluate(d.samples, cfg.k, cfg.network, prepared.norm);
    });
  });

  std::string metrics = "country,split,mse,rmse,mape,mae\n";
  std::string fits = "country,split,slope,intercept,r\n";
  for (const auto& r : results) {
    const auto& c = r.country.str();
    metrics += detail::metrics_row(c, "train", r.train);
    metrics += detail::metrics_row(c, "test", r.test);
    fits += detail::fit_row(c, "train", r.train_fit);
    fits += detail::fit_row(c, "test", r.test_fit);
    if (r.kfold) {
      for (std::size_t f = 0; f < r.kfold->folds.size(); ++f) {
        const auto name = "fold" + std::to_string(f + 1);
        metrics += detail::metrics_row(c, name, r.kfold->folds[f].metrics);
        fits += detail::fit_row(c, name, r.kfold->folds[f].fit);
      }
      fits += detail::fit_row(c, "kfold_mean", r.kfold->mean_fit);
    }
    log << c << ": test MSE " << detail::format_scientific(r.test.mse, 4) << ", MAE "
        << detail::format_scientific(r.test.mae, 4) << ", fit Y = " << detail::format_fixed(r.test_fit.slope, 4)
        << " X + " << detail::format_fixed(r.test_fit.intercept, 4);
    if (r.kfold) log << ", k-fold mean r " << detail::format_fixed(r.kfold->mean_fit.r, 4);
    log << '\n';
  }
  write_file_atomic(out.metrics(), metrics);
  write_file_atomic(out.regression(), fits);
  return results;
}

/// Recursive forecasts for every country, written as forecast.csv, plus the
/// per-country plot set under plots/.
inline ForecastTable cmd_forecast(const RunConfig& cfg, std::size_t jobs, std::ostream& log) {
  const OutputPaths out{cfg.output_dir};
  const auto series = load_quarterly(cfg, out);

  ForecastTable table;
  table.horizon = cfg.horizon;
  table.values.resize(series.size());
  for (const auto& s : series) table.countries.push_back(s.country);
  const auto last = series.front().last_stamp();
  for (const auto& s : series) {
    if (s.last_stamp() != last) {
      throw Error("countries end in different quarters; cannot share one forecast table");
    }
  }
  table.start = last.advanced(1 + static_cast<long>(kBridgeQuarters));

  std::vector<std::pair<TrainReport, std::vector<double>>> plot_inputs(series.size());
  detail::parallel_for(series.size(), jobs, [&](std::size_t i) {
    const auto& c = series[i].country;
    detail::with_country(c, [&] {
      const auto prepared = prepare(series[i], cfg);
      const auto model = load_country_model(cfg, out, c);
      const auto window = std::span(prepared.normalized).last(cfg.window);
      auto path = recursive_forecast(model.network, window, kBridgeQuarters + cfg.horizon, prepared.norm);
      table.values[i].assign(path.begin() + static_cast<long>(kBridgeQuarters), path.end());

      const auto& d = prepared.dataset;
      const auto report = train_report_from_json(Json::parse(read_file(out.report(c))));
      const auto predicted = predict_all(model.network, d.samples);
      const auto actual = targets_of(d.samples);
      const auto test_fit = fit_regression(std::span(predicted).subspan(d.split_index),
                                           std::span(actual).subspan(d.split_index));
      emit_plots(out.plots(), c.str(), report, predicted, actual, d.split_index, test_fit);
    });
  });

  write_file_atomic(out.forecast(), emit_forecast_csv(table));
  log << "forecast " << table.horizon << " quarters from " << table.start.year << " q" << table.start.quarter
      << " -> " << out.forecast().string() << '\n';
  return table;
}

}  // namespace exportcast
