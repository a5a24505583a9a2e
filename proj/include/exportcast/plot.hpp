#pragma once

#include "exportcast/detail/text.hpp"
#include "exportcast/error.hpp"
#include "exportcast/evaluate.hpp"
#include "exportcast/io.hpp"
#include "exportcast/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace exportcast {

namespace svg {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

struct Frame {
  double width = 640, height = 420;
  double left = 70, right = 20, top = 40, bottom = 50;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;

  [[nodiscard]] double px(double x) const {
    return left + (x - x_lo) / (x_hi - x_lo) * (width - left - right);
  }
  [[nodiscard]] double py(double y) const {
    return height - bottom - (y - y_lo) / (y_hi - y_lo) * (height - top - bottom);
  }
};

inline std::string num(double v) { return detail::format_fixed(v, 2); }

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  } else {
    const double pad = 0.04 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
}

inline Frame fit_frame(const std::vector<Series>& all) {
  Frame f;
  f.x_lo = f.y_lo = HUGE_VAL;
  f.x_hi = f.y_hi = -HUGE_VAL;
  for (const auto& s : all) {
    for (double x : s.x) f.x_lo = std::min(f.x_lo, x), f.x_hi = std::max(f.x_hi, x);
    for (double y : s.y) f.y_lo = std::min(f.y_lo, y), f.y_hi = std::max(f.y_hi, y);
  }
  if (!std::isfinite(f.x_lo)) f.x_lo = 0, f.x_hi = 1, f.y_lo = 0, f.y_hi = 1;
  widen(f.x_lo, f.x_hi);
  widen(f.y_lo, f.y_hi);
  return f;
}

inline std::string open(const Frame& f, const std::string& title, const std::string& xlabel,
                        const std::string& ylabel) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(f.width) + "\" height=\"" +
       num(f.height) + "\" viewBox=\"0 0 " + num(f.width) + ' ' + num(f.height) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(f.width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(title) + "</text>\n";
  // axes
  const double x0 = f.left, x1 = f.width - f.right, y0 = f.height - f.bottom, y1 = f.top;
  s += "<path d=\"M" + num(x0) + ' ' + num(y1) + " L" + num(x0) + ' ' + num(y0) + " L" + num(x1) +
       ' ' + num(y0) + "\" stroke=\"black\" fill=\"none\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x_lo + (f.x_hi - f.x_lo) * i / 4.0;
    const double yv = f.y_lo + (f.y_hi - f.y_lo) * i / 4.0;
    s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(y0 + 16) + "\" text-anchor=\"middle\">" +
         detail::format_scientific(xv, 2) + "</text>\n";
    s += "<text x=\"" + num(x0 - 4) + "\" y=\"" + num(f.py(yv) + 4) + "\" text-anchor=\"end\">" +
         detail::format_scientific(yv, 2) + "</text>\n";
  }
  s += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(f.height - 10) +
       "\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
  s += "<text x=\"14\" y=\"" + num((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
       num((y0 + y1) / 2) + ")\">" + escape(ylabel) + "</text>\n";
  return s;
}

inline std::string polyline(const Frame& f, const Series& s) {
  std::string pts;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (i) pts += ' ';
    pts += num(f.px(s.x[i])) + ',' + num(f.py(s.y[i]));
  }
  return "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"" + pts +
         "\"/>\n";
}

inline std::string legend(const Frame& f, const std::vector<Series>& all) {
  std::string s;
  double y = f.top + 8;
  for (const auto& series : all) {
    const double x = f.width - f.right - 150;
    s += "<rect x=\"" + num(x) + "\" y=\"" + num(y - 8) + "\" width=\"12\" height=\"8\" fill=\"" +
         series.color + "\"/>\n";
    s += "<text x=\"" + num(x + 18) + "\" y=\"" + num(y) + "\">" + escape(series.label) + "</text>\n";
    y += 16;
  }
  return s;
}

inline std::string line_chart(const std::string& title, const std::string& xlabel,
                              const std::string& ylabel, const std::vector<Series>& all) {
  const auto f = fit_frame(all);
  std::string s = open(f, title, xlabel, ylabel);
  for (const auto& series : all) s += polyline(f, series);
  if (all.size() > 1) s += legend(f, all);
  return s + "</svg>\n";
}

inline std::string scatter(const std::string& title, std::span<const double> x,
                           std::span<const double> y, const RegressionFit& fit) {
  Series pts{"data", "#1f77b4", {x.begin(), x.end()}, {y.begin(), y.end()}};
  auto f = fit_frame({pts});
  std::string s = open(f, title, "predicted", "actual");
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += "<circle cx=\"" + num(f.px(x[i])) + "\" cy=\"" + num(f.py(y[i])) +
         "\" r=\"2.5\" fill=\"#1f77b4\" fill-opacity=\"0.7\"/>\n";
  }
  // Fitted line over the x range, clipped to the plotting area.
  const double xa = f.x_lo, xb = f.x_hi;
  s += "<clipPath id=\"plot\"><rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" +
       num(f.width - f.left - f.right) + "\" height=\"" + num(f.height - f.top - f.bottom) +
       "\"/></clipPath>\n";
  s += "<line clip-path=\"url(#plot)\" x1=\"" + num(f.px(xa)) + "\" y1=\"" +
       num(f.py(fit.slope * xa + fit.intercept)) + "\" x2=\"" + num(f.px(xb)) + "\" y2=\"" +
       num(f.py(fit.slope * xb + fit.intercept)) + "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
  s += "<text x=\"" + num(f.left + 10) + "\" y=\"" + num(f.top + 12) + "\">Y = " +
       detail::format_fixed(fit.slope, 4) + " X " + (fit.intercept < 0 ? "- " : "+ ") +
       detail::format_fixed(std::abs(fit.intercept), 4) + ", r = " + detail::format_fixed(fit.r, 4) +
       "</text>\n";
  return s + "</svg>\n";
}

}  // namespace svg

struct PlotFiles {
  std::filesystem::path mse;
  std::filesystem::path series;
  std::filesystem::path fit;
};

/// Writes <country>_mse.svg (training MSE per epoch), <country>_series.svg
/// (predicted and actual for every sample, train/test boundary marked) and
/// <country>_fit.svg (held-out actual against predicted, with `test_fit`)
/// into `dir`. Samples before `split_index` are training samples.
inline PlotFiles emit_plots(const std::filesystem::path& dir, const std::string& country,
                            const TrainReport& report, std::span<const double> predicted,
                            std::span<const double> actual, std::size_t split_index,
                            const RegressionFit& test_fit) {
  if (predicted.size() != actual.size()) throw std::invalid_argument("emit_plots: length mismatch");
  if (split_index > predicted.size()) throw std::invalid_argument("emit_plots: split beyond data");

  svg::Series curve{"train MSE", "#1f77b4", {}, report.mse_history};
  for (std::size_t e = 0; e < report.mse_history.size(); ++e) curve.x.push_back(static_cast<double>(e + 1));

  svg::Series act{"actual", "#2ca02c", {}, {actual.begin(), actual.end()}};
  svg::Series pred{"predicted", "#d62728", {}, {predicted.begin(), predicted.end()}};
  for (std::size_t i = 0; i < actual.size(); ++i) {
    act.x.push_back(static_cast<double>(i));
    pred.x.push_back(static_cast<double>(i));
  }
  std::string series_svg =
      svg::line_chart(country + ": predicted vs actual", "sample", "normalized exports", {act, pred});
  {
    const auto f = svg::fit_frame({act, pred});
    const auto x = svg::num(f.px(static_cast<double>(split_index) - 0.5));
    series_svg.insert(series_svg.rfind("</svg>"),
                      "<line x1=\"" + x + "\" y1=\"" + svg::num(f.top) + "\" x2=\"" + x + "\" y2=\"" +
                          svg::num(f.height - f.bottom) +
                          "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n");
  }

  PlotFiles files{dir / (country + "_mse.svg"), dir / (country + "_series.svg"),
                  dir / (country + "_fit.svg")};
  write_file_atomic(files.mse, svg::line_chart(country + ": training MSE", "epoch", "MSE", {curve}));
  write_file_atomic(files.series, series_svg);
  write_file_atomic(files.fit, svg::scatter(country + ": actual on predicted (test)",
                                            predicted.subspan(split_index), actual.subspan(split_index),
                                            test_fit));
  return files;
}

}  // namespace exportcast
