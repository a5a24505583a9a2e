#pragma once

#include "exportcast/disaggregate.hpp"
#include "exportcast/error.hpp"
#include "exportcast/ingest.hpp"
#include "exportcast/io.hpp"
#include "exportcast/mlp.hpp"
#include "exportcast/preprocess.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace exportcast {

inline const std::vector<std::string> kDefaultCountries{"USA", "CAN", "DEU", "FRA", "JPN",
                                                        "TUR", "KOR", "PRT", "GRC", "IRN"};

/// Everything a batch run needs. Defaults reproduce the reference setup.
struct RunConfig {
  std::vector<CountryCode> countries;
  std::filesystem::path data_path;
  std::string indicator{kDefaultIndicator};
  YearSpan years{1970, 2019};
  Disaggregation disaggregation = Disaggregation::linear;
  std::size_t window = 4;
  double train_frac = 0.75;
  NormFit norm_fit = NormFit::full;
  NetworkConfig network;  // layer_sizes[0] == window
  std::size_t k = 5;
  std::size_t horizon = 20;
  std::filesystem::path output_dir{"out"};

  RunConfig() {
    for (const auto& c : kDefaultCountries) countries.emplace_back(c);
  }
};

inline constexpr std::array<std::string_view, 20> kConfigKeys{
    "countries", "data_path", "indicator", "start_year", "end_year", "disaggregation", "window",
    "train_frac", "norm_fit", "layer_sizes", "activation", "epochs", "learning_rate", "beta1",
    "beta2", "epsilon", "seed", "k", "horizon", "output_dir"};

inline void validate(const RunConfig& c) {
  if (c.countries.empty()) throw std::invalid_argument("config: countries must not be empty");
  for (std::size_t i = 0; i < c.countries.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (c.countries[i] == c.countries[j]) {
        throw std::invalid_argument("config: duplicate country " + c.countries[i].str());
      }
    }
  }
  if (c.years.last < c.years.first) throw std::invalid_argument("config: end_year before start_year");
  if (c.window < 1) throw std::invalid_argument("config: window must be >= 1");
  if (!(c.train_frac > 0.0 && c.train_frac < 1.0)) {
    throw std::invalid_argument("config: train_frac must lie strictly between 0 and 1");
  }
  validate(c.network);
  if (c.network.layer_sizes.front() != c.window) {
    throw std::invalid_argument("config: layer_sizes[0] must equal window");
  }
  if (c.k < 2) throw std::invalid_argument("config: k must be >= 2");
  if (c.horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
}

/// Parses a JSON run configuration. Unknown keys are errors; relative paths
/// resolve against `base_dir`.
inline RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }

  RunConfig c;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  try {
    if (j.contains("countries")) {
      c.countries.clear();
      for (const auto& code : j["countries"]) c.countries.emplace_back(code.get<std::string>());
    }
    if (j.contains("data_path")) c.data_path = resolve(j["data_path"].get<std::string>());
    if (j.contains("indicator")) c.indicator = j["indicator"].get<std::string>();
    if (j.contains("start_year")) c.years.first = j["start_year"].get<int>();
    if (j.contains("end_year")) c.years.last = j["end_year"].get<int>();
    if (j.contains("disaggregation")) {
      c.disaggregation = parse_disaggregation(j["disaggregation"].get<std::string>());
    }
    if (j.contains("window")) c.window = j["window"].get<std::size_t>();
    if (j.contains("train_frac")) c.train_frac = j["train_frac"].get<double>();
    if (j.contains("norm_fit")) c.norm_fit = parse_norm_fit(j["norm_fit"].get<std::string>());
    if (j.contains("layer_sizes")) {
      c.network.layer_sizes = j["layer_sizes"].get<std::vector<std::size_t>>();
    } else {
      c.network.layer_sizes = {c.window, 16, 1};
    }
    if (j.contains("activation")) {
      c.network.hidden_activation = parse_activation(j["activation"].get<std::string>());
    }
    if (j.contains("epochs")) c.network.epochs = j["epochs"].get<int>();
    if (j.contains("learning_rate")) c.network.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("beta1")) c.network.beta1 = j["beta1"].get<double>();
    if (j.contains("beta2")) c.network.beta2 = j["beta2"].get<double>();
    if (j.contains("epsilon")) c.network.epsilon = j["epsilon"].get<double>();
    if (j.contains("seed")) c.network.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("k")) c.k = j["k"].get<std::size_t>();
    if (j.contains("horizon")) c.horizon = j["horizon"].get<std::size_t>();
    c.output_dir = resolve(j.value("output_dir", std::string("out")));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path), path.parent_path());
}

}  // namespace exportcast
