// exportcast <ingest|train|evaluate|forecast> --config <path> [--seed S] [--jobs N] [--country CODE]...

#include "exportcast/exportcast.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::vector<std::string> countries;
  bool kfold = false;
};

exportcast::RunConfig resolve(const Options& o) {
  auto cfg = exportcast::load_run_config(o.config);
  if (o.seed) cfg.network.seed = *o.seed;
  if (!o.countries.empty()) {
    cfg.countries.clear();
    for (const auto& c : o.countries) cfg.countries.emplace_back(c);
  }
  if (const char* env = std::getenv("EXPORTCAST_OUT"); env && *env) cfg.output_dir = env;
  exportcast::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Export forecasting with a multi-layer perceptron"};
  app.require_subcommand(1);

  Options opts;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config, "JSON run configuration")->required();
    cmd->add_option("--seed", opts.seed, "override the configured seed");
    cmd->add_option("--jobs", opts.jobs, "countries processed concurrently")->check(CLI::PositiveNumber);
    cmd->add_option("--country", opts.countries, "restrict to these country codes (repeatable)");
  };

  auto* ingest = app.add_subcommand("ingest", "read annual data, disaggregate, write quarterly.csv");
  auto* train = app.add_subcommand("train", "train one network per country");
  auto* evaluate = app.add_subcommand("evaluate", "score trained networks, write metrics.csv");
  auto* forecast = app.add_subcommand("forecast", "recursive forecasts and plots");
  for (auto* cmd : {ingest, train, evaluate, forecast}) add_common(cmd);
  evaluate->add_flag("--kfold", opts.kfold, "add k-fold cross-validation rows");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = resolve(opts);
    if (ingest->parsed()) exportcast::cmd_ingest(cfg, std::cout);
    if (train->parsed()) exportcast::cmd_train(cfg, opts.jobs, std::cout);
    if (evaluate->parsed()) exportcast::cmd_evaluate(cfg, opts.jobs, opts.kfold, std::cout);
    if (forecast->parsed()) exportcast::cmd_forecast(cfg, opts.jobs, std::cout);
  } catch (const exportcast::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
