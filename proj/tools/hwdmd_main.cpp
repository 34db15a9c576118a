#include <filesystem>
#include <iostream>
#include <map>
#include <new>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hwdmd/archive.hpp"
#include "hwdmd/commands.hpp"
#include "hwdmd/error.hpp"

namespace {

using hwdmd::ErrorCategory;
namespace cli = hwdmd::cli;

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::data: return 3;
    case ErrorCategory::numeric: return 4;
    case ErrorCategory::io: return 5;
  }
  return 1;
}

int report(ErrorCategory category, const std::string& command, const std::string& message) {
  const nlohmann::json record{{"level", "error"},
                              {"category", std::string(hwdmd::to_string(category))},
                              {"command", command},
                              {"message", message}};
  std::cerr << record.dump() << std::endl;
  return exit_code(category);
}

// Flags and hyperparameters shared by several subcommands, as raw strings so
// that one parser handles the command line and the config file.
struct HyperFlags {
  std::string lags = "3,4,8,14,19,28,30,33,35,36";
  hwdmd::Index rx = 100;
  hwdmd::Index ry = 50;
  double rho = 0.92;

  void add(CLI::App* app) {
    app->add_option("--lags", lags, "OD lags, e.g. 3,4,8 (each >= 3)")->capture_default_str();
    app->add_option("--rx", rx, "rank of the input basis U_X")->capture_default_str();
    app->add_option("--ry", ry, "rank of the output basis U_Y")->capture_default_str();
    app->add_option("--rho", rho, "daily forgetting ratio in (0, 1]")->capture_default_str();
  }
  hwdmd::HwDmdHyper hyper() const {
    hwdmd::HwDmdHyper h;
    h.lags = hwdmd::LagSpec::parse(lags);
    h.rank_x = rx;
    h.rank_y = ry;
    h.rho = rho;
    return h;
  }
};

/// Splices `key=value` lines from --config into argv as --key=value for every
/// key the chosen subcommand accepts and the command line does not set.
std::vector<std::string> with_config(CLI::App& app, std::vector<std::string> args) {
  std::string config;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config.empty() || rest.empty()) return rest;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(rest.front());
  } catch (const CLI::OptionNotFound&) {
    return rest;
  }
  const auto values = hwdmd::read_key_values(config);
  std::vector<std::string> injected{rest.front()};
  for (const auto& [key, value] : values) {
    const std::string flag = "--" + key;
    bool known = false;
    for (CLI::App* other : app.get_subcommands({})) {
      if (other->get_option_no_throw(flag) != nullptr) known = true;
    }
    if (!known) throw hwdmd::ConfigError("unknown config key '" + key + "' in " + config);
    if (sub->get_option_no_throw(flag) == nullptr) continue;
    bool given = false;
    for (const std::string& arg : rest) {
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) given = true;
    }
    if (!given) injected.push_back(flag + "=" + value);
  }
  injected.insert(injected.end(), rest.begin() + 1, rest.end());
  return injected;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-order weighted DMD for OD-matrix forecasting"};
  app.require_subcommand(1);
  app.add_option("--config", "flat key=value file supplying defaults for the flags");

  // build
  cli::BuildOptions build;
  std::string day_start = "06:00", day_end = "24:00";
  auto* c_build = app.add_subcommand("build", "aggregate trip records into snapshots");
  c_build->add_option("--trips", build.trips, "trip CSV")->required();
  c_build->add_option("--out", build.out, "snapshot archive directory")->required();
  c_build->add_option("--first-date", build.first_date, "first calendar date (YYYY-MM-DD)");
  c_build->add_option("--last-date", build.last_date, "last calendar date (YYYY-MM-DD)");
  c_build->add_option("--interval-min", build.interval_minutes, "interval length in minutes")
      ->capture_default_str();
  c_build->add_option("--day-start", day_start, "operating window start HH:MM")
      ->capture_default_str();
  c_build->add_option("--day-end", day_end, "operating window end HH:MM")->capture_default_str();
  c_build->add_flag("--text", build.text, "write CSV matrices");

  // train
  cli::TrainOptions train;
  HyperFlags train_hyper;
  std::string train_days;
  auto* c_train = app.add_subcommand("train", "batch fit on a range of days");
  c_train->add_option("--snapshots", train.snapshots, "snapshot archive")->required();
  c_train->add_option("--model", train.model, "model file to write")->required();
  c_train->add_option("--train-days", train_days, "day ordinals first:last (half-open)")
      ->required();
  train_hyper.add(c_train);

  // update
  cli::UpdateOptions update;
  auto* c_update = app.add_subcommand("update", "absorb one more day into a model");
  c_update->add_option("--model", update.model, "model file, rewritten in place")->required();
  c_update->add_option("--trips", update.trips, "trip CSV for the day");
  c_update->add_option("--snapshots", update.snapshots, "snapshot archive containing the day");
  c_update->add_option("--day", update.day, "service day YYYY-MM-DD")->required();
  c_update->add_option("--expand-tol", update.expand_tolerance,
                       "relative singular-value threshold for new basis directions")
      ->capture_default_str();

  // forecast
  cli::ForecastOptions fcast;
  std::string test_days;
  auto* c_forecast = app.add_subcommand("forecast", "rolling multi-step forecasts");
  c_forecast->add_option("--snapshots", fcast.snapshots, "snapshot archive")->required();
  c_forecast->add_option("--model", fcast.model, "model file")->required();
  c_forecast->add_option("--out", fcast.out, "forecast directory")->required();
  c_forecast->add_option("--test-days", test_days, "day ordinals first:last")->required();
  c_forecast->add_option("--horizon", fcast.horizon, "steps ahead L")->capture_default_str();
  c_forecast->add_flag("--clamp", fcast.clamp, "clamp negative OD forecasts to zero");
  c_forecast->add_flag("--online", fcast.online, "update the model after each test day");
  c_forecast->add_flag("--text", fcast.text, "write CSV matrices");

  // evaluate
  cli::EvaluateOptions eval;
  std::string ha_days;
  auto* c_eval = app.add_subcommand("evaluate", "metrics and breakdown reports");
  c_eval->add_option("--snapshots", eval.snapshots, "snapshot archive")->required();
  c_eval->add_option("--forecasts", eval.forecasts, "forecast directory")->required();
  c_eval->add_option("--out", eval.out, "report directory")->required();
  c_eval->add_option("--model", eval.model, "model file; adds low-rank bound rows");
  c_eval->add_option("--train-days", ha_days, "adds Historical Average rows fitted on these days");
  c_eval->add_flag("--clamp", eval.clamp, "also report clamped forecasts");

  // tune
  cli::TuneOptions tune;
  HyperFlags tune_hyper;
  std::string tune_train, tune_val, candidates, rx_grid, ry_grid, rho_grid;
  bool no_lag_search = false;
  auto* c_tune = app.add_subcommand("tune", "greedy lag selection, rank grid and rho search");
  c_tune->add_option("--snapshots", tune.snapshots, "snapshot archive")->required();
  c_tune->add_option("--out", tune.out, "directory for trace.csv and best.conf")->required();
  c_tune->add_option("--train-days", tune_train, "day ordinals first:last")->required();
  c_tune->add_option("--val-days", tune_val, "day ordinals first:last")->required();
  c_tune->add_option("--candidates", candidates, "candidate lags, list or a:b (default 3:d)");
  c_tune->add_option("--max-lags", tune.max_lags, "maximum lag count")->capture_default_str();
  c_tune->add_option("--rx-grid", rx_grid, "r_X grid (default 20:100 step 10)");
  c_tune->add_option("--ry-grid", ry_grid, "r_Y grid (default 20:100 step 10)");
  c_tune->add_option("--rho-grid", rho_grid, "rho grid (default 0.80..1.00 step 0.01)");
  c_tune->add_flag("--no-lag-search", no_lag_search, "keep --lags and tune ranks and rho only");
  tune_hyper.add(c_tune);

  // dmd
  cli::DmdOptions dmd;
  auto* c_dmd = app.add_subcommand("dmd", "exact DMD of a snapshot pair");
  c_dmd->add_option("--prev", dmd.prev, "matrix file Y_prev")->required();
  c_dmd->add_option("--next", dmd.next, "matrix file Y_next")->required();
  c_dmd->add_option("--rank", dmd.rank, "truncation rank")->required();
  c_dmd->add_option("--out", dmd.out, "directory for eigenvalues.csv and modes.csv")->required();

  // synth
  cli::SynthOptions synth;
  hwdmd::Index shift_day = -1;
  auto* c_synth = app.add_subcommand("synth", "synthetic snapshot archive with known dynamics");
  c_synth->add_option("--out", synth.out, "snapshot archive directory")->required();
  c_synth->add_option("--stations", synth.spec.stations, "station count s")->capture_default_str();
  c_synth->add_option("--intervals-per-day", synth.spec.intervals_per_day, "intervals per day d")
      ->capture_default_str();
  c_synth->add_option("--days", synth.spec.days, "service days")->capture_default_str();
  c_synth->add_option("--rank", synth.spec.rank, "latent rank")->capture_default_str();
  c_synth->add_option("--noise", synth.spec.noise, "noise level relative to sqrt(mean flow)")
      ->capture_default_str();
  c_synth->add_option("--mean-flow", synth.spec.mean_flow, "mean flow per pair")
      ->capture_default_str();
  c_synth->add_option("--shift-day", shift_day, "day ordinal of a regime shift");
  c_synth->add_option("--seed", synth.spec.seed, "random seed")->capture_default_str();
  c_synth->add_flag("--text", synth.text, "write CSV matrices");

  std::string command = "hwdmd";
  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (!args.empty()) command = args.front();
    args = with_config(app, std::move(args));
    std::vector<const char*> raw{argv[0]};
    for (const std::string& a : args) raw.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(raw.size()), raw.data());
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      return report(ErrorCategory::config, command, e.what());
    }

    auto minute_of = [](const std::string& hhmm) {
      const auto colon = hhmm.find(':');
      if (colon == std::string::npos) throw hwdmd::ConfigError("time '" + hhmm + "' must be HH:MM");
      try {
        return std::stoi(hhmm.substr(0, colon)) * 60 + std::stoi(hhmm.substr(colon + 1));
      } catch (const std::exception&) {
        throw hwdmd::ConfigError("time '" + hhmm + "' must be HH:MM");
      }
    };

    std::ostream& log = std::cout;
    if (c_build->parsed()) {
      build.day_start_minute = minute_of(day_start);
      build.day_end_minute = minute_of(day_end);
      cli::cmd_build(build, log);
    } else if (c_train->parsed()) {
      train.train = cli::DayRange::parse(train_days);
      train.hyper = train_hyper.hyper();
      cli::cmd_train(train, log);
    } else if (c_update->parsed()) {
      cli::cmd_update(update, log);
    } else if (c_forecast->parsed()) {
      fcast.test = cli::DayRange::parse(test_days);
      cli::cmd_forecast(fcast, log);
    } else if (c_eval->parsed()) {
      if (!ha_days.empty()) eval.train = cli::DayRange::parse(ha_days);
      cli::cmd_evaluate(eval, log);
    } else if (c_tune->parsed()) {
      tune.train = cli::DayRange::parse(tune_train);
      tune.validation = cli::DayRange::parse(tune_val);
      tune.base = tune_hyper.hyper();
      tune.search_lags = !no_lag_search;
      if (!candidates.empty()) tune.candidates = cli::parse_index_list(candidates);
      if (!rx_grid.empty()) tune.grids.rank_x = cli::parse_index_list(rx_grid);
      if (!ry_grid.empty()) tune.grids.rank_y = cli::parse_index_list(ry_grid);
      if (!rho_grid.empty()) tune.grids.rho = cli::parse_double_list(rho_grid);
      cli::cmd_tune(tune, log);
    } else if (c_dmd->parsed()) {
      cli::cmd_dmd(dmd, log);
    } else if (c_synth->parsed()) {
      if (shift_day >= 0) synth.spec.shift_day = shift_day;
      cli::cmd_synth(synth, log);
    }
  } catch (const hwdmd::Error& e) {
    return report(e.category(), command, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report(ErrorCategory::io, command, e.what());
  } catch (const std::bad_alloc&) {
    return report(ErrorCategory::numeric, command, "out of memory");
  } catch (const std::exception& e) {
    return report(ErrorCategory::data, command, e.what());
  }
  return 0;
}
