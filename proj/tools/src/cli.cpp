#include "cli.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "potwb/bootstrap.hpp"
#include "potwb/errors.hpp"
#include "potwb/timeseries.hpp"

#ifndef POTWB_VERSION
#define POTWB_VERSION "unknown"
#endif

namespace potwb::cli {

namespace {

bool station_command(const std::string& c) { return c != "simstudy"; }
bool pair_command(const std::string& c) { return c == "bgpd" || c == "region"; }

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

}  // namespace

YearSpan YearSpan::parse(std::string_view text) {
  YearSpan s;
  const auto year_at = [&](std::string_view part, int& out) {
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return part.size() == 4 && ec == std::errc() && ptr == part.data() + part.size();
  };
  if (text.size() != 9 || text[4] != '-' || !year_at(text.substr(0, 4), s.first) ||
      !year_at(text.substr(5, 4), s.last) || s.first > s.last) {
    throw UsageError("window must be written YYYY-YYYY with the first year not after the last, got '" +
                     std::string(text) + "'");
  }
  return s;
}

std::string YearSpan::name() const { return fmt::format("{:04d}-{:04d}", first, last); }

void RunConfig::apply_defaults() {
  if (return_periods.empty()) {
    return_periods = command == "window" ? std::vector<double>{10.0, 50.0}
                                         : std::vector<double>{2.0, 5.0, 10.0, 20.0, 50.0, 100.0};
  }
  if (q_levels.empty()) q_levels = {0.9, 0.99, 0.999};
  if (conf < 0.0) conf = command == "window" ? 0.99 : 0.95;
  if (replicates < 0) {
    if (command == "returnlevel") {
      replicates = 500;
    } else if (command == "bgpd") {
      replicates = 100;
    } else {
      replicates = 0;
    }
  }
  if (out.empty()) out = "potwb-" + command;
}

void RunConfig::validate() const {
  require(!command.empty(), "no command given");
  if (station_command(command)) {
    require(!manifest.empty(), "--manifest is required");
    require(!station.empty(), "--station is required");
  }
  if (pair_command(command)) require(!station_b.empty(), "--station-b is required");
  if (command == "region") require(!window1.empty() && !window2.empty(), "--window1 and --window2 are required");
  if (!window1.empty()) (void)YearSpan::parse(window1);
  if (!window2.empty()) (void)YearSpan::parse(window2);
  (void)Season::parse(season);
  if (command == "freq") require(season == "all", "freq counts whole calendar years; --season must be all");
  require(threshold > 0.0, "--threshold must be positive");
  require(threshold_b < 0.0 || threshold_b > 0.0, "--threshold-b must be positive");
  for (double m : return_periods) require(m > 0.0, "return periods must be positive");
  for (double q : q_levels) require(q > 0.0 && q < 1.0, "quantile levels must lie in (0, 1)");
  require(conf > 0.0 && conf < 1.0, "--conf must lie in (0, 1)");
  const auto kind = parse_weight_kind(scheme);
  require(kind != WeightKind::unit, "--scheme must be exp or multinom");
  require(replicates >= 0, "--replicates must be >= 0");
  WindowPlan{window_years, step, min_exceed}.validate();
  require(return_years > 0.0, "--return-years must be positive");
  require(joint_q > 0.0 && joint_q < 1.0, "--joint-q must lie in (0, 1)");
  if (command == "simstudy" && !config.empty()) require(std::filesystem::exists(config), "config file not found");
}

std::string run_manifest(const RunConfig& cfg, const std::vector<std::string>& args, const RunResult& result) {
  nlohmann::json j;
  j["tool"] = "potwb";
  j["version"] = POTWB_VERSION;
  j["command"] = cfg.command;
  j["arguments"] = args;
  j["seed"] = cfg.seed;
  nlohmann::json c;
  c["manifest"] = cfg.manifest.string();
  c["station"] = cfg.station;
  c["station_b"] = cfg.station_b;
  c["season"] = cfg.season;
  c["threshold"] = cfg.threshold;
  c["threshold_b"] = cfg.threshold_b > 0.0 ? cfg.threshold_b : cfg.threshold;
  c["return_periods"] = cfg.return_periods;
  c["q_levels"] = cfg.q_levels;
  c["conf"] = cfg.conf;
  c["scheme"] = cfg.scheme;
  c["replicates"] = cfg.replicates;
  c["window_years"] = cfg.window_years;
  c["step"] = cfg.step;
  c["min_exceed"] = cfg.min_exceed;
  c["trajectory"] = cfg.trajectory;
  c["window1"] = cfg.window1;
  c["window2"] = cfg.window2;
  c["return_years"] = cfg.return_years;
  c["joint_q"] = cfg.joint_q;
  c["config"] = cfg.config.string();
  j["config"] = c;
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& a : result.artifacts) outputs.push_back(a.name);
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalError*>(&e) != nullptr) return kExitNumerical;
  if (dynamic_cast<const UsageError*>(&e) != nullptr || dynamic_cast<const DomainError*>(&e) != nullptr ||
      dynamic_cast<const DataError*>(&e) != nullptr || dynamic_cast<const std::invalid_argument*>(&e) != nullptr) {
    return kExitUsage;
  }
  return kExitNumerical;
}

namespace {

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--out", cfg.out, "Output directory");
  sub->add_option("--threads", cfg.threads, "Worker threads (0 = all cores); results do not depend on it");
}

void add_station(CLI::App* sub, RunConfig& cfg, bool pair) {
  sub->add_option("--manifest", cfg.manifest, "Station manifest JSON")->required();
  sub->add_option("--station", cfg.station, "Station id")->required();
  sub->add_option("--threshold", cfg.threshold, "Threshold u in mm")->capture_default_str();
  if (pair) {
    sub->add_option("--station-b", cfg.station_b, "Second station id")->required();
    sub->add_option("--threshold-b", cfg.threshold_b, "Threshold of the second station (default: --threshold)");
  }
}

void add_season(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--season", cfg.season, "all, DJF, JJA or a month 1..12")->capture_default_str();
}

void add_boot(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--conf", cfg.conf, "Confidence level");
  sub->add_option("--scheme", cfg.scheme, "Bootstrap weights: exp or multinom")->capture_default_str();
  sub->add_option("--replicates", cfg.replicates, "Bootstrap replicates (0 = none)");
  sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
}

void add_window(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--window-years", cfg.window_years, "Window length in years")->capture_default_str();
  sub->add_option("--step", cfg.step, "Window step in years")->capture_default_str();
  sub->add_option("--min-exceed", cfg.min_exceed, "Minimum exceedances per window")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Peaks-over-threshold analysis of daily precipitation with weighted bootstrap intervals", "potwb"};
  app.require_subcommand(1);
  app.set_version_flag("--version", POTWB_VERSION);

  auto* fit = app.add_subcommand("fit", "GPD fit and QQ plot for one station");
  add_station(fit, cfg, false);
  add_season(fit, cfg);
  fit->add_option("--q", cfg.q_levels, "Excess quantile levels to report")->delimiter(',');

  auto* rl = app.add_subcommand("returnlevel", "Return levels with profile and bootstrap intervals");
  add_station(rl, cfg, false);
  add_season(rl, cfg);
  add_boot(rl, cfg);
  rl->add_option("--m", cfg.return_periods, "Return periods in years")->delimiter(',');

  auto* win = app.add_subcommand("window", "Return levels over moving windows");
  add_station(win, cfg, false);
  add_season(win, cfg);
  add_boot(win, cfg);
  add_window(win, cfg);
  win->add_option("--m", cfg.return_periods, "Return periods in years")->delimiter(',');

  auto* bg = app.add_subcommand("bgpd", "Logistic bivariate GPD dependence between two stations");
  add_station(bg, cfg, true);
  add_season(bg, cfg);
  add_boot(bg, cfg);
  add_window(bg, cfg);
  bg->add_flag("--trajectory", cfg.trajectory, "Also fit every moving window");
  bg->add_option("--window1", cfg.window1, "First comparison window YYYY-YYYY");
  bg->add_option("--window2", cfg.window2, "Second comparison window YYYY-YYYY");
  bg->add_option("--joint-q", cfg.joint_q, "Marginal level of the joint exceedance probability")
      ->capture_default_str();

  auto* rg = app.add_subcommand("region", "Coverage regions for two windows");
  add_station(rg, cfg, true);
  add_season(rg, cfg);
  rg->add_option("--window1", cfg.window1, "First window YYYY-YYYY")->required();
  rg->add_option("--window2", cfg.window2, "Second window YYYY-YYYY")->required();
  rg->add_option("--return-years", cfg.return_years, "One observation outside per this many years")
      ->capture_default_str();

  auto* sim = app.add_subcommand("simstudy", "Coverage simulation over mixture scenarios");
  sim->add_option("--config", cfg.config, "Scenario JSON (default: the built-in reference rows)");

  auto* fq = app.add_subcommand("freq", "Annual and monthly exceedance counts");
  add_station(fq, cfg, false);

  for (auto* sub : {fit, rl, win, bg, rg, sim, fq}) add_common(sub, cfg);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    (void)app.exit(e, out, err);
    return kExitUsage;
  }
  for (const auto* sub : app.get_subcommands()) cfg.command = sub->get_name();

  try {
    cfg.apply_defaults();
    cfg.validate();
    const auto result = execute(cfg);
    std::filesystem::create_directories(cfg.out);
    const auto write = [&](const std::string& name, const std::string& content) {
      std::ofstream f(cfg.out / name, std::ios::binary);
      if (!f) throw DataError("cannot write " + (cfg.out / name).string());
      f << content;
      if (!f) throw DataError("write failed for " + (cfg.out / name).string());
    };
    for (const auto& a : result.artifacts) write(a.name, a.content);
    write("manifest.json", run_manifest(cfg, args, result));
    out << result.summary;
    out << "wrote " << result.artifacts.size() + 1 << " files to " << cfg.out.string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    err << "potwb " << cfg.command << ": " << (code == kExitNumerical ? "numerical failure: " : "error: ")
        << e.what() << "\n";
    return code;
  }
}

}  // namespace potwb::cli
