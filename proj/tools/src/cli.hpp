#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "potwb/gpd.hpp"

namespace potwb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Inclusive calendar-year span written "YYYY-YYYY".
struct YearSpan {
  int first = 0;
  int last = 0;

  /// Throws UsageError on anything but two four-digit years in order.
  [[nodiscard]] static YearSpan parse(std::string_view text);
  [[nodiscard]] std::string name() const;
};

/// Parameters of one invocation. Numeric fields left at their sentinel take a
/// per-command default in apply_defaults().
struct RunConfig {
  std::string command;
  std::filesystem::path manifest;
  std::string station;
  std::string station_b;
  std::string season = "all";
  double threshold = 10.0;
  double threshold_b = -1.0;  ///< < 0: same as threshold
  std::vector<double> return_periods;
  std::vector<double> q_levels;
  double conf = -1.0;
  std::string scheme = "exp";
  int replicates = -1;
  std::uint64_t seed = 20131009;
  int window_years = 20;
  int step = 1;
  int min_exceed = 50;
  bool trajectory = false;
  std::string window1;
  std::string window2;
  double return_years = 10.0;
  double joint_q = 0.9;
  std::filesystem::path config;
  std::filesystem::path out;
  unsigned threads = 0;

  void apply_defaults();
  /// Throws UsageError / DomainError before any data is read.
  void validate() const;
};

/// Named output file and its full contents.
struct Artifact {
  std::string name;
  std::string content;
};

struct RunResult {
  std::vector<Artifact> artifacts;
  /// Lines echoed to stdout.
  std::string summary;
};

/// Runs the analysis for a validated config without touching the filesystem
/// beyond reading inputs.
[[nodiscard]] RunResult execute(const RunConfig& cfg);

/// manifest.json for a finished run: arguments, resolved config, outputs.
[[nodiscard]] std::string run_manifest(const RunConfig& cfg, const std::vector<std::string>& args,
                                       const RunResult& result);

/// Full command line entry: parse, execute, write `cfg.out`. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

[[nodiscard]] int exit_code_for(const std::exception& e);

/// (theoretical quantile at (i - 0.5) / n, i-th smallest observation).
[[nodiscard]] std::vector<std::pair<double, double>> qq_pairs(const GpdParams& fit,
                                                              std::vector<double> sample);

/// Mass left outside once per `return_years` on average:
/// 1 - 1 / (pairs_per_year * return_years). Throws DomainError unless positive.
[[nodiscard]] double region_target_mass(double pairs_per_year, double return_years);

}  // namespace potwb::cli
