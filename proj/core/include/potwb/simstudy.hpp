#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "potwb/gpd.hpp"
#include "potwb/rng.hpp"

namespace potwb {

/// One coverage experiment: samples of size n from the two-component GPD
/// mixture w * comp1 + (1 - w) * comp2, scored against the mixture's
/// return level.
struct SimScenario {
  std::string name = "scenario";
  int n = 200;
  double mixture_weight_w = 1.0;
  /// Component defaults are rough readings of a winter/summer fit pair, not
  /// published estimates.
  GpdParams comp1{9.0, 0.05};
  GpdParams comp2{13.0, 0.15};
  double return_period_m = 100.0;
  /// Exceedance rate behind the quantile level q = 1 - 1 / (m * rate).
  double exceedances_per_year = 4.0;
  double conf_level = 0.95;
  int replications = 100;
  int boot_replicates = 500;
  std::uint64_t seed = 20131009;
  unsigned threads = 0;

  /// Throws UsageError / DomainError on out-of-range fields.
  void validate() const;
  [[nodiscard]] double level_q() const;
};

struct MethodCoverage {
  std::string method;  ///< "profile", "boot-exp", "boot-multinom"
  double coverage_pct = 0.0;
  double mean_width = 0.0;  ///< over replications where the interval was built
  int failures = 0;         ///< counted as misses
};

struct SimResult {
  double true_return_level = 0.0;
  int replications = 0;
  std::vector<MethodCoverage> methods;  ///< profile, boot-exp, boot-multinom

  [[nodiscard]] const MethodCoverage& method(const std::string& name) const;
};

/// Draws each point from comp1 with probability w, else comp2, by inversion.
[[nodiscard]] std::vector<double> simulate_mixture(const SimScenario& sc, RandomStream& rng);

[[nodiscard]] double mixture_cdf(const SimScenario& sc, double x);
/// Bisection on the mixture cdf, bracket width below 1e-10 (relative above 1).
[[nodiscard]] double mixture_quantile(const SimScenario& sc, double q);

[[nodiscard]] SimResult run_scenario(const SimScenario& sc);

/// The six sample-size / weight rows of the reference coverage table:
/// (50, 1), (100, 1), (200, 1), (200, 0.5), (500, 0.5), (500, 0.8).
[[nodiscard]] std::vector<SimScenario> reference_scenarios();

/// Reads {"scenarios": [...]} or a bare array; absent fields take defaults.
[[nodiscard]] std::vector<SimScenario> load_scenarios(const std::filesystem::path& path);
[[nodiscard]] std::vector<SimScenario> parse_scenarios(const std::string& json_text);

/// One row per (scenario, method).
[[nodiscard]] std::string format_results_csv(const std::vector<SimScenario>& scenarios,
                                             const std::vector<SimResult>& results);

}  // namespace potwb
