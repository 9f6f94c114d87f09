#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "potwb/gpd.hpp"

namespace potwb {

/// Shape estimates are confined to [kXiMin, kXiMax]. Below -0.5 the ML
/// estimator loses its regular asymptotics; the upper cap keeps profile
/// searches over the shape on a bounded interval.
inline constexpr double kXiMin = -0.5 + 1e-6;
inline constexpr double kXiMax = 5.0;

/// Log-likelihood assigned to infeasible proposals (off-support or shape out
/// of range) so that the simplex stays well defined.
inline constexpr double kPenaltyLoglik = -1e12;

inline constexpr std::size_t kMinFitSize = 10;

struct OptimizerConfig {
  int max_iterations = 2000;
  double rel_tol = 1e-10;
  int restarts = 5;
  std::uint64_t seed = 20131009;

  /// Throws UsageError on max_iterations < 1, rel_tol <= 0 or restarts < 1.
  void validate() const;
};

struct FitResult {
  GpdParams params{1.0, 0.0};
  QuantileParam qparams{0.0, 0.99, 0.0};
  double loglik_at_max = kNegInf;
  bool converged = false;
  int iterations = 0;
};

/// Multistart points in (sigma, xi): moment estimate, (mean, 0), (mean, 0.2),
/// (mean, -0.2), then seeded random draws; `cfg.restarts` of them. Starts with
/// negative shape get their scale raised until the sample is in the support.
[[nodiscard]] std::vector<GpdParams> starting_points(std::span<const double> sample,
                                                     const OptimizerConfig& cfg);

/// Maximum-likelihood GPD fit in (sigma, xi). `level_q` selects the quantile
/// reported in FitResult::qparams.
///
/// Throws UsageError for fewer than kMinFitSize points, DomainError for
/// negative excesses and DegenerateSampleError if all points coincide.
[[nodiscard]] FitResult fit_gpd(std::span<const double> sample, const OptimizerConfig& cfg,
                                double level_q = 0.99);

/// Maximum-likelihood fit in the (xi, H^-1(q)) parameterization.
[[nodiscard]] FitResult fit_gpd_qparam(std::span<const double> sample, double level_q,
                                       const OptimizerConfig& cfg);

namespace detail {

void validate_sample(std::span<const double> sample);

// Maximizes sum w_i log h(x_i) over (xi, log H^-1(q)) from the given starts,
// then polishes the best vertex. Empty weights mean unit weights.
FitResult maximize_qparam(std::span<const double> sample, std::span<const double> weights,
                          double level_q, std::span<const QuantileParam> starts,
                          const OptimizerConfig& cfg);

// Objective used by every GPD optimizer: the (weighted) log-likelihood, or
// kPenaltyLoglik for infeasible parameters.
double penalized_loglik_q(double xi, double quantile_value, double level_q,
                          std::span<const double> sample, std::span<const double> weights);

}  // namespace detail

}  // namespace potwb
