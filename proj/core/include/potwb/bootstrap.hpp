#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "potwb/fitter.hpp"
#include "potwb/profile.hpp"
#include "potwb/rng.hpp"

namespace potwb {

enum class WeightKind {
  multinomial,  ///< (tau_1..tau_n) ~ Multinom(n; 1/n, ..., 1/n)
  exponential,  ///< tau_i i.i.d. Exp(1)
  unit,         ///< tau_i = 1; reduces the bootstrap to the plain likelihood
};

/// Bootstrap weight law and gamma = lim E tau^2, the factor that rescales the
/// bootstrap deviance. gamma is the n -> inf limit (2 for both random kinds),
/// not the finite-n multinomial value 2 - 1/n.
struct WeightScheme {
  WeightKind kind = WeightKind::exponential;
  double gamma = 2.0;

  [[nodiscard]] static WeightScheme multinomial() { return {WeightKind::multinomial, 2.0}; }
  [[nodiscard]] static WeightScheme exponential() { return {WeightKind::exponential, 2.0}; }
  [[nodiscard]] static WeightScheme unit() { return {WeightKind::unit, 1.0}; }
};

[[nodiscard]] std::string_view to_string(WeightKind kind);
/// Accepts "exp", "exponential", "multinom", "multinomial", "unit".
[[nodiscard]] WeightKind parse_weight_kind(std::string_view name);

struct WeightVector {
  std::vector<double> weights;
};

/// Which maximizer the bootstrap deviance is measured from: the maximizer of
/// the weighted likelihood (default), or the ordinary ML estimate plugged
/// into the weighted likelihood.
enum class Recentering { weighted, unweighted };

struct BootstrapOptions {
  Recentering recentering = Recentering::weighted;
  /// Worker threads for replicates; 0 = hardware concurrency. Results do not
  /// depend on this value.
  unsigned threads = 0;
  /// Abort with UnstableBootstrapError above this fraction of failed replicates.
  double max_failure_fraction = 0.2;
};

struct BootIntervalResult {
  double lower_mean = 0.0;
  double upper_mean = 0.0;
  std::vector<std::pair<double, double>> replicate_intervals;  ///< successful replicates, in order
  int replicates = 0;
  int failures = 0;
};

/// Draws one weight vector, advancing `rng`. Throws UsageError for n == 0.
[[nodiscard]] WeightVector draw_weights(const WeightScheme& scheme, std::size_t n,
                                        RandomStream& rng);

/// sum tau_i log h(x_i) under the (xi, H^-1(q)) parameterization.
[[nodiscard]] double weighted_loglik_qparam(const QuantileParam& p, std::span<const double> sample,
                                            const WeightVector& w);

/// Weighted profile log-likelihood l*_p(r): max over the shape of the
/// weighted likelihood with H^-1(q) pinned at r; -inf when no shape is feasible.
[[nodiscard]] double weighted_profile_loglik(std::span<const double> sample, double level_q,
                                             double quantile_value, const WeightVector& w);

/// Maximizer of the weighted likelihood. converged is false when fewer than
/// two distinct observations carry positive weight.
[[nodiscard]] FitResult weighted_fit(std::span<const double> sample, double level_q,
                                     const WeightVector& w, const OptimizerConfig& cfg);

/// Bootstrap profile interval {r : l*_p(r) >= l*(max) - gamma c / 2} for one
/// weight vector.
[[nodiscard]] Interval boot_profile_interval(std::span<const double> sample, double level_q,
                                             const WeightScheme& scheme,
                                             const ConfidenceSpec& conf, const WeightVector& w,
                                             const OptimizerConfig& cfg,
                                             Recentering recentering = Recentering::weighted);

/// Averages boot_profile_interval bounds over `replicates` weight draws.
/// Replicate i draws its weights from RandomStream::derive(seed, i), so the
/// result is independent of the thread count. Failed replicates are skipped
/// and counted.
[[nodiscard]] BootIntervalResult boot_interval(std::span<const double> sample, double level_q,
                                               const WeightScheme& scheme,
                                               const ConfidenceSpec& conf, int replicates,
                                               std::uint64_t seed, const OptimizerConfig& cfg,
                                               const BootstrapOptions& opts = {});

}  // namespace potwb
