#pragma once

#include <cstddef>
#include <limits>
#include <span>

namespace potwb {

/// Shapes with |xi| below this are evaluated with the exponential formulas.
inline constexpr double kXiZeroTol = 1e-8;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Generalized Pareto distribution of threshold excesses.
///
/// H(z) = 1 - (1 + xi z / sigma)^(-1/xi), or 1 - exp(-z / sigma) when xi = 0.
/// Support is [0, inf) for xi >= 0 and [0, -sigma/xi] for xi < 0.
class GpdParams {
 public:
  /// Throws DomainError unless sigma is finite and positive and xi is finite.
  GpdParams(double sigma, double xi);

  [[nodiscard]] double sigma() const { return sigma_; }
  [[nodiscard]] double xi() const { return xi_; }

  /// Right end of the support; +inf when xi >= 0.
  [[nodiscard]] double upper_endpoint() const;

  friend bool operator==(const GpdParams&, const GpdParams&) = default;

 private:
  double sigma_;
  double xi_;
};

/// Return period m in years, observed record length l in years, and the
/// number n of threshold exceedances observed in those l years.
struct ReturnSpec {
  double return_period_years;
  double record_years;
  std::size_t exceedance_count;
};

/// Level q = 1 - (1/m)(l/n) of the excess distribution whose quantile is the
/// m-year return level. Throws DomainError unless 0 < q < 1.
[[nodiscard]] double quantile_level(const ReturnSpec& spec);

/// Alternative parameterization of a GPD by its shape and the excess
/// quantile at a fixed level.
struct QuantileParam {
  double xi;
  double level_q;
  double quantile_value;
};

/// Scale implied by (xi, H^-1(q)): xi H^-1(q) / ((1-q)^(-xi) - 1), with the
/// exponential limit H^-1(q) / -log(1-q) near xi = 0. Throws DomainError when
/// the level is outside (0,1) or the implied scale is not positive.
[[nodiscard]] double implied_sigma(const QuantileParam& p);

[[nodiscard]] GpdParams to_gpd(const QuantileParam& p);
[[nodiscard]] QuantileParam to_quantile_param(const GpdParams& p, double level_q);

/// Throws DomainError for z < 0 or z beyond the upper endpoint.
[[nodiscard]] double gpd_cdf(const GpdParams& p, double z);

/// Exact inverse of gpd_cdf. Throws DomainError unless 0 < q < 1.
[[nodiscard]] double gpd_quantile(const GpdParams& p, double q);

/// log h(z); -inf outside the support. At the upper endpoint of a bounded
/// support the density formula itself is used.
[[nodiscard]] double gpd_logdensity(const GpdParams& p, double z);

/// Sum of log densities. Throws UsageError for an empty sample.
[[nodiscard]] double loglik(const GpdParams& p, std::span<const double> sample);

/// Sum of w_i log h(x_i). Zero-weight points are skipped, so they may lie off
/// the support. Sizes must match (UsageError).
[[nodiscard]] double loglik(const GpdParams& p, std::span<const double> sample,
                            std::span<const double> weights);

/// loglik evaluated through implied_sigma.
[[nodiscard]] double loglik_qparam(const QuantileParam& p,
                                   std::span<const double> sample);

namespace detail {

// Unchecked kernels shared by the optimizers. weights may be empty (all ones).
double loglik_kernel(double sigma, double xi, std::span<const double> sample,
                     std::span<const double> weights);

// implied_sigma without validation; returns NaN or a non-positive value when
// the parameters are infeasible.
double implied_sigma_unchecked(double xi, double level_q, double quantile_value);

}  // namespace detail

}  // namespace potwb
