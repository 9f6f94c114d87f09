#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "potwb/bootstrap.hpp"
#include "potwb/fitter.hpp"
#include "potwb/gpd.hpp"
#include "potwb/rng.hpp"

namespace potwb {

/// GEV-form marginal transform v(x) = (1 + xi (x - mu) / sigma)_+^(-1/xi),
/// exp(-(x - mu) / sigma) at xi = 0; -log of a GEV cdf.
struct Margin {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;

  [[nodiscard]] double v(double x) const;
  /// +inf below the lower limit, -inf above the upper limit.
  [[nodiscard]] double log_v(double x) const;
  /// Inverse of log_v.
  [[nodiscard]] double from_log_v(double log_v) const;
  /// Lower end of the region where v is finite (-inf unless xi > 0).
  [[nodiscard]] double lower_limit() const;
  /// Upper end of the region where v is positive (+inf unless xi < 0).
  [[nodiscard]] double upper_limit() const;
};

/// Bivariate generalized Pareto law for exceedance pairs, built from a
/// bivariate extreme-value distribution G = exp(-l(v1(x1), v2(x2))) with the
/// symmetric logistic exponent l(v1, v2) = (v1^dep + v2^dep)^(1/dep):
///
///   H(x) = log(G(x) / G(x ^ 0)) / -log G(0, 0).
///
/// `dep` = 1/alpha in the common (v^(1/alpha) + ...)^alpha notation: dep = 1
/// is independence and dep -> inf complete dependence.
struct BgpdLogisticModel {
  Margin marg1;
  Margin marg2;
  double dep = 2.0;

  /// Throws DomainError unless dep >= 1, both scales are positive and
  /// 0 < G(0,0) < 1.
  void validate() const;
  /// -log G(0,0) = l(v1(0), v2(0)).
  [[nodiscard]] double exponent_at_origin() const;
};

struct BgpdFitResult {
  BgpdLogisticModel model;
  double loglik = kNegInf;
  bool converged = false;
  bool dep_at_bound = false;  ///< estimate pinned at the dependence search limit
  std::size_t n_used = 0;
  int iterations = 0;
};

using Point2 = std::array<double, 2>;

/// Square grid over a rectangle: cell (i, j) has centre
/// (origin[0] + (i + 0.5) step[0], origin[1] + (j + 0.5) step[1]).
struct GridSpec {
  Point2 origin{0.0, 0.0};
  Point2 step{1.0, 1.0};
  std::array<std::size_t, 2> count{200, 200};

  [[nodiscard]] Point2 centre(std::size_t i, std::size_t j) const;
  [[nodiscard]] double cell_area() const { return step[0] * step[1]; }
};

struct CoverageRegion {
  GridSpec grid;
  std::vector<std::size_t> member_cells;  ///< flat indices i * count[1] + j, by decreasing density
  std::vector<double> cell_density;       ///< density at every cell centre, flat
  double target_mass = 0.0;
  double achieved_mass = 0.0;
  double density_cut = 0.0;  ///< smallest member density

  [[nodiscard]] double area() const { return grid.cell_area() * member_cells.size(); }
};

inline constexpr std::size_t kMinBgpdFitSize = 50;
inline constexpr double kDepMax = 20.0;

[[nodiscard]] double logistic_exponent(double v1, double v2, double dep);

[[nodiscard]] double bgpd_cdf(const BgpdLogisticModel& m, Point2 x);

/// log of the mixed partial of H on {x1 > 0 or x2 > 0}; -inf elsewhere.
[[nodiscard]] double bgpd_logdensity(const BgpdLogisticModel& m, Point2 x);

/// Unconditional marginal cdfs H(x1, inf) and H(inf, x2).
[[nodiscard]] double bgpd_marginal_cdf(const BgpdLogisticModel& m, int coordinate, double x);
[[nodiscard]] double bgpd_marginal_quantile(const BgpdLogisticModel& m, int coordinate, double p);

/// P(X1 > x_q, X2 > y_q) for the marginal q-quantiles x_q, y_q.
[[nodiscard]] double joint_exceedance_prob(const BgpdLogisticModel& m, double q);

/// Grid spanning the marginal 0.001 and 0.9999 quantiles with n x n cells.
[[nodiscard]] GridSpec default_grid(const BgpdLogisticModel& m, std::size_t cells = 200);

/// Smallest set of grid cells, by decreasing density, whose mass reaches
/// target_mass. Throws GridInsufficientError when the grid holds too little
/// mass.
[[nodiscard]] CoverageRegion coverage_region(const BgpdLogisticModel& m, double target_mass,
                                             const GridSpec& grid);

/// Weighted log-likelihood sum w_i log h(x_i); empty weights mean all ones.
[[nodiscard]] double bgpd_loglik(const BgpdLogisticModel& m, std::span<const Point2> pairs,
                                 std::span<const double> weights = {});

/// ML fit over (sigma1, xi1, mu2, sigma2, xi2, dep) with mu1 fixed at 0:
/// scaling both v_j by a common factor leaves H unchanged, so one location
/// is not identified. Pairs with both coordinates <= 0 are dropped first.
/// Shapes are held to xi_j <= dep - 1: past that bound the density is
/// infinite at the lower support edge and the likelihood has no maximum
/// when an observation sits there (dry days give many such ties).
/// Throws UsageError below kMinBgpdFitSize usable pairs.
[[nodiscard]] BgpdFitResult fit_bgpd(std::span<const Point2> pairs, const OptimizerConfig& cfg,
                                     std::span<const double> weights = {});

/// Re-fit under bootstrap weights, started from an existing fit.
[[nodiscard]] BgpdFitResult refit_bgpd(std::span<const Point2> pairs,
                                       std::span<const double> weights,
                                       const BgpdLogisticModel& start, const OptimizerConfig& cfg);

/// Law of X_j given X_j > 0: GPD with scale sigma_j - xi_j mu_j.
[[nodiscard]] GpdParams conditional_margin(const BgpdLogisticModel& m, int coordinate);

/// Exact draws by sequential inversion: X1 from its marginal, then X2 from
/// the conditional cdf dH/dx1 / h1, both available in closed form up to a
/// one-dimensional root for X1 <= 0. Requires dep > 1.
[[nodiscard]] std::vector<Point2> sample_bgpd(const BgpdLogisticModel& m, std::size_t n,
                                              RandomStream& rng);

/// Weighted-bootstrap spread of the dependence estimate: every replicate
/// refits under fresh weights, and the 5% / 95% points are empirical
/// quantiles (linear interpolation) of the replicate estimates.
struct DependenceBootstrap {
  double estimate = 0.0;
  double lower5 = 0.0;
  double mean = 0.0;
  double upper95 = 0.0;
  std::vector<double> replicate_dep;
  int replicates = 0;
  int failures = 0;
};

[[nodiscard]] DependenceBootstrap bootstrap_dependence(std::span<const Point2> pairs,
                                                       const WeightScheme& scheme, int replicates,
                                                       std::uint64_t seed,
                                                       const OptimizerConfig& cfg,
                                                       const BootstrapOptions& opts = {});

}  // namespace potwb
