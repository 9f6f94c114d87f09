#include "potwb/bgpd.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "potwb/errors.hpp"

namespace potwb {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BgpdLogisticModel unit_model(double dep) {
  BgpdLogisticModel m;
  m.marg1 = {0.0, 1.0, 0.0};
  m.marg2 = {0.0, 1.0, 0.0};
  m.dep = dep;
  return m;
}

BgpdLogisticModel skewed_model() {
  BgpdLogisticModel m;
  m.marg1 = {0.0, 4.0, 0.15};
  m.marg2 = {0.5, 6.0, -0.1};
  m.dep = 2.5;
  return m;
}

double mixed_difference_step(const BgpdLogisticModel& m, double x, double y, double h) {
  return (bgpd_cdf(m, {x + h, y + h}) - bgpd_cdf(m, {x + h, y - h}) - bgpd_cdf(m, {x - h, y + h}) +
          bgpd_cdf(m, {x - h, y - h})) /
         (4.0 * h * h);
}

// Richardson-extrapolated central difference, error O(h^4).
double mixed_difference(const BgpdLogisticModel& m, double x, double y, double h) {
  return (4.0 * mixed_difference_step(m, x, y, 0.5 * h) - mixed_difference_step(m, x, y, h)) / 3.0;
}

TEST(LogisticExponent, IndependenceAndDependenceLimits) {
  EXPECT_DOUBLE_EQ(logistic_exponent(0.3, 1.7, 1.0), 2.0);
  EXPECT_NEAR(logistic_exponent(0.8, 0.8, 1e4), 0.8, 1e-4);
  EXPECT_EQ(logistic_exponent(0.8, 0.8, kInf), 0.8);
  EXPECT_EQ(logistic_exponent(0.0, 0.0, 3.0), 0.0);
  EXPECT_THROW((void)logistic_exponent(1.0, 1.0, 0.5), DomainError);
}

TEST(LogisticExponent, BetweenMaxAndSum) {
  RandomStream rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(0.0, 10.0);
    const double b = rng.uniform(0.0, 10.0);
    const double dep = rng.uniform(1.0, 30.0);
    const double l = logistic_exponent(a, b, dep);
    EXPECT_GE(l, std::max(a, b) * (1.0 - 1e-15));
    EXPECT_LE(l, (a + b) * (1.0 + 1e-15));
  }
}

TEST(BgpdModel, ValidationRejectsBadModels) {
  auto m = unit_model(0.9);
  EXPECT_THROW(m.validate(), DomainError);
  m = unit_model(2.0);
  m.marg1.sigma = -1.0;
  EXPECT_THROW(m.validate(), DomainError);
  // Both margins bounded above below zero: no exceedance possible, G(0,0) = 1.
  m = unit_model(2.0);
  m.marg1 = {-3.0, 1.0, -0.5};
  m.marg2 = {-3.0, 1.0, -0.5};
  EXPECT_THROW(m.validate(), DomainError);
  EXPECT_THROW((void)bgpd_cdf(m, {1.0, 1.0}), DomainError);
}

TEST(BgpdCdf, ZeroAtOriginAndOneAtInfinity) {
  for (const auto& m : {unit_model(2.0), skewed_model(), unit_model(1.0)}) {
    EXPECT_EQ(bgpd_cdf(m, {0.0, 0.0}), 0.0);
    EXPECT_EQ(bgpd_cdf(m, {-3.0, -1.0}), 0.0);
    EXPECT_NEAR(bgpd_cdf(m, {kInf, kInf}), 1.0, 1e-15);
    EXPECT_NEAR(bgpd_cdf(m, {1e6, 1e6}), 1.0, 1e-4);
  }
}

TEST(BgpdCdf, MonotoneInEachCoordinate) {
  const auto m = skewed_model();
  const int n = 50;
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = -8.0 + 40.0 * i / (n - 1);
    ys[i] = -8.0 + 40.0 * i / (n - 1);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double h = bgpd_cdf(m, {xs[i], ys[j]});
      ASSERT_GE(h, 0.0);
      ASSERT_LE(h, 1.0);
      if (i > 0) EXPECT_GE(h, bgpd_cdf(m, {xs[i - 1], ys[j]}) - 1e-15);
      if (j > 0) EXPECT_GE(h, bgpd_cdf(m, {xs[i], ys[j - 1]}) - 1e-15);
    }
  }
}

TEST(BgpdLogdensity, MatchesFiniteDifferencesOfCdf) {
  RandomStream rng(2);
  for (const auto& m : {unit_model(2.0), skewed_model()}) {
    int checked = 0;
    while (checked < 100) {
      const double x = rng.uniform(-2.0, 6.0);
      const double y = rng.uniform(-2.0, 6.0);
      // Stay off the kink lines x = 0, y = 0 and off the null quadrant.
      if (std::abs(x) < 0.05 || std::abs(y) < 0.05 || (x < 0.0 && y < 0.0)) continue;
      const double fd = mixed_difference(m, x, y, 1e-3);
      const double h = std::exp(bgpd_logdensity(m, {x, y}));
      EXPECT_NEAR(fd / h, 1.0, 1e-4) << "at (" << x << ", " << y << ")";
      ++checked;
    }
  }
}

TEST(BgpdLogdensity, IntegratesToOneOverTruncatedGrid) {
  for (const auto& m : {unit_model(2.0), skewed_model(), unit_model(1.3)}) {
    const auto g = default_grid(m, 800);
    double total = 0.0;
    for (std::size_t i = 0; i < g.count[0]; ++i) {
      for (std::size_t j = 0; j < g.count[1]; ++j) {
        total += std::exp(bgpd_logdensity(m, g.centre(i, j)));
      }
    }
    EXPECT_NEAR(total * g.cell_area(), 1.0, 1e-2);
  }
}

TEST(BgpdLogdensity, SymmetricForIdenticalMargins) {
  const auto m = unit_model(3.0);
  RandomStream rng(3);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(-3.0, 5.0);
    const double b = rng.uniform(0.0, 5.0);
    EXPECT_NEAR(bgpd_logdensity(m, {a, b}), bgpd_logdensity(m, {b, a}), 1e-10);
  }
}

TEST(BgpdLogdensity, OffSupportIsMinusInfinity) {
  const auto m = skewed_model();
  EXPECT_EQ(bgpd_logdensity(m, {-1.0, -1.0}), -kInf);
  EXPECT_EQ(bgpd_logdensity(m, {0.0, 0.0}), -kInf);
  // Below the lower limit of margin 1 and above the upper limit of margin 2.
  EXPECT_EQ(bgpd_logdensity(m, {m.marg1.lower_limit() - 1.0, 2.0}), -kInf);
  EXPECT_EQ(bgpd_logdensity(m, {2.0, m.marg2.upper_limit() + 1.0}), -kInf);
  // At dep = 1 the exceedance law has no density.
  EXPECT_EQ(bgpd_logdensity(unit_model(1.0), {1.0, 1.0}), -kInf);
}

TEST(BgpdMarginal, QuantileInvertsCdf) {
  for (const auto& m : {unit_model(2.0), skewed_model(), unit_model(1.1)}) {
    for (int c = 0; c < 2; ++c) {
      for (double p : {0.001, 0.05, 0.3, 0.5, 0.9, 0.9999}) {
        const double x = bgpd_marginal_quantile(m, c, p);
        EXPECT_NEAR(bgpd_marginal_cdf(m, c, x), p, 1e-9) << "coordinate " << c << " p " << p;
      }
    }
  }
  EXPECT_THROW((void)bgpd_marginal_quantile(unit_model(2.0), 0, 1.0), DomainError);
}

TEST(BgpdMarginal, DependenceChangesUnconditionalMargins) {
  auto a = skewed_model();
  auto b = a;
  b.dep = a.dep + 0.5;
  EXPECT_GT(std::abs(bgpd_marginal_cdf(a, 0, 3.0) - bgpd_marginal_cdf(b, 0, 3.0)), 1e-4);
}

TEST(BgpdMarginal, ConditionalMarginIsGpd) {
  const auto m = skewed_model();
  const auto gpd = conditional_margin(m, 1);
  const double above = 1.0 - bgpd_marginal_cdf(m, 1, 0.0);
  for (double z : {0.5, 2.0, 10.0, 30.0}) {
    const double cond = (bgpd_marginal_cdf(m, 1, z) - bgpd_marginal_cdf(m, 1, 0.0)) / above;
    EXPECT_NEAR(cond, gpd_cdf(gpd, z), 1e-12);
  }
}

TEST(SampleBgpd, EmpiricalCdfMatchesModel) {
  for (const auto& m : {unit_model(2.0), skewed_model()}) {
    RandomStream rng(4);
    const std::size_t n = 50000;
    const auto pts = sample_bgpd(m, n, rng);
    for (const auto& p : pts) ASSERT_TRUE(p[0] > 0.0 || p[1] > 0.0);
    for (double x : {-1.0, 0.5, 2.0, 5.0}) {
      for (double y : {-1.0, 0.5, 2.0, 5.0, kInf}) {
        const auto below = std::count_if(pts.begin(), pts.end(), [&](const Point2& p) {
          return p[0] <= x && p[1] <= y;
        });
        EXPECT_NEAR(static_cast<double>(below) / n, bgpd_cdf(m, {x, y}), 0.008)
            << "at (" << x << ", " << y << ")";
      }
    }
  }
}

TEST(SampleBgpd, ExceedancesOfOneMarginLookGpd) {
  const auto m = skewed_model();
  RandomStream rng(5);
  const auto pts = sample_bgpd(m, 5000, rng);
  std::vector<double> pos;
  for (const auto& p : pts) {
    if (p[0] > 0.0) pos.push_back(p[0]);
  }
  const auto fit = fit_gpd(pos, {});
  std::sort(pos.begin(), pos.end());
  const auto k = static_cast<double>(pos.size());
  std::vector<double> theo(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    theo[i] = gpd_quantile(fit.params, (static_cast<double>(i) + 0.5) / k);
  }
  const double mx = std::accumulate(pos.begin(), pos.end(), 0.0) / k;
  const double my = std::accumulate(theo.begin(), theo.end(), 0.0) / k;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    sxy += (pos[i] - mx) * (theo[i] - my);
    sxx += (pos[i] - mx) * (pos[i] - mx);
    syy += (theo[i] - my) * (theo[i] - my);
  }
  EXPECT_GE(sxy / std::sqrt(sxx * syy), 0.99);
}

TEST(SampleBgpd, NeedsDependenceAboveOne) {
  RandomStream rng(6);
  EXPECT_THROW((void)sample_bgpd(unit_model(1.0), 10, rng), DomainError);
}

// Closed form for x, y > 0: (v1 + v2 - l(v1, v2)) / l(v1(0), v2(0)).
double joint_exceedance_oracle(const BgpdLogisticModel& m, double q) {
  const auto quantile = [&](const Margin& mg) {
    const double scale = mg.sigma - mg.xi * mg.mu;
    return std::abs(mg.xi) < 1e-12 ? -scale * std::log1p(-q)
                                   : scale * (std::pow(1.0 - q, -mg.xi) - 1.0) / mg.xi;
  };
  const auto v = [](const Margin& mg, double x) {
    const double z = (x - mg.mu) / mg.sigma;
    return std::abs(mg.xi) < 1e-12 ? std::exp(-z) : std::pow(1.0 + mg.xi * z, -1.0 / mg.xi);
  };
  const auto l = [&](double a, double b) {
    return std::pow(std::pow(a, m.dep) + std::pow(b, m.dep), 1.0 / m.dep);
  };
  const double v1 = v(m.marg1, quantile(m.marg1));
  const double v2 = v(m.marg2, quantile(m.marg2));
  return (v1 + v2 - l(v1, v2)) / l(v(m.marg1, 0.0), v(m.marg2, 0.0));
}

TEST(JointExceedance, MatchesClosedForm) {
  for (double dep : {1.2, 2.0, 4.0}) {
    auto m = skewed_model();
    m.dep = dep;
    for (double q : {0.5, 0.9, 0.99}) {
      EXPECT_NEAR(joint_exceedance_prob(m, q), joint_exceedance_oracle(m, q), 1e-10);
    }
  }
}

TEST(JointExceedance, StrictlyIncreasingInDependence) {
  auto m = skewed_model();
  double last = -1.0;
  for (int k = 0; k <= 40; ++k) {
    m.dep = 1.0 + 0.1 * k;
    const double p = joint_exceedance_prob(m, 0.9);
    EXPECT_GT(p, last) << "dep " << m.dep;
    last = p;
  }
}

TEST(JointExceedance, IndependenceLeavesNoJointMass) {
  // With dep = 1 every point of the exceedance law has one coordinate at its
  // lower support limit.
  EXPECT_NEAR(joint_exceedance_prob(unit_model(1.0), 0.9), 0.0, 1e-15);
  EXPECT_THROW((void)joint_exceedance_prob(unit_model(2.0), 1.0), DomainError);
}

// Smallest number of cells whose mass reaches the target, over every cut
// value c of the region {density >= c}; ties at the cut enter one at a time.
std::size_t brute_force_cell_count(const std::vector<double>& density, double area, double target) {
  std::set<double> cuts(density.begin(), density.end());
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (double c : cuts) {
    if (!(c > 0.0)) continue;
    double above = 0.0;
    std::size_t count_above = 0;
    std::size_t ties = 0;
    for (double d : density) {
      if (d > c) {
        above += d * area;
        ++count_above;
      } else if (d == c) {
        ++ties;
      }
    }
    for (std::size_t t = 0; t <= ties; ++t) {
      if (above + static_cast<double>(t) * c * area >= target * (1.0 - 1e-12)) {
        best = std::min(best, count_above + t);
        break;
      }
    }
  }
  return best;
}

TEST(CoverageRegion, GreedyMatchesBruteForceOnSmallGrid) {
  for (const auto& m : {unit_model(2.0), skewed_model()}) {
    const auto grid = default_grid(m, 40);
    for (double target : {0.5, 0.8, 0.9}) {
      const auto region = coverage_region(m, target, grid);
      EXPECT_EQ(region.member_cells.size(),
                brute_force_cell_count(region.cell_density, grid.cell_area(), target));
      double max_cell = 0.0;
      for (double d : region.cell_density) max_cell = std::max(max_cell, d * grid.cell_area());
      EXPECT_GE(region.achieved_mass, target);
      EXPECT_LE(region.achieved_mass - target, max_cell);
    }
  }
}

TEST(CoverageRegion, IsASuperlevelSet) {
  const auto m = skewed_model();
  const auto region = coverage_region(m, 0.9, default_grid(m, 100));
  std::vector<bool> member(region.cell_density.size(), false);
  for (auto c : region.member_cells) member[c] = true;
  double min_in = kInf, max_out = 0.0;
  for (std::size_t c = 0; c < member.size(); ++c) {
    if (member[c]) {
      min_in = std::min(min_in, region.cell_density[c]);
    } else {
      max_out = std::max(max_out, region.cell_density[c]);
    }
  }
  EXPECT_GE(min_in, max_out);
  EXPECT_EQ(min_in, region.density_cut);
}

TEST(CoverageRegion, SymmetricForIdenticalMargins) {
  const auto m = unit_model(1.05);
  const auto grid = default_grid(m, 60);
  ASSERT_EQ(grid.origin[0], grid.origin[1]);
  const auto region = coverage_region(m, 0.9, grid);
  std::set<std::size_t> cells(region.member_cells.begin(), region.member_cells.end());
  const std::size_t n = grid.count[0];
  std::size_t asymmetric = 0;
  for (auto c : cells) {
    const std::size_t i = c / n, j = c % n;
    if (!cells.count(j * n + i)) ++asymmetric;
  }
  // Only a tie at the density cut can break the symmetry, one cell per pair.
  EXPECT_LE(asymmetric, 1u);
}

TEST(CoverageRegion, StrongerDependenceConcentratesMass) {
  auto weak = skewed_model();
  weak.dep = 1.2;
  auto strong = skewed_model();
  strong.dep = 4.0;
  const auto gw = default_grid(weak, 300);
  const auto gs = default_grid(strong, 300);
  GridSpec grid;
  for (std::size_t c = 0; c < 2; ++c) {
    const double lo = std::min(gw.origin[c], gs.origin[c]);
    const double hi = std::max(gw.origin[c] + 300 * gw.step[c], gs.origin[c] + 300 * gs.step[c]);
    grid.origin[c] = lo;
    grid.step[c] = (hi - lo) / 600.0;
    grid.count[c] = 600;
  }
  EXPECT_LE(coverage_region(strong, 0.9, grid).area(), coverage_region(weak, 0.9, grid).area());
}

TEST(CoverageRegion, TooSmallGridThrowsWithAchievedMass) {
  const auto m = unit_model(2.0);
  GridSpec g;
  g.origin = {0.0, 0.0};
  g.step = {0.05, 0.05};
  g.count = {20, 20};
  try {
    (void)coverage_region(m, 0.9, g);
    FAIL() << "expected GridInsufficientError";
  } catch (const GridInsufficientError& e) {
    EXPECT_GT(e.achieved_mass(), 0.0);
    EXPECT_LT(e.achieved_mass(), 0.9);
  }
}

TEST(FitBgpd, RecoversDependence) {
  RandomStream rng(7);
  const auto pts = sample_bgpd(unit_model(2.0), 2000, rng);
  const auto fit = fit_bgpd(pts, {});
  EXPECT_TRUE(fit.converged);
  EXPECT_EQ(fit.n_used, 2000u);
  EXPECT_GE(fit.model.dep, 1.8);
  EXPECT_LE(fit.model.dep, 2.2);
  EXPECT_NEAR(fit.model.marg1.sigma, 1.0, 0.1);
  EXPECT_NEAR(fit.loglik, bgpd_loglik(fit.model, pts), 1e-6);
  EXPECT_GE(fit.loglik, bgpd_loglik(unit_model(2.0), pts));
}

TEST(FitBgpd, DropsNullQuadrantAndChecksSize) {
  std::vector<Point2> pts(60, Point2{-1.0, -1.0});
  EXPECT_THROW((void)fit_bgpd(pts, {}), UsageError);
  pts[0] = {kInf, 1.0};
  EXPECT_THROW((void)fit_bgpd(pts, {}), DomainError);
}

TEST(FitBgpd, IdenticalCoordinatesPinDependenceAtBound) {
  RandomStream rng(8);
  std::vector<Point2> pts;
  for (int i = 0; i < 200; ++i) {
    const double x = -2.0 * std::log(rng.uniform()) - 0.5;
    pts.push_back({x, x});
  }
  const auto fit = fit_bgpd(pts, {});
  EXPECT_TRUE(fit.dep_at_bound);
}

TEST(BgpdLoglik, MultinomialWeightsEqualResampledPairs) {
  const auto m = skewed_model();
  RandomStream rng(9);
  const auto pts = sample_bgpd(m, 100, rng);
  const auto w = draw_weights(WeightScheme::multinomial(), pts.size(), rng);
  std::vector<Point2> resampled;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int k = 0; k < static_cast<int>(w.weights[i]); ++k) resampled.push_back(pts[i]);
  }
  const double expected = bgpd_loglik(m, resampled);
  EXPECT_NEAR(bgpd_loglik(m, pts, w.weights), expected, 1e-10 * std::abs(expected));
}

TEST(RefitBgpd, UnitWeightsStayAtMaximum) {
  RandomStream rng(10);
  const auto pts = sample_bgpd(skewed_model(), 500, rng);
  const auto fit = fit_bgpd(pts, {});
  const auto again = refit_bgpd(pts, std::vector<double>(pts.size(), 1.0), fit.model, {});
  EXPECT_NEAR(again.loglik, fit.loglik, 1e-6);
  EXPECT_NEAR(again.model.dep, fit.model.dep, 1e-3);
}

TEST(BootstrapDependence, BoundsOrderedAndThreadIndependent) {
  RandomStream rng(11);
  const auto pts = sample_bgpd(unit_model(2.0), 300, rng);
  BootstrapOptions serial, parallel;
  serial.threads = 1;
  parallel.threads = 3;
  const auto a = bootstrap_dependence(pts, WeightScheme::exponential(), 12, 5, {}, serial);
  const auto b = bootstrap_dependence(pts, WeightScheme::exponential(), 12, 5, {}, parallel);
  EXPECT_EQ(a.replicate_dep, b.replicate_dep);
  EXPECT_LE(a.lower5, a.mean);
  EXPECT_LE(a.mean, a.upper95);
  EXPECT_EQ(a.replicates, 12);
}

}  // namespace
}  // namespace potwb
