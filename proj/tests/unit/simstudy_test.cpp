#include "potwb/simstudy.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "potwb/errors.hpp"

namespace potwb {
namespace {

double gpd_cdf_oracle(double sigma, double xi, double x) {
  return std::abs(xi) < 1e-12 ? -std::expm1(-x / sigma) : 1.0 - std::pow(1.0 + xi * x / sigma, -1.0 / xi);
}

// Two-sided Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

constexpr double kKsCritical1pct = 1.628;  // asymptotic, times 1/sqrt(n)

TEST(SimulateMixture, PureComponentsPassKs) {
  SimScenario sc;
  sc.n = 10000;
  for (double w : {1.0, 0.0}) {
    sc.mixture_weight_w = w;
    RandomStream rng(1);
    const auto xs = simulate_mixture(sc, rng);
    const double sigma = w == 1.0 ? 9.0 : 13.0;
    const double xi = w == 1.0 ? 0.05 : 0.15;
    EXPECT_LT(ks_statistic(xs, [&](double x) { return gpd_cdf_oracle(sigma, xi, x); }),
              kKsCritical1pct / std::sqrt(10000.0));
  }
}

TEST(SimulateMixture, DegenerateMixtureIsPureGpd) {
  SimScenario sc;
  sc.n = 10000;
  sc.mixture_weight_w = 0.5;
  sc.comp2 = sc.comp1;
  RandomStream rng(2);
  const auto xs = simulate_mixture(sc, rng);
  EXPECT_LT(ks_statistic(xs, [](double x) { return gpd_cdf_oracle(9.0, 0.05, x); }),
            kKsCritical1pct / 100.0);
}

TEST(SimulateMixture, MatchesMixtureCdf) {
  SimScenario sc;
  sc.n = 10000;
  sc.mixture_weight_w = 0.3;
  RandomStream rng(3);
  const auto xs = simulate_mixture(sc, rng);
  const auto mix = [](double x) {
    return 0.3 * gpd_cdf_oracle(9.0, 0.05, x) + 0.7 * gpd_cdf_oracle(13.0, 0.15, x);
  };
  EXPECT_LT(ks_statistic(xs, mix), kKsCritical1pct / 100.0);
  // Against the heavier component alone the sample is clearly rejected.
  EXPECT_GT(ks_statistic(xs, [](double x) { return gpd_cdf_oracle(13.0, 0.15, x); }),
            kKsCritical1pct / 100.0);
}

TEST(MixtureQuantile, InvertsCdf) {
  SimScenario sc;
  sc.mixture_weight_w = 1.0;
  const double q = sc.level_q();
  EXPECT_DOUBLE_EQ(q, 1.0 - 1.0 / 400.0);
  const double closed = 9.0 / 0.05 * (std::pow(1.0 - q, -0.05) - 1.0);
  EXPECT_NEAR(mixture_quantile(sc, q), closed, 1e-8 * closed);
  sc.mixture_weight_w = 0.5;
  for (double p : {0.1, 0.9, 0.9975, 0.99999}) {
    const double x = mixture_quantile(sc, p);
    EXPECT_NEAR(0.5 * gpd_cdf_oracle(9.0, 0.05, x) + 0.5 * gpd_cdf_oracle(13.0, 0.15, x), p, 1e-11);
  }
  EXPECT_THROW((void)mixture_quantile(sc, 1.0), DomainError);
}

TEST(MixtureQuantile, BoundedComponentSaturates) {
  SimScenario sc;
  sc.mixture_weight_w = 0.5;
  sc.comp1 = GpdParams(6.0, -0.1);  // upper endpoint 60
  sc.comp2 = GpdParams(14.0, 0.2);
  EXPECT_DOUBLE_EQ(mixture_cdf(sc, 75.0), 0.5 + 0.5 * gpd_cdf_oracle(14.0, 0.2, 75.0));
  EXPECT_DOUBLE_EQ(mixture_cdf(sc, -1.0), 0.0);
  const double x = mixture_quantile(sc, 0.9975);
  EXPECT_GT(x, 60.0);
  EXPECT_NEAR(0.5 + 0.5 * gpd_cdf_oracle(14.0, 0.2, x), 0.9975, 1e-11);
}

TEST(RunScenario, SingleReplicationIsAllOrNothing) {
  SimScenario sc;
  sc.replications = 1;
  sc.boot_replicates = 20;
  sc.n = 100;
  const auto res = run_scenario(sc);
  ASSERT_EQ(res.methods.size(), 3u);
  for (const auto& m : res.methods) {
    EXPECT_TRUE(m.coverage_pct == 0.0 || m.coverage_pct == 100.0) << m.method;
  }
}

TEST(RunScenario, IndependentOfThreadCount) {
  SimScenario sc;
  sc.replications = 6;
  sc.boot_replicates = 15;
  sc.n = 80;
  sc.mixture_weight_w = 0.5;
  sc.threads = 1;
  const auto a = run_scenario(sc);
  sc.threads = 3;
  const auto b = run_scenario(sc);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(a.methods[k].coverage_pct, b.methods[k].coverage_pct);
    EXPECT_EQ(a.methods[k].mean_width, b.methods[k].mean_width);
  }
}

TEST(RunScenario, ValidatesScenario) {
  SimScenario sc;
  sc.mixture_weight_w = 1.5;
  EXPECT_THROW((void)run_scenario(sc), DomainError);
  sc = SimScenario{};
  sc.replications = 0;
  EXPECT_THROW((void)run_scenario(sc), UsageError);
}

TEST(Scenarios, ReferenceRows) {
  const auto rows = reference_scenarios();
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[3].n, 200);
  EXPECT_EQ(rows[3].mixture_weight_w, 0.5);
  EXPECT_EQ(rows[5].mixture_weight_w, 0.8);
  for (const auto& r : rows) {
    EXPECT_EQ(r.replications, 100);
    EXPECT_EQ(r.boot_replicates, 500);
  }
}

TEST(Scenarios, JsonWithDefaults) {
  const auto sc = parse_scenarios(
      R"({"scenarios":[{"name":"a","n":120,"w":0.25,"comp2":{"sigma":20}},{"replications":7}]})");
  ASSERT_EQ(sc.size(), 2u);
  EXPECT_EQ(sc[0].n, 120);
  EXPECT_EQ(sc[0].comp2.sigma(), 20.0);
  EXPECT_EQ(sc[0].comp2.xi(), 0.15);
  EXPECT_EQ(sc[1].replications, 7);
  EXPECT_EQ(parse_scenarios(R"([{"n":50}])").at(0).n, 50);
  EXPECT_THROW((void)parse_scenarios("{"), FormatError);
  EXPECT_THROW((void)parse_scenarios(R"([{"n":"many"}])"), FormatError);
  EXPECT_THROW((void)parse_scenarios(R"([{"w":2}])"), DomainError);
}

TEST(Scenarios, ResultsCsvHasRowPerMethod) {
  SimScenario sc;
  sc.name = "a,b";
  SimResult r;
  r.replications = 10;
  r.methods = {{"profile", 90.0, 1.5, 0}, {"boot-exp", 100.0, 2.5, 1}};
  const auto csv = format_results_csv({sc}, {r});
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(csv.find("\"a,b\",200,1,boot-exp,100,2.5,1,10"), std::string::npos);
}

}  // namespace
}  // namespace potwb
