#include "potwb/bgpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "potwb/errors.hpp"
#include "potwb/parallel.hpp"
#include "potwb/simplex.hpp"

namespace potwb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log l(exp(a), exp(b)).
double log_exponent(double a, double b, double dep) {
  if (a == kInf || b == kInf) return kInf;
  return log_sum_exp(dep * a, dep * b) / dep;
}

// Model quantities shared by every density evaluation.
struct Prepared {
  const BgpdLogisticModel& m;
  double log_l0;
  double log_dep_minus_one;

  explicit Prepared(const BgpdLogisticModel& model)
      : m(model),
        log_l0(log_exponent(model.marg1.log_v(0.0), model.marg2.log_v(0.0), model.dep)),
        log_dep_minus_one(std::log(model.dep - 1.0)) {}

  [[nodiscard]] double logdensity(double x1, double x2) const {
    if (!(x1 > 0.0 || x2 > 0.0)) return kNegInf;
    const double lv1 = m.marg1.log_v(x1);
    const double lv2 = m.marg2.log_v(x2);
    if (!std::isfinite(lv1) || !std::isfinite(lv2)) return kNegInf;
    const double r = m.dep;
    const double log_s = log_sum_exp(r * lv1, r * lv2);
    return log_dep_minus_one + (r - 1.0) * (lv1 + lv2) + (1.0 / r - 2.0) * log_s +
           (1.0 + m.marg1.xi) * lv1 - std::log(m.marg1.sigma) + (1.0 + m.marg2.xi) * lv2 -
           std::log(m.marg2.sigma) - log_l0;
  }
};

const Margin& margin(const BgpdLogisticModel& m, int coordinate) {
  if (coordinate == 0) return m.marg1;
  if (coordinate == 1) return m.marg2;
  throw UsageError("coordinate must be 0 or 1");
}

// log of l(v, w) - v for v, w > 0, as a function of a = log v, b = log w.
double log_excess_over_first(double a, double b, double dep) {
  if (a == kNegInf) return b;
  const double ratio = std::exp(dep * (b - a));
  const double rel = std::expm1(std::log1p(ratio) / dep);
  return a + std::log(rel);
}

// d l / d v1 at (v1, v2) = (1 + (v2/v1)^dep)^(1/dep - 1).
double partial_first(double a, double b, double dep) {
  return std::exp((1.0 / dep - 1.0) * std::log1p(std::exp(dep * (b - a))));
}

// Solves partial_first(a, b, dep) = g for b, given g in (0, 1).
double invert_partial_first(double a, double g, double dep) {
  // (1 + t^dep) = g^(dep / (1 - dep)), t = v2 / v1.
  const double log_base = std::log(g) * dep / (1.0 - dep);
  return a + std::log(std::expm1(log_base)) / dep;
}

}  // namespace

double Margin::log_v(double x) const {
  const double z = (x - mu) / sigma;
  if (std::abs(xi) < kXiZeroTol) return -z;
  const double t = xi * z;
  if (!(t > -1.0)) {
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    return xi > 0.0 ? kInf : kNegInf;
  }
  return -std::log1p(t) / xi;
}

double Margin::v(double x) const { return std::exp(log_v(x)); }

double Margin::from_log_v(double lv) const {
  if (std::abs(xi) < kXiZeroTol) return mu - sigma * lv;
  return mu + sigma * std::expm1(-xi * lv) / xi;
}

double Margin::lower_limit() const { return xi > kXiZeroTol ? mu - sigma / xi : kNegInf; }
double Margin::upper_limit() const { return xi < -kXiZeroTol ? mu - sigma / xi : kInf; }

void BgpdLogisticModel::validate() const {
  for (const Margin* mg : {&marg1, &marg2}) {
    if (!std::isfinite(mg->mu) || !std::isfinite(mg->xi)) {
      throw DomainError("BGPD margin parameters must be finite");
    }
    if (!(mg->sigma > 0.0) || !std::isfinite(mg->sigma)) {
      throw DomainError("BGPD margin scale must be positive");
    }
  }
  if (!(dep >= 1.0) || !std::isfinite(dep)) throw DomainError("dependence parameter must be >= 1");
  const double e = exponent_at_origin();
  if (!(e > 0.0) || !std::isfinite(e)) {
    throw DomainError("BGPD model needs 0 < G(0,0) < 1");
  }
}

double BgpdLogisticModel::exponent_at_origin() const {
  return std::exp(log_exponent(marg1.log_v(0.0), marg2.log_v(0.0), dep));
}

Point2 GridSpec::centre(std::size_t i, std::size_t j) const {
  return {origin[0] + (static_cast<double>(i) + 0.5) * step[0],
          origin[1] + (static_cast<double>(j) + 0.5) * step[1]};
}

double logistic_exponent(double v1, double v2, double dep) {
  if (!(dep >= 1.0)) throw DomainError("dependence parameter must be >= 1");
  if (!(v1 >= 0.0) || !(v2 >= 0.0)) throw DomainError("exponent arguments must be nonnegative");
  if (std::isinf(v1) || std::isinf(v2)) return kInf;
  const double hi = std::max(v1, v2);
  if (hi == 0.0) return 0.0;
  if (std::isinf(dep)) return hi;
  const double lo = std::min(v1, v2);
  return hi * std::exp(std::log1p(std::pow(lo / hi, dep)) / dep);
}

double bgpd_cdf(const BgpdLogisticModel& m, Point2 x) {
  m.validate();
  if (std::isnan(x[0]) || std::isnan(x[1])) throw DomainError("BGPD cdf argument is NaN");
  if (x[0] <= 0.0 && x[1] <= 0.0) return 0.0;
  const double lv1 = m.marg1.log_v(x[0]);
  const double lv2 = m.marg2.log_v(x[1]);
  // Below a lower support limit the law puts no mass (dep > 1) and l is infinite.
  if (lv1 == kInf || lv2 == kInf) return 0.0;
  const double l0 = m.exponent_at_origin();
  double h;
  if (x[0] > 0.0 && x[1] > 0.0) {
    h = (l0 - std::exp(log_exponent(lv1, lv2, m.dep))) / l0;
  } else {
    // One coordinate at or below zero, where v is large: subtract l - v for
    // the shared v rather than l itself.
    const bool first_low = x[0] <= 0.0;
    const double low = first_low ? lv1 : lv2;
    const double high = first_low ? lv2 : lv1;
    const double high0 = first_low ? m.marg2.log_v(0.0) : m.marg1.log_v(0.0);
    const double corner = high0 == kNegInf ? 0.0 : std::exp(log_excess_over_first(low, high0, m.dep));
    const double at_x = high == kNegInf ? 0.0 : std::exp(log_excess_over_first(low, high, m.dep));
    h = (corner - at_x) / l0;
  }
  return std::clamp(h, 0.0, 1.0);
}

double bgpd_logdensity(const BgpdLogisticModel& m, Point2 x) {
  m.validate();
  if (m.dep == 1.0) return kNegInf;
  return Prepared(m).logdensity(x[0], x[1]);
}

double bgpd_marginal_cdf(const BgpdLogisticModel& m, int coordinate, double x) {
  Point2 p{kInf, kInf};
  p[static_cast<std::size_t>(coordinate)] = x;
  (void)margin(m, coordinate);
  return bgpd_cdf(m, p);
}

double bgpd_marginal_quantile(const BgpdLogisticModel& m, int coordinate, double p) {
  m.validate();
  if (!(p > 0.0 && p < 1.0)) throw DomainError("marginal quantile level must lie in (0, 1)");
  const Margin& own = margin(m, coordinate);
  const Margin& other = margin(m, 1 - coordinate);
  const double a0 = own.log_v(0.0);
  const double b0 = other.log_v(0.0);
  const double log_l0 = log_exponent(a0, b0, m.dep);
  // Upper part: 1 - H_j(x) = v_j(x) / l0 for x > 0.
  const double log_tail = std::log1p(-p) + log_l0;
  if (log_tail <= a0) return own.from_log_v(log_tail);
  if (b0 == kNegInf) return own.from_log_v(a0);
  // Lower part: H_j(x) = (l(v_j(x), v_other(0)) - v_j(x)) / l0, decreasing in
  // log v_j from (l0 - v_j(0)) / l0 towards 0 (dep > 1) or v_other(0) / l0.
  const double target = std::log(p) + log_l0;
  double lo = a0;
  double hi = a0 + 1.0;
  while (log_excess_over_first(hi, b0, m.dep) > target) {
    hi = a0 + 2.0 * (hi - a0);
    if (hi > 700.0) {
      return own.lower_limit();
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_excess_over_first(mid, b0, m.dep) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return own.from_log_v(0.5 * (lo + hi));
}

GpdParams conditional_margin(const BgpdLogisticModel& m, int coordinate) {
  m.validate();
  const Margin& mg = margin(m, coordinate);
  const double scale = mg.sigma - mg.xi * mg.mu;
  if (!(scale > 0.0)) throw DomainError("margin has no mass above the threshold");
  return GpdParams(scale, mg.xi);
}

double joint_exceedance_prob(const BgpdLogisticModel& m, double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("joint exceedance level must lie in (0, 1)");
  const double xq = gpd_quantile(conditional_margin(m, 0), q);
  const double yq = gpd_quantile(conditional_margin(m, 1), q);
  if (!std::isfinite(xq) || !std::isfinite(yq)) {
    throw DomainError("marginal quantile outside the model support");
  }
  const double p = 1.0 - bgpd_cdf(m, {xq, kInf}) - bgpd_cdf(m, {kInf, yq}) + bgpd_cdf(m, {xq, yq});
  return std::max(p, 0.0);
}

GridSpec default_grid(const BgpdLogisticModel& m, std::size_t cells) {
  if (cells == 0) throw UsageError("grid needs at least one cell per axis");
  GridSpec g;
  for (int c = 0; c < 2; ++c) {
    const double lo = bgpd_marginal_quantile(m, c, 0.001);
    const double hi = bgpd_marginal_quantile(m, c, 0.9999);
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
      throw DomainError("cannot build a finite grid for this model");
    }
    const auto k = static_cast<std::size_t>(c);
    g.origin[k] = lo;
    g.step[k] = (hi - lo) / static_cast<double>(cells);
    g.count[k] = cells;
  }
  return g;
}

CoverageRegion coverage_region(const BgpdLogisticModel& m, double target_mass,
                               const GridSpec& grid) {
  m.validate();
  if (!(target_mass > 0.0 && target_mass < 1.0)) {
    throw DomainError("target mass must lie in (0, 1)");
  }
  if (grid.count[0] == 0 || grid.count[1] == 0 || !(grid.step[0] > 0.0) || !(grid.step[1] > 0.0)) {
    throw UsageError("grid needs positive cell counts and sizes");
  }
  CoverageRegion region;
  region.grid = grid;
  region.target_mass = target_mass;
  const std::size_t total = grid.count[0] * grid.count[1];
  region.cell_density.assign(total, 0.0);
  if (m.dep > 1.0) {
    const Prepared prep(m);
    for (std::size_t i = 0; i < grid.count[0]; ++i) {
      for (std::size_t j = 0; j < grid.count[1]; ++j) {
        const auto c = grid.centre(i, j);
        region.cell_density[i * grid.count[1] + j] = std::exp(prep.logdensity(c[0], c[1]));
      }
    }
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& d = region.cell_density;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });

  const double area = grid.cell_area();
  CompensatedSum mass;
  for (std::size_t idx : order) {
    if (!(d[idx] > 0.0)) break;
    mass.add(d[idx] * area);
    region.member_cells.push_back(idx);
    region.density_cut = d[idx];
    if (mass.value() >= target_mass) {
      region.achieved_mass = mass.value();
      return region;
    }
  }
  throw GridInsufficientError("grid holds mass " + std::to_string(mass.value()) +
                                  ", below the target " + std::to_string(target_mass),
                              mass.value());
}

double bgpd_loglik(const BgpdLogisticModel& m, std::span<const Point2> pairs,
                   std::span<const double> weights) {
  m.validate();
  if (!weights.empty() && weights.size() != pairs.size()) {
    throw UsageError("weights and pairs differ in length");
  }
  if (m.dep == 1.0) return kNegInf;
  const Prepared prep(m);
  CompensatedSum sum;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w == 0.0) continue;
    const double lh = prep.logdensity(pairs[i][0], pairs[i][1]);
    if (lh == kNegInf) return kNegInf;
    sum.add(w * lh);
  }
  return sum.value();
}

namespace {

// Free parameters: (log sigma1, eta1, mu2, log sigma2, eta2, log(dep - 1)),
// with xi_j = kXiMin + (xi_cap - kXiMin) sin^2(eta_j) and
// xi_cap = min(kXiMax, dep - 1). Beyond xi = dep - 1 the density is infinite
// at the lower support edge, so the cap keeps the likelihood bounded. The
// sine map reaches the cap at a finite eta with zero slope, so a binding cap
// is an ordinary stationary point for the simplex.
constexpr std::size_t kDim = 6;

double xi_cap(double dep) { return std::min(kXiMax, dep - 1.0); }

double shape_from_eta(double eta, double dep) {
  const double s = std::sin(eta);
  return kXiMin + (xi_cap(dep) - kXiMin) * s * s;
}

double eta_from_shape(double xi, double dep) {
  const double f = std::clamp((xi - kXiMin) / (xi_cap(dep) - kXiMin), 0.0, 1.0);
  return std::asin(std::sqrt(f));
}

BgpdLogisticModel unpack(std::span<const double> t) {
  BgpdLogisticModel m;
  m.dep = 1.0 + std::exp(t[5]);
  m.marg1 = {0.0, std::exp(t[0]), shape_from_eta(t[1], m.dep)};
  m.marg2 = {t[2], std::exp(t[3]), shape_from_eta(t[4], m.dep)};
  return m;
}

std::vector<double> pack(const BgpdLogisticModel& m) {
  return {std::log(m.marg1.sigma),  eta_from_shape(m.marg1.xi, m.dep), m.marg2.mu,
          std::log(m.marg2.sigma),  eta_from_shape(m.marg2.xi, m.dep), std::log(m.dep - 1.0)};
}

struct UsablePairs {
  std::vector<Point2> pairs;
  std::vector<double> weights;
};

UsablePairs usable_pairs(std::span<const Point2> pairs, std::span<const double> weights) {
  if (!weights.empty() && weights.size() != pairs.size()) {
    throw UsageError("weights and pairs differ in length");
  }
  UsablePairs out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (!std::isfinite(p[0]) || !std::isfinite(p[1])) {
      throw DomainError("exceedance pairs must be finite");
    }
    if (!(p[0] > 0.0 || p[1] > 0.0)) continue;
    out.pairs.push_back(p);
    if (!weights.empty()) out.weights.push_back(weights[i]);
  }
  if (out.pairs.size() < kMinBgpdFitSize) {
    throw UsageError("BGPD fit needs at least " + std::to_string(kMinBgpdFitSize) +
                     " pairs exceeding in one coordinate, got " +
                     std::to_string(out.pairs.size()));
  }
  return out;
}

double penalized(std::span<const double> t, const UsablePairs& data) {
  for (double x : t) {
    if (!std::isfinite(x)) return kPenaltyLoglik;
  }
  const auto m = unpack(t);
  if (m.dep > kDepMax || m.dep <= 1.0) return kPenaltyLoglik;
  const double e = m.exponent_at_origin();
  if (!(e > 0.0) || !std::isfinite(e)) return kPenaltyLoglik;
  const Prepared prep(m);
  CompensatedSum sum;
  for (std::size_t i = 0; i < data.pairs.size(); ++i) {
    const double w = data.weights.empty() ? 1.0 : data.weights[i];
    if (w == 0.0) continue;
    const double lh = prep.logdensity(data.pairs[i][0], data.pairs[i][1]);
    if (!std::isfinite(lh)) return kPenaltyLoglik;
    sum.add(w * lh);
  }
  const double ll = sum.value();
  return std::isfinite(ll) ? ll : kPenaltyLoglik;
}

// Conditional-GPD start for one coordinate, shrunk so that every observed
// value lies above the implied lower limit -scale / xi.
std::pair<double, double> margin_start(const std::vector<Point2>& pairs, std::size_t c,
                                       const OptimizerConfig& cfg) {
  std::vector<double> pos;
  double lowest = 0.0;
  for (const auto& p : pairs) {
    if (p[c] > 0.0) pos.push_back(p[c]);
    lowest = std::min(lowest, p[c]);
  }
  double scale = 1.0;
  double xi = 0.0;
  if (!pos.empty()) {
    scale = std::accumulate(pos.begin(), pos.end(), 0.0) / static_cast<double>(pos.size());
  }
  if (pos.size() >= kMinFitSize) {
    try {
      OptimizerConfig quick = cfg;
      quick.restarts = 2;
      const auto fit = fit_gpd(pos, quick);
      scale = fit.params.sigma();
      xi = std::clamp(fit.params.xi(), -0.3, 0.5);
    } catch (const DataError&) {
      // all positive parts tied; keep the exponential start
    }
  }
  if (xi > 0.0 && lowest < 0.0) xi = std::min(xi, 0.9 * scale / -lowest);
  return {scale, xi};
}

SimplexOptions bgpd_simplex_options(const OptimizerConfig& cfg) {
  SimplexOptions opts;
  opts.max_iterations = std::max(cfg.max_iterations, 4000);
  opts.f_tol = cfg.rel_tol;
  opts.x_tol = std::sqrt(cfg.rel_tol) * 1e-2;
  return opts;
}

BgpdFitResult finish(const SimplexResult& best, const UsablePairs& data, int iterations) {
  BgpdFitResult res;
  res.model = unpack(best.x);
  res.loglik = -best.value;
  res.converged = best.converged && best.value < -kPenaltyLoglik;
  res.dep_at_bound = res.model.dep > 0.99 * kDepMax;
  res.n_used = data.pairs.size();
  res.iterations = iterations;
  return res;
}

SimplexResult climb(const UsablePairs& data, const std::vector<std::vector<double>>& starts,
                    const OptimizerConfig& cfg, int& iterations) {
  const auto opts = bgpd_simplex_options(cfg);
  const Objective objective = [&](std::span<const double> t) { return -penalized(t, data); };
  SimplexResult best;
  best.value = kInf;
  for (const auto& s : starts) {
    const std::array<double, kDim> steps{0.2, 0.2, 0.2 * std::exp(s[3]), 0.2, 0.2, 0.5};
    auto r = nelder_mead(objective, s, steps, opts);
    iterations += r.iterations;
    if (r.value < best.value || best.x.empty()) best = std::move(r);
  }
  const std::array<double, kDim> narrow{0.05, 0.05, 0.05 * std::exp(best.x[3]), 0.05, 0.05, 0.1};
  for (int polish = 0; polish < 4; ++polish) {
    auto r = nelder_mead(objective, best.x, narrow, opts);
    iterations += r.iterations;
    const double gain = best.value - r.value;
    if (r.value <= best.value) best = std::move(r);
    if (!(gain > cfg.rel_tol * (std::abs(best.value) + 1.0))) break;
  }
  return best;
}

}  // namespace

BgpdFitResult fit_bgpd(std::span<const Point2> pairs, const OptimizerConfig& cfg,
                       std::span<const double> weights) {
  cfg.validate();
  const auto data = usable_pairs(pairs, weights);
  const auto [s1, xi1] = margin_start(data.pairs, 0, cfg);
  const auto [s2, xi2] = margin_start(data.pairs, 1, cfg);

  std::vector<std::vector<double>> starts;
  for (double dep : {1.2, 2.0, 3.0}) {
    for (const auto [x1, x2] : {std::pair{xi1, xi2}, std::pair{0.0, 0.0}}) {
      starts.push_back(pack({{0.0, s1, std::min(x1, 0.9 * (dep - 1.0))},
                             {0.0, s2, std::min(x2, 0.9 * (dep - 1.0))},
                             dep}));
    }
  }
  int iterations = 0;
  const auto best = climb(data, starts, cfg, iterations);
  return finish(best, data, iterations);
}

BgpdFitResult refit_bgpd(std::span<const Point2> pairs, std::span<const double> weights,
                         const BgpdLogisticModel& start, const OptimizerConfig& cfg) {
  cfg.validate();
  start.validate();
  if (!(start.dep > 1.0) || start.marg1.mu != 0.0) {
    throw UsageError("refit start must have dep > 1 and mu1 = 0");
  }
  const auto data = usable_pairs(pairs, weights);
  int iterations = 0;
  const auto best = climb(data, {pack(start)}, cfg, iterations);
  return finish(best, data, iterations);
}

std::vector<Point2> sample_bgpd(const BgpdLogisticModel& m, std::size_t n, RandomStream& rng) {
  m.validate();
  if (!(m.dep > 1.0)) throw DomainError("sampling needs dep > 1");
  const double r = m.dep;
  const double a0 = m.marg1.log_v(0.0);
  const double b0 = m.marg2.log_v(0.0);
  const double log_l0 = log_exponent(a0, b0, r);
  std::vector<Point2> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = rng.uniform();
    const double log_tail = std::log1p(-u) + log_l0;
    double a;  // log v1(X1)
    if (log_tail <= a0) {
      a = log_tail;
    } else {
      // X1 <= 0: l(v1, v2(0)) - v1 = u l0, decreasing in log v1.
      const double target = std::log(u) + log_l0;
      double lo = a0;
      double hi = a0 + 1.0;
      while (log_excess_over_first(hi, b0, r) > target) hi = a0 + 2.0 * (hi - a0);
      for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (log_excess_over_first(mid, b0, r) > target ? lo : hi) = mid;
      }
      a = 0.5 * (lo + hi);
    }
    const double x1 = m.marg1.from_log_v(a);

    // X2 | X1: cdf d_1 l(v1, v2(x2)) for x1 > 0; for x1 <= 0 the same
    // expression rescaled to the part of the range with x2 > 0.
    const double w = rng.uniform();
    double g;
    if (x1 > 0.0) {
      g = w;
    } else {
      const double top = partial_first(a, b0, r);
      g = top + w * (1.0 - top);
    }
    const double b = invert_partial_first(a, g, r);
    out.push_back({x1, m.marg2.from_log_v(b)});
  }
  return out;
}

namespace {

double empirical_quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

DependenceBootstrap bootstrap_dependence(std::span<const Point2> pairs, const WeightScheme& scheme,
                                         int replicates, std::uint64_t seed,
                                         const OptimizerConfig& cfg,
                                         const BootstrapOptions& opts) {
  if (replicates < 1) throw UsageError("bootstrap needs at least one replicate");
  const auto base = fit_bgpd(pairs, cfg);
  std::vector<double> dep(static_cast<std::size_t>(replicates), kNegInf);
  parallel_for(dep.size(), opts.threads, [&](std::size_t i) {
    auto rng = RandomStream::derive(seed, i);
    const auto w = draw_weights(scheme, pairs.size(), rng);
    try {
      const auto fit = refit_bgpd(pairs, w.weights, base.model, cfg);
      if (fit.converged) dep[i] = fit.model.dep;
    } catch (const UsageError&) {
      // weights left too few usable pairs
    }
  });

  DependenceBootstrap res;
  res.estimate = base.model.dep;
  res.replicates = replicates;
  for (double d : dep) {
    if (d == kNegInf) {
      ++res.failures;
    } else {
      res.replicate_dep.push_back(d);
    }
  }
  if (static_cast<double>(res.failures) > opts.max_failure_fraction * replicates ||
      res.replicate_dep.empty()) {
    throw UnstableBootstrapError(std::to_string(res.failures) + " of " +
                                 std::to_string(replicates) + " dependence refits failed");
  }
  CompensatedSum sum;
  for (double d : res.replicate_dep) sum.add(d);
  res.mean = sum.value() / static_cast<double>(res.replicate_dep.size());
  res.lower5 = empirical_quantile(res.replicate_dep, 0.05);
  res.upper95 = empirical_quantile(res.replicate_dep, 0.95);
  return res;
}

}  // namespace potwb
