#include "potwb/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "potwb/errors.hpp"

namespace potwb {

ConfidenceSpec ConfidenceSpec::from_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("confidence level must lie in (0,1), got " + std::to_string(level));
  }
  const boost::math::chi_squared_distribution<double> chi2(1.0);
  return {level, boost::math::quantile(chi2, level)};
}

namespace detail {

namespace {

constexpr int kScanPoints = 31;
constexpr int kBrentBits = 32;
constexpr std::uintmax_t kBrentMaxIter = 200;

bool penalized(double v) { return v <= kPenaltyLoglik; }

}  // namespace

ProfileEngine::ProfileEngine(std::span<const double> sample, std::span<const double> weights,
                             double level_q, double xi_hint)
    : sample_(sample), weights_(weights), level_q_(level_q),
      xi_hint_(std::clamp(xi_hint, kXiMin, kXiMax)) {}

double ProfileEngine::value(double xi, double quantile_value) const {
  return penalized_loglik_q(xi, quantile_value, level_q_, sample_, weights_);
}

double ProfileEngine::refine(double lo, double hi, double quantile_value) {
  std::uintmax_t iters = kBrentMaxIter;
  const auto [xi, neg] = boost::math::tools::brent_find_minima(
      [&](double x) { return -value(x, quantile_value); }, lo, hi, kBrentBits, iters);
  const double best = -neg;
  if (penalized(best)) return kNegInf;
  xi_hint_ = xi;
  return best;
}

double ProfileEngine::robust(double quantile_value) {
  // Quadratic spacing puts most scan points at moderate shapes.
  double best = kPenaltyLoglik;
  int best_k = -1;
  std::array<double, kScanPoints> xs{};
  for (int k = 0; k < kScanPoints; ++k) {
    const double t = static_cast<double>(k) / (kScanPoints - 1);
    xs[k] = kXiMin + (kXiMax - kXiMin) * t * t;
    const double v = value(xs[k], quantile_value);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  if (best_k < 0) return kNegInf;
  const double lo = xs[std::max(0, best_k - 1)];
  const double hi = xs[std::min(kScanPoints - 1, best_k + 1)];
  const double refined = refine(lo, hi, quantile_value);
  if (refined >= best) return refined;
  xi_hint_ = xs[best_k];
  return best;
}

double ProfileEngine::at(double quantile_value) {
  constexpr double kGolden = 1.618033988749895;
  double b = xi_hint_;
  double fb = value(b, quantile_value);
  if (penalized(fb)) return robust(quantile_value);

  double step = 0.05;
  double a = std::max(kXiMin, b - step);
  double c = std::min(kXiMax, b + step);
  double fa = value(a, quantile_value);
  double fc = value(c, quantile_value);

  // Walk uphill until the middle point dominates or a bound is hit.
  for (int guard = 0; guard < 60; ++guard) {
    if (fb >= fa && fb >= fc) break;
    if (fa > fb && a > kXiMin) {
      step *= kGolden;
      c = b, fc = fb;
      b = a, fb = fa;
      a = std::max(kXiMin, b - step);
      fa = value(a, quantile_value);
    } else if (fc > fb && c < kXiMax) {
      step *= kGolden;
      a = b, fa = fb;
      b = c, fb = fc;
      c = std::min(kXiMax, b + step);
      fc = value(c, quantile_value);
    } else {
      break;  // maximum sits on a bound
    }
  }
  const double refined = refine(a, c, quantile_value);
  const double best_edge = std::max({fa, fb, fc});
  if (refined >= best_edge) return refined;
  xi_hint_ = fa == best_edge ? a : (fb == best_edge ? b : c);
  return penalized(best_edge) ? kNegInf : best_edge;
}

DevianceSearch invert_deviance(ProfileEngine& engine, double mle_value, double mle_loglik,
                               double mle_xi, double threshold) {
  constexpr int kExpansions = 3;
  constexpr double kFactor = 10.0;
  constexpr double kLargeDeviance = 1e6;
  const double tol = std::min(1e-4, 1e-9 * mle_value);

  auto excess = [&](double r) {
    const double lp = engine.at(r);
    if (!std::isfinite(lp)) return kLargeDeviance;
    return std::min(kLargeDeviance, 2.0 * (mle_loglik - lp) - threshold);
  };

  auto solve_side = [&](bool upper) -> std::pair<double, double> {
    double end = upper ? mle_value * kFactor : mle_value / kFactor;
    double f_end = 0.0;
    int expansion = 0;
    for (;; ++expansion) {
      engine.set_xi_hint(mle_xi);
      const double lp = engine.robust(end);
      f_end = std::isfinite(lp) ? std::min(kLargeDeviance, 2.0 * (mle_loglik - lp) - threshold)
                                : kLargeDeviance;
      if (f_end > 0.0) break;
      if (expansion == kExpansions) {
        throw BracketExhaustedError(
            std::string("profile deviance never reaches the threshold on the ") +
            (upper ? "upper" : "lower") + " side: r=" + std::to_string(end) +
            ", deviance excess=" + std::to_string(f_end) + ", mle=" + std::to_string(mle_value));
      }
      end = upper ? end * kFactor : end / kFactor;
    }
    engine.set_xi_hint(mle_xi);
    const double f_mle = excess(mle_value);
    if (!(f_mle < 0.0)) {
      throw NumericalError("profile deviance at the MLE is not below the threshold");
    }
    std::uintmax_t iters = 200;
    const auto tolerance = [tol](double x, double y) { return std::abs(x - y) <= tol; };
    const double lo = upper ? mle_value : end;
    const double hi = upper ? end : mle_value;
    const double f_lo = upper ? f_mle : f_end;
    const double f_hi = upper ? f_end : f_mle;
    engine.set_xi_hint(mle_xi);
    const auto root = boost::math::tools::toms748_solve(excess, lo, hi, f_lo, f_hi, tolerance, iters);
    return {0.5 * (root.first + root.second), end};
  };

  DevianceSearch out;
  const auto [lower, lo_end] = solve_side(false);
  const auto [upper, hi_end] = solve_side(true);
  out.interval = Interval{lower, upper, mle_value, mle_loglik};
  out.bracket_lo = lo_end;
  out.bracket_hi = hi_end;
  return out;
}

}  // namespace detail

double profile_loglik(std::span<const double> sample, double level_q, double quantile_value,
                      const OptimizerConfig& cfg) {
  cfg.validate();
  if (sample.empty()) throw UsageError("profile likelihood of an empty sample");
  if (!(level_q > 0.0 && level_q < 1.0)) throw DomainError("quantile level must lie in (0,1)");
  if (!(quantile_value > 0.0)) throw DomainError("quantile value must be positive");
  detail::ProfileEngine engine(sample, {}, level_q, 0.0);
  return engine.robust(quantile_value);
}

namespace {

std::pair<FitResult, detail::DevianceSearch> search(std::span<const double> sample,
                                                    double level_q, const ConfidenceSpec& conf,
                                                    const OptimizerConfig& cfg) {
  const FitResult fit = fit_gpd_qparam(sample, level_q, cfg);
  if (!fit.converged) throw NumericalError("GPD fit did not converge");
  detail::ProfileEngine engine(sample, {}, level_q, fit.qparams.xi);
  auto found = detail::invert_deviance(engine, fit.qparams.quantile_value, fit.loglik_at_max,
                                       fit.qparams.xi, conf.chi2_quantile);
  return {fit, found};
}

}  // namespace

Interval profile_interval(std::span<const double> sample, double level_q,
                          const ConfidenceSpec& conf, const OptimizerConfig& cfg) {
  return search(sample, level_q, conf, cfg).second.interval;
}

ProfileCurve profile_curve(std::span<const double> sample, double level_q,
                           const ConfidenceSpec& conf, const OptimizerConfig& cfg) {
  constexpr int kGridPoints = 101;
  const auto [fit, found] = search(sample, level_q, conf, cfg);
  ProfileCurve curve;
  curve.mle_value = fit.qparams.quantile_value;
  curve.mle_loglik = fit.loglik_at_max;
  detail::ProfileEngine engine(sample, {}, level_q, fit.qparams.xi);
  const double log_lo = std::log(found.bracket_lo);
  const double log_hi = std::log(found.bracket_hi);
  curve.grid.reserve(kGridPoints);
  for (int k = 0; k < kGridPoints; ++k) {
    const double r = std::exp(log_lo + (log_hi - log_lo) * k / (kGridPoints - 1));
    const double lp = k == 0 ? engine.robust(r) : engine.at(r);
    curve.grid.push_back({r, lp});
  }
  return curve;
}

}  // namespace potwb
