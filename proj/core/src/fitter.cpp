#include "potwb/fitter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "potwb/errors.hpp"
#include "potwb/rng.hpp"
#include "potwb/simplex.hpp"

namespace potwb {

void OptimizerConfig::validate() const {
  if (max_iterations < 1) throw UsageError("optimizer max_iterations must be >= 1");
  if (!(rel_tol > 0.0)) throw UsageError("optimizer rel_tol must be > 0");
  if (restarts < 1) throw UsageError("optimizer restarts must be >= 1");
}

namespace {

SimplexOptions simplex_options(const OptimizerConfig& cfg) {
  SimplexOptions opts;
  opts.max_iterations = cfg.max_iterations;
  opts.f_tol = cfg.rel_tol;
  opts.x_tol = std::sqrt(cfg.rel_tol) * 1e-2;
  return opts;
}

bool feasible_shape(double xi) { return xi >= kXiMin && xi <= kXiMax; }

double penalized_loglik_sigma(double sigma, double xi, std::span<const double> sample) {
  if (!feasible_shape(xi) || !(sigma > 0.0) || !std::isfinite(sigma)) return kPenaltyLoglik;
  const double ll = detail::loglik_kernel(sigma, xi, sample, {});
  return std::isfinite(ll) ? ll : kPenaltyLoglik;
}

// Runs the simplex from every start, keeps the best end point and restarts
// from it until the objective stops improving.
SimplexResult multistart(const Objective& objective, const std::vector<std::vector<double>>& starts,
                         const OptimizerConfig& cfg, int& iterations) {
  const auto opts = simplex_options(cfg);
  const std::array<double, 2> wide{0.1, 0.05};
  const std::array<double, 2> narrow{0.02, 0.01};

  SimplexResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    auto r = nelder_mead(objective, s, wide, opts);
    iterations += r.iterations;
    if (r.value < best.value || best.x.empty()) best = std::move(r);
  }
  for (int polish = 0; polish < 3; ++polish) {
    auto r = nelder_mead(objective, best.x, narrow, opts);
    iterations += r.iterations;
    const double gain = best.value - r.value;
    const bool improved = r.value <= best.value;
    if (improved) best = std::move(r);
    if (!(gain > cfg.rel_tol * (std::abs(best.value) + 1.0))) break;
  }
  return best;
}

}  // namespace

void detail::validate_sample(std::span<const double> sample) {
  if (sample.size() < kMinFitSize) {
    throw UsageError("GPD fit needs at least " + std::to_string(kMinFitSize) +
                     " exceedances, got " + std::to_string(sample.size()));
  }
  for (double x : sample) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw DomainError("threshold excesses must be finite and nonnegative");
    }
  }
  const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
  if (*lo == *hi) throw DegenerateSampleError("all exceedances are identical");
}

double detail::penalized_loglik_q(double xi, double quantile_value, double level_q,
                                  std::span<const double> sample,
                                  std::span<const double> weights) {
  if (!feasible_shape(xi) || !(quantile_value > 0.0) || !std::isfinite(quantile_value)) {
    return kPenaltyLoglik;
  }
  const double sigma = implied_sigma_unchecked(xi, level_q, quantile_value);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) return kPenaltyLoglik;
  const double ll = loglik_kernel(sigma, xi, sample, weights);
  return std::isfinite(ll) ? ll : kPenaltyLoglik;
}

std::vector<GpdParams> starting_points(std::span<const double> sample,
                                       const OptimizerConfig& cfg) {
  const double n = static_cast<double>(sample.size());
  const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
  double var = 0.0;
  for (double x : sample) var += (x - mean) * (x - mean);
  var /= std::max(1.0, n - 1.0);
  const double max_x = *std::max_element(sample.begin(), sample.end());

  const double ratio = mean * mean / var;
  const double xi_mom = std::clamp(0.5 * (1.0 - ratio), -0.45, 2.0);
  const double sigma_mom = 0.5 * mean * (ratio + 1.0);

  std::vector<std::pair<double, double>> raw = {
      {sigma_mom, xi_mom}, {mean, 0.0}, {mean, 0.2}, {mean, -0.2}};
  auto rng = RandomStream::derive(cfg.seed, 0x5354415254ULL);
  while (static_cast<int>(raw.size()) < cfg.restarts) {
    const double s = mean * std::exp(rng.uniform(-0.7, 0.7));
    const double xi = rng.uniform(-0.4, 0.8);
    raw.emplace_back(s, xi);
  }
  raw.resize(static_cast<std::size_t>(std::max(1, cfg.restarts)));

  std::vector<GpdParams> starts;
  starts.reserve(raw.size());
  for (auto [sigma, xi] : raw) {
    if (!(sigma > 0.0)) sigma = mean;
    if (xi < 0.0) sigma = std::max(sigma, -xi * max_x * 1.05);
    starts.emplace_back(sigma, xi);
  }
  return starts;
}

FitResult fit_gpd(std::span<const double> sample, const OptimizerConfig& cfg, double level_q) {
  cfg.validate();
  detail::validate_sample(sample);
  if (!(level_q > 0.0 && level_q < 1.0)) throw DomainError("quantile level must lie in (0,1)");

  const Objective objective = [sample](std::span<const double> theta) {
    return -penalized_loglik_sigma(std::exp(theta[0]), theta[1], sample);
  };
  std::vector<std::vector<double>> starts;
  for (const auto& p : starting_points(sample, cfg)) {
    starts.push_back({std::log(p.sigma()), p.xi()});
  }

  FitResult fit;
  const auto best = multistart(objective, starts, cfg, fit.iterations);
  const double ll = -best.value;
  const GpdParams params(std::exp(best.x[0]), best.x[1]);
  fit.params = params;
  fit.qparams = to_quantile_param(params, level_q);
  fit.loglik_at_max = ll;
  fit.converged = best.converged && ll > kPenaltyLoglik;
  return fit;
}

FitResult detail::maximize_qparam(std::span<const double> sample,
                                  std::span<const double> weights, double level_q,
                                  std::span<const QuantileParam> starts,
                                  const OptimizerConfig& cfg) {
  const Objective objective = [&](std::span<const double> theta) {
    return -penalized_loglik_q(theta[0], std::exp(theta[1]), level_q, sample, weights);
  };
  std::vector<std::vector<double>> points;
  for (const auto& s : starts) points.push_back({s.xi, std::log(s.quantile_value)});

  FitResult fit;
  const auto best = multistart(objective, points, cfg, fit.iterations);
  const double ll = -best.value;
  fit.qparams = QuantileParam{best.x[0], level_q, std::exp(best.x[1])};
  fit.loglik_at_max = ll;
  fit.converged = best.converged && ll > kPenaltyLoglik;
  if (fit.converged) {
    fit.params = to_gpd(fit.qparams);
  } else {
    const double sigma = implied_sigma_unchecked(fit.qparams.xi, level_q, fit.qparams.quantile_value);
    if (sigma > 0.0 && std::isfinite(sigma)) fit.params = GpdParams(sigma, fit.qparams.xi);
  }
  return fit;
}

FitResult fit_gpd_qparam(std::span<const double> sample, double level_q,
                         const OptimizerConfig& cfg) {
  cfg.validate();
  if (!(level_q > 0.0 && level_q < 1.0)) throw DomainError("quantile level must lie in (0,1)");
  detail::validate_sample(sample);
  std::vector<QuantileParam> starts;
  for (const auto& p : starting_points(sample, cfg)) starts.push_back(to_quantile_param(p, level_q));
  return detail::maximize_qparam(sample, {}, level_q, starts, cfg);
}

}  // namespace potwb
