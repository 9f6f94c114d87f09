#include "potwb/gpd.hpp"

#include <cmath>
#include <string>

#include "potwb/errors.hpp"

namespace potwb {

namespace {

bool near_zero(double xi) { return std::abs(xi) < kXiZeroTol; }

void check_level(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("quantile level must lie in (0,1), got " + std::to_string(q));
  }
}

}  // namespace

GpdParams::GpdParams(double sigma, double xi) : sigma_(sigma), xi_(xi) {
  if (!(std::isfinite(sigma) && sigma > 0.0)) {
    throw DomainError("GPD scale must be finite and positive, got " + std::to_string(sigma));
  }
  if (!std::isfinite(xi)) throw DomainError("GPD shape must be finite");
}

double GpdParams::upper_endpoint() const {
  if (xi_ >= 0.0 || near_zero(xi_)) return std::numeric_limits<double>::infinity();
  return -sigma_ / xi_;
}

double quantile_level(const ReturnSpec& spec) {
  if (!(spec.return_period_years > 0.0) || !(spec.record_years > 0.0) ||
      spec.exceedance_count == 0) {
    throw DomainError("return period, record length and exceedance count must be positive");
  }
  const double q = 1.0 - (1.0 / spec.return_period_years) *
                             (spec.record_years / static_cast<double>(spec.exceedance_count));
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("return period " + std::to_string(spec.return_period_years) +
                      " is not longer than the mean gap between exceedances");
  }
  return q;
}

double detail::implied_sigma_unchecked(double xi, double level_q, double quantile_value) {
  const double log_tail = std::log1p(-level_q);  // log(1-q) < 0
  if (near_zero(xi)) return quantile_value / -log_tail;
  return xi * quantile_value / std::expm1(-xi * log_tail);
}

double implied_sigma(const QuantileParam& p) {
  check_level(p.level_q);
  const double sigma = detail::implied_sigma_unchecked(p.xi, p.level_q, p.quantile_value);
  if (!(std::isfinite(sigma) && sigma > 0.0)) {
    throw DomainError("implied GPD scale is not positive");
  }
  return sigma;
}

GpdParams to_gpd(const QuantileParam& p) { return {implied_sigma(p), p.xi}; }

QuantileParam to_quantile_param(const GpdParams& p, double level_q) {
  return {p.xi(), level_q, gpd_quantile(p, level_q)};
}

double gpd_cdf(const GpdParams& p, double z) {
  if (!(z >= 0.0)) throw DomainError("GPD cdf argument must be nonnegative");
  if (z > p.upper_endpoint()) throw DomainError("GPD cdf argument beyond upper endpoint");
  if (near_zero(p.xi())) return -std::expm1(-z / p.sigma());
  const double t = p.xi() * z / p.sigma();
  if (t <= -1.0) return 1.0;
  return -std::expm1(-std::log1p(t) / p.xi());
}

double gpd_quantile(const GpdParams& p, double q) {
  check_level(q);
  const double log_tail = std::log1p(-q);
  if (near_zero(p.xi())) return -p.sigma() * log_tail;
  return p.sigma() / p.xi() * std::expm1(-p.xi() * log_tail);
}

double gpd_logdensity(const GpdParams& p, double z) {
  if (!(z >= 0.0)) return kNegInf;
  if (near_zero(p.xi())) return -std::log(p.sigma()) - z / p.sigma();
  const double t = p.xi() * z / p.sigma();
  if (t < -1.0) return kNegInf;
  const double power = 1.0 / p.xi() + 1.0;
  if (power == 0.0) return -std::log(p.sigma());
  return -std::log(p.sigma()) - power * std::log1p(t);
}

double detail::loglik_kernel(double sigma, double xi, std::span<const double> sample,
                             std::span<const double> weights) {
  const bool weighted = !weights.empty();
  double total_weight = 0.0;
  if (near_zero(xi)) {
    double sum = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const double w = weighted ? weights[i] : 1.0;
      if (w == 0.0) continue;
      if (sample[i] < 0.0) return kNegInf;
      sum += w * sample[i];
      total_weight += w;
    }
    return -total_weight * std::log(sigma) - sum / sigma;
  }
  const double ratio = xi / sigma;
  const double power = 1.0 / xi + 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double w = weighted ? weights[i] : 1.0;
    if (w == 0.0) continue;
    const double t = ratio * sample[i];
    if (t < -1.0 || sample[i] < 0.0) return kNegInf;
    sum += w * std::log1p(t);
    total_weight += w;
  }
  if (power == 0.0) return -total_weight * std::log(sigma);
  return -total_weight * std::log(sigma) - power * sum;
}

double loglik(const GpdParams& p, std::span<const double> sample) {
  if (sample.empty()) throw UsageError("log-likelihood of an empty sample");
  return detail::loglik_kernel(p.sigma(), p.xi(), sample, {});
}

double loglik(const GpdParams& p, std::span<const double> sample,
              std::span<const double> weights) {
  if (sample.empty()) throw UsageError("log-likelihood of an empty sample");
  if (weights.size() != sample.size()) {
    throw UsageError("weight vector length " + std::to_string(weights.size()) +
                     " does not match sample size " + std::to_string(sample.size()));
  }
  return detail::loglik_kernel(p.sigma(), p.xi(), sample, weights);
}

double loglik_qparam(const QuantileParam& p, std::span<const double> sample) {
  if (!(p.quantile_value > 0.0)) throw DomainError("quantile value must be positive");
  return loglik(to_gpd(p), sample);
}

}  // namespace potwb
