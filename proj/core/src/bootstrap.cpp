#include "potwb/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "potwb/errors.hpp"
#include "potwb/parallel.hpp"

namespace potwb {

std::string_view to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::multinomial: return "multinom";
    case WeightKind::exponential: return "exp";
    case WeightKind::unit: return "unit";
  }
  return "unknown";
}

WeightKind parse_weight_kind(std::string_view name) {
  if (name == "exp" || name == "exponential") return WeightKind::exponential;
  if (name == "multinom" || name == "multinomial") return WeightKind::multinomial;
  if (name == "unit") return WeightKind::unit;
  throw UsageError("unknown weight scheme '" + std::string(name) + "'");
}

WeightVector draw_weights(const WeightScheme& scheme, std::size_t n, RandomStream& rng) {
  if (n == 0) throw UsageError("cannot draw bootstrap weights for an empty sample");
  WeightVector w;
  switch (scheme.kind) {
    case WeightKind::multinomial:
      w.weights.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) w.weights[rng.index(n)] += 1.0;
      break;
    case WeightKind::exponential:
      w.weights.resize(n);
      for (auto& x : w.weights) x = rng.exponential();
      break;
    case WeightKind::unit:
      w.weights.assign(n, 1.0);
      break;
  }
  return w;
}

namespace {

void check_weights(std::span<const double> sample, const WeightVector& w) {
  if (w.weights.size() != sample.size()) {
    throw UsageError("weight vector length " + std::to_string(w.weights.size()) +
                     " does not match sample size " + std::to_string(sample.size()));
  }
  for (double x : w.weights) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("bootstrap weights must be nonnegative");
  }
}

bool has_two_weighted_values(std::span<const double> sample, const WeightVector& w) {
  std::optional<double> first;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (w.weights[i] <= 0.0) continue;
    if (!first) {
      first = sample[i];
    } else if (sample[i] != *first) {
      return true;
    }
  }
  return false;
}

FitResult fit_from(std::span<const double> sample, double level_q, const WeightVector& w,
                   std::span<const QuantileParam> starts, const OptimizerConfig& cfg) {
  FitResult fit = detail::maximize_qparam(sample, w.weights, level_q, starts, cfg);
  if (!has_two_weighted_values(sample, w)) fit.converged = false;
  return fit;
}

Interval interval_from(std::span<const double> sample, double level_q, double gamma,
                       const ConfidenceSpec& conf, const WeightVector& w,
                       const FitResult& weighted, const FitResult* unweighted,
                       Recentering recentering) {
  double centre_value = 0.0;
  double centre_loglik = 0.0;
  double centre_xi = 0.0;
  if (recentering == Recentering::weighted) {
    if (!weighted.converged) throw NumericalError("weighted GPD fit did not converge");
    centre_value = weighted.qparams.quantile_value;
    centre_loglik = weighted.loglik_at_max;
    centre_xi = weighted.qparams.xi;
  } else {
    if (unweighted == nullptr || !unweighted->converged) {
      throw NumericalError("GPD fit did not converge");
    }
    centre_value = unweighted->qparams.quantile_value;
    centre_xi = unweighted->qparams.xi;
    centre_loglik = detail::penalized_loglik_q(centre_xi, centre_value, level_q, sample, w.weights);
    if (centre_loglik <= kPenaltyLoglik) {
      throw NumericalError("ML estimate is infeasible under the bootstrap weights");
    }
  }
  detail::ProfileEngine engine(sample, w.weights, level_q, centre_xi);
  return detail::invert_deviance(engine, centre_value, centre_loglik, centre_xi,
                                 gamma * conf.chi2_quantile)
      .interval;
}

std::vector<QuantileParam> default_starts(std::span<const double> sample, double level_q,
                                          const OptimizerConfig& cfg) {
  std::vector<QuantileParam> starts;
  for (const auto& p : starting_points(sample, cfg)) starts.push_back(to_quantile_param(p, level_q));
  return starts;
}

}  // namespace

double weighted_loglik_qparam(const QuantileParam& p, std::span<const double> sample,
                              const WeightVector& w) {
  check_weights(sample, w);
  return loglik(to_gpd(p), sample, w.weights);
}

FitResult weighted_fit(std::span<const double> sample, double level_q, const WeightVector& w,
                       const OptimizerConfig& cfg) {
  cfg.validate();
  if (!(level_q > 0.0 && level_q < 1.0)) throw DomainError("quantile level must lie in (0,1)");
  detail::validate_sample(sample);
  check_weights(sample, w);
  return fit_from(sample, level_q, w, default_starts(sample, level_q, cfg), cfg);
}

double weighted_profile_loglik(std::span<const double> sample, double level_q,
                               double quantile_value, const WeightVector& w) {
  if (w.weights.size() != sample.size()) throw UsageError("weight vector and sample differ in length");
  if (!(level_q > 0.0 && level_q < 1.0)) throw DomainError("quantile level must lie in (0,1)");
  if (!(quantile_value > 0.0)) throw DomainError("quantile value must be positive");
  detail::ProfileEngine engine(sample, w.weights, level_q, 0.0);
  return engine.robust(quantile_value);
}

Interval boot_profile_interval(std::span<const double> sample, double level_q,
                               const WeightScheme& scheme, const ConfidenceSpec& conf,
                               const WeightVector& w, const OptimizerConfig& cfg,
                               Recentering recentering) {
  const FitResult weighted = weighted_fit(sample, level_q, w, cfg);
  std::optional<FitResult> plain;
  if (recentering == Recentering::unweighted) plain = fit_gpd_qparam(sample, level_q, cfg);
  return interval_from(sample, level_q, scheme.gamma, conf, w, weighted,
                       plain ? &*plain : nullptr, recentering);
}

BootIntervalResult boot_interval(std::span<const double> sample, double level_q,
                                 const WeightScheme& scheme, const ConfidenceSpec& conf,
                                 int replicates, std::uint64_t seed, const OptimizerConfig& cfg,
                                 const BootstrapOptions& opts) {
  if (replicates < 1) throw UsageError("bootstrap needs at least one replicate");
  const FitResult plain = fit_gpd_qparam(sample, level_q, cfg);
  if (!plain.converged) throw NumericalError("GPD fit did not converge");

  // Replicates start from the ordinary ML estimate; a single start plus the
  // polishing restarts is enough from there.
  OptimizerConfig replicate_cfg = cfg;
  replicate_cfg.restarts = 1;
  const std::vector<QuantileParam> warm{plain.qparams};

  std::vector<std::optional<std::pair<double, double>>> slots(static_cast<std::size_t>(replicates));
  parallel_for(slots.size(), opts.threads, [&](std::size_t i) {
    auto rng = RandomStream::derive(seed, i);
    const WeightVector w = draw_weights(scheme, sample.size(), rng);
    try {
      const FitResult weighted = fit_from(sample, level_q, w, warm, replicate_cfg);
      const Interval iv = interval_from(sample, level_q, scheme.gamma, conf, w, weighted, &plain,
                                        opts.recentering);
      slots[i] = std::make_pair(iv.lower, iv.upper);
    } catch (const NumericalError&) {
      slots[i].reset();
    }
  });

  BootIntervalResult out;
  out.replicates = replicates;
  CompensatedSum lower, upper;
  for (const auto& s : slots) {
    if (!s) {
      ++out.failures;
      continue;
    }
    out.replicate_intervals.push_back(*s);
    lower.add(s->first);
    upper.add(s->second);
  }
  if (out.failures > opts.max_failure_fraction * replicates || out.replicate_intervals.empty()) {
    throw UnstableBootstrapError(std::to_string(out.failures) + " of " +
                                 std::to_string(replicates) + " bootstrap replicates failed");
  }
  const auto ok = static_cast<double>(out.replicate_intervals.size());
  out.lower_mean = lower.value() / ok;
  out.upper_mean = upper.value() / ok;
  return out;
}

}  // namespace potwb
