#pragma once

#include <span>
#include <vector>

#include "potwb/fitter.hpp"

namespace potwb {

/// Confidence level 1 - alpha and the matching chi-square(1) quantile.
struct ConfidenceSpec {
  double level = 0.95;
  double chi2_quantile = 3.841458820694124;

  /// Throws DomainError unless 0 < level < 1.
  [[nodiscard]] static ConfidenceSpec from_level(double level);
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double mle_value = 0.0;
  double mle_loglik = 0.0;

  [[nodiscard]] double width() const { return upper - lower; }
  [[nodiscard]] bool contains(double x) const { return lower <= x && x <= upper; }
};

struct ProfilePoint {
  double quantile_value;
  double profiled_loglik;
};

struct ProfileCurve {
  std::vector<ProfilePoint> grid;
  double mle_value = 0.0;
  double mle_loglik = 0.0;
};

/// max over xi of the log-likelihood with H^-1(q) pinned at `quantile_value`.
/// Returns -inf when no admissible shape gives a finite likelihood.
[[nodiscard]] double profile_loglik(std::span<const double> sample, double level_q,
                                    double quantile_value, const OptimizerConfig& cfg);

/// {r : 2 [l_max - l_p(r)] <= c}, the profile-likelihood interval for H^-1(q).
///
/// Endpoints are bracketed in [mle/10, mle] and [mle, 10 mle], each bracket
/// widened by a further factor 10 up to three times, then solved to an
/// absolute tolerance of min(1e-4, 1e-9 mle). Throws NumericalError if the
/// fit does not converge and BracketExhaustedError if the deviance never
/// reaches the threshold.
[[nodiscard]] Interval profile_interval(std::span<const double> sample, double level_q,
                                        const ConfidenceSpec& conf, const OptimizerConfig& cfg);

/// 101 log-spaced profile evaluations spanning the final endpoint brackets.
[[nodiscard]] ProfileCurve profile_curve(std::span<const double> sample, double level_q,
                                         const ConfidenceSpec& conf, const OptimizerConfig& cfg);

namespace detail {

// Profile maximizer over the shape for a fixed (weighted) sample. Keeps the
// last maximizing shape as the warm start for the next evaluation.
class ProfileEngine {
 public:
  ProfileEngine(std::span<const double> sample, std::span<const double> weights, double level_q,
                double xi_hint);

  // Local search from the warm start; falls back to `robust` when the warm
  // start is infeasible.
  double at(double quantile_value);
  // Coarse scan over the full shape range followed by a local refinement.
  double robust(double quantile_value);

  [[nodiscard]] double xi_hint() const { return xi_hint_; }
  void set_xi_hint(double xi) { xi_hint_ = xi; }

 private:
  double value(double xi, double quantile_value) const;
  double refine(double lo, double hi, double quantile_value);

  std::span<const double> sample_;
  std::span<const double> weights_;
  double level_q_;
  double xi_hint_;
};

struct DevianceSearch {
  Interval interval;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

// Solves 2 [mle_loglik - l_p(r)] = threshold on both sides of mle_value.
DevianceSearch invert_deviance(ProfileEngine& engine, double mle_value, double mle_loglik,
                               double mle_xi, double threshold);

}  // namespace detail

}  // namespace potwb
