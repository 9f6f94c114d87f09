#pragma once

#include <functional>
#include <span>
#include <vector>

namespace potwb {

struct SimplexOptions {
  int max_iterations = 5000;
  /// Stop when the spread of objective values across the simplex is below
  /// f_tol * (|f_best| + 1) ...
  double f_tol = 1e-12;
  /// ... and every vertex lies within x_tol of the best one (max norm).
  double x_tol = 1e-8;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Nelder-Mead minimization with dimension-adaptive coefficients.
/// `steps` gives the initial simplex edge along each coordinate.
/// Non-finite objective values are treated as +inf.
[[nodiscard]] SimplexResult nelder_mead(const Objective& f, std::vector<double> start,
                                        std::span<const double> steps,
                                        const SimplexOptions& opts = {});

}  // namespace potwb
