#include "potwb/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "potwb/errors.hpp"

namespace potwb {

namespace {

double safe_eval(const Objective& f, std::span<const double> x, int& evals) {
  ++evals;
  const double v = f(x);
  return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

}  // namespace

SimplexResult nelder_mead(const Objective& f, std::vector<double> start,
                          std::span<const double> steps, const SimplexOptions& opts) {
  const std::size_t dim = start.size();
  if (dim == 0 || steps.size() != dim) {
    throw UsageError("simplex start and step vectors must be nonempty and equal length");
  }
  const double n = static_cast<double>(dim);
  const double reflect = 1.0;
  const double expand = 1.0 + 2.0 / n;
  const double contract = 0.75 - 1.0 / (2.0 * n);
  const double shrink = 1.0 - 1.0 / n;

  SimplexResult result;
  std::vector<std::vector<double>> vertex(dim + 1, start);
  std::vector<double> value(dim + 1);
  for (std::size_t i = 0; i < dim; ++i) vertex[i + 1][i] += steps[i];
  for (std::size_t i = 0; i <= dim; ++i) value[i] = safe_eval(f, vertex[i], result.evaluations);

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), trial(dim), trial2(dim);

  auto point_along = [&](double coef, const std::vector<double>& worst, std::vector<double>& out) {
    for (std::size_t j = 0; j < dim; ++j) out[j] = centroid[j] + coef * (centroid[j] - worst[j]);
  };

  for (result.iterations = 0; result.iterations < opts.max_iterations; ++result.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[dim - 1];

    const double spread = value[worst] - value[best];
    double diameter = 0.0;
    for (std::size_t i = 0; i <= dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        diameter = std::max(diameter, std::abs(vertex[i][j] - vertex[best][j]));
      }
    }
    if (std::isfinite(value[best]) && spread <= opts.f_tol * (std::abs(value[best]) + 1.0) &&
        diameter <= opts.x_tol) {
      result.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += vertex[i][j];
    }
    for (auto& c : centroid) c /= n;

    point_along(reflect, vertex[worst], trial);
    const double f_reflect = safe_eval(f, trial, result.evaluations);

    if (f_reflect < value[best]) {
      point_along(expand, vertex[worst], trial2);
      const double f_expand = safe_eval(f, trial2, result.evaluations);
      if (f_expand < f_reflect) {
        vertex[worst] = trial2;
        value[worst] = f_expand;
      } else {
        vertex[worst] = trial;
        value[worst] = f_reflect;
      }
      continue;
    }
    if (f_reflect < value[second_worst]) {
      vertex[worst] = trial;
      value[worst] = f_reflect;
      continue;
    }
    // Outside contraction when the reflected point beats the worst vertex,
    // inside contraction otherwise.
    const bool outside = f_reflect < value[worst];
    point_along(outside ? contract * reflect : -contract, vertex[worst], trial2);
    const double f_contract = safe_eval(f, trial2, result.evaluations);
    if (f_contract < (outside ? f_reflect : value[worst])) {
      vertex[worst] = trial2;
      value[worst] = f_contract;
      continue;
    }
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < dim; ++j) {
        vertex[i][j] = vertex[best][j] + shrink * (vertex[i][j] - vertex[best][j]);
      }
      value[i] = safe_eval(f, vertex[i], result.evaluations);
    }
  }

  const auto best_it = std::min_element(value.begin(), value.end());
  const auto best = static_cast<std::size_t>(best_it - value.begin());
  result.x = vertex[best];
  result.value = value[best];
  return result;
}

}  // namespace potwb
