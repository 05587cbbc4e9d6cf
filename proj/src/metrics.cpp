#include "sparsepr/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "sparsepr/error.hpp"
#include "sparsepr/linalg.hpp"

namespace sparsepr {

double dist(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(Errc::dimension_mismatch, "dist: sizes differ");
  double minus = 0.0, plus = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    minus += (u[i] - v[i]) * (u[i] - v[i]);
    plus += (u[i] + v[i]) * (u[i] + v[i]);
  }
  return std::sqrt(std::min(minus, plus));
}

double cosine_error(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) throw Error(Errc::dimension_mismatch, "cosine_error: sizes differ");
  const double ne = norm(estimate);
  const double nt = norm(truth);
  if (ne == 0.0 || nt == 0.0) throw Error(Errc::undefined_direction, "cosine_error: zero vector");
  double minus = 0.0, plus = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double a = estimate[i] / ne;
    const double b = truth[i] / nt;
    minus += (a - b) * (a - b);
    plus += (a + b) * (a + b);
  }
  return std::clamp(0.5 * std::min(minus, plus), 0.0, 1.0);
}

bool support_contained(std::span<const double> estimate, std::span<const std::size_t> truth_support) {
  for (std::size_t j = 0; j < estimate.size(); ++j) {
    if (estimate[j] == 0.0) continue;
    if (!std::binary_search(truth_support.begin(), truth_support.end(), j)) return false;
  }
  return true;
}

ErrorReport evaluate(std::span<const double> estimate, std::span<const double> truth,
                     std::span<const std::size_t> truth_support) {
  const double ne = norm(estimate);
  if (ne == 0.0) throw Error(Errc::undefined_direction, "evaluate: zero estimate");
  Vec unit = scaled(estimate, 1.0 / ne);
  return {dist(unit, truth), cosine_error(estimate, truth), support_contained(estimate, truth_support)};
}

}  // namespace sparsepr
