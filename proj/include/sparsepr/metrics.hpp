#pragma once

#include <cstddef>
#include <span>

namespace sparsepr {

/// min(||u - v||, ||u + v||); invariant to the sign of either argument.
double dist(std::span<const double> u, std::span<const double> v);

/// 1 - |<estimate/||estimate||, truth/||truth||>|, evaluated as half the
/// squared sign-invariant distance between the normalized vectors, which is
/// the same quantity without the cancellation of 1 - cos near zero.
/// Throws undefined-direction for a zero argument.
double cosine_error(std::span<const double> estimate, std::span<const double> truth);

/// True iff every exactly-nonzero entry of `estimate` has its index in
/// `truth_support` (sorted ascending).
bool support_contained(std::span<const double> estimate, std::span<const std::size_t> truth_support);

struct ErrorReport {
  double dist = 0.0;
  double cosine_error = 0.0;
  bool support_contained = false;
};

/// Errors of a unit-normalized estimate against a unit-norm truth.
ErrorReport evaluate(std::span<const double> estimate, std::span<const double> truth,
                     std::span<const std::size_t> truth_support);

}  // namespace sparsepr
