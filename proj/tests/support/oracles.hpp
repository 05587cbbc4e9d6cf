#pragma once

// Reference implementations used only by the tests. They share no code with
// the library beyond the Mat/Vec containers.

#include <cstddef>
#include <span>
#include <vector>

#include "sparsepr/linalg.hpp"

namespace oracle {

using sparsepr::Mat;
using sparsepr::Vec;

struct Eigen {
  Vec values;  // ascending
  Mat vectors;  // columns match `values`
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
Eigen jacobi_eigen(const Mat& a);

struct Svd {
  Vec values;  // descending
  Mat u;       // rows x cols
  Mat v;       // cols x cols
};

/// One-sided Jacobi SVD for rows >= cols.
Svd jacobi_svd(const Mat& a);

/// Loss written as the plain double sum over samples.
double naive_loss(const Mat& x, std::span<const double> y, std::span<const double> beta, double mu);

/// Threshold value written from the formula with explicit loops.
double naive_threshold(const Mat& x, std::span<const double> y, std::span<const double> beta, double mu, double kappa);

/// Gradient by forming (I - x x^T) beta per sample.
Vec naive_gradient(const Mat& x, std::span<const double> y, std::span<const double> beta, double mu);

/// Central differences of naive_loss with step h.
Vec fd_gradient(const Mat& x, std::span<const double> y, std::span<const double> beta, double mu, double h);

double rel_error(double a, double b);

}  // namespace oracle
