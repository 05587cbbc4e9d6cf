#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sparsepr/rng.hpp"

namespace sparsepr {

using Vec = std::vector<double>;

/// Dense row-major matrix.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Mat(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Mat identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  Vec column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Mat transpose() const;

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double max_abs(std::span<const double> a);
bool all_finite(std::span<const double> a);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
Vec scaled(std::span<const double> x, double alpha);
Vec subtract(std::span<const double> a, std::span<const double> b);

Vec matvec(const Mat& m, std::span<const double> x);
/// m^T x
Vec matvec_t(const Mat& m, std::span<const double> x);
Mat matmul(const Mat& a, const Mat& b);
/// a^T a
Mat gram(const Mat& a);
double frobenius(const Mat& m);

/// `dim` i.i.d. standard normal draws. Throws invalid-dimension for dim == 0.
Vec gaussian_vector(RngStream& rng, std::size_t dim);

struct EigenPair {
  double value = 0.0;
  Vec vector;
  std::size_t iterations = 0;
};

inline constexpr double kDefaultPowerTol = 1e-10;
inline constexpr std::size_t kDefaultPowerMaxIter = 10000;

/// Eigenpair of the eigenvalue of largest magnitude of a symmetric matrix by
/// plain (unshifted) power iteration from a random start. Converged when
/// ||m v - lambda v|| <= tol * max(1, |lambda|). Two dominant eigenvalues of
/// equal magnitude and opposite sign never meet the residual test and end in
/// NonConvergence.
EigenPair power_iteration_magnitude(const Mat& m, double tol, std::size_t max_iter, RngStream& rng);

/// All eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi
/// rotations. Meant for small matrices.
Vec symmetric_eigenvalues(const Mat& m);

/// ||m||_2 from the eigenvalues of m^T m. Unlike power iteration this is
/// unaffected by near-tied leading singular values.
double spectral_norm(const Mat& m);

struct PartialSvd {
  Vec singular_values;  // descending
  Mat left;             // rows x rank, orthonormal columns
  Mat right;            // cols x rank, orthonormal columns
};

/// Leading `rank` singular triplets, one component at a time: power iteration
/// on m^T m with the iterate projected off the already-found right vectors.
PartialSvd deflated_svd(const Mat& m, std::size_t rank, double tol, std::size_t max_iter, RngStream& rng);

/// Sum of sigma_i u_i v_i^T over the components in `svd`, weighted by `weights`
/// when given (weights.size() == rank), else by the singular values.
Mat low_rank_reconstruction(const PartialSvd& svd, std::span<const double> weights = {});

inline constexpr std::size_t kDefaultAscentSteps = 200;
inline constexpr double kDefaultAscentStep = 0.1;

/// (sum_i |a_i^T x|^q)^(1/q) for the rows a_i of m.
double row_q_norm(const Mat& m, std::span<const double> x, int q);

/// Certified lower bound on the induced 2->q norm of m (q in {4, 6}): the best
/// value of row_q_norm over the coordinate axes and `probes` random unit
/// starts, each refined by projected gradient ascent on the sphere.
double opnorm_2q_lower(const Mat& m, int q, std::size_t probes, std::size_t ascent_steps, RngStream& rng);

}  // namespace sparsepr
