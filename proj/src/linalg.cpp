#include "sparsepr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sparsepr/error.hpp"

namespace sparsepr {

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(Errc::invalid_dimension, "matrix entry count " + std::to_string(data_.size()) +
                                             " does not match " + std::to_string(rows_) + "x" +
                                             std::to_string(cols_));
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vec Mat::column(std::size_t j) const {
  Vec c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

void Mat::set_column(std::size_t j, std::span<const double> values) {
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

Mat Mat::transpose() const {
  Mat t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::dimension_mismatch, "dot: sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw Error(Errc::dimension_mismatch, "axpy: sizes differ");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vec scaled(std::span<const double> x, double alpha) {
  Vec out(x.begin(), x.end());
  for (double& v : out) v *= alpha;
  return out;
}

Vec subtract(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::dimension_mismatch, "subtract: sizes differ");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vec matvec(const Mat& m, std::span<const double> x) {
  if (x.size() != m.cols()) throw Error(Errc::dimension_mismatch, "matvec: column count differs");
  Vec y(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) y[i] = dot(m.row(i), x);
  return y;
}

Vec matvec_t(const Mat& m, std::span<const double> x) {
  if (x.size() != m.rows()) throw Error(Errc::dimension_mismatch, "matvec_t: row count differs");
  Vec y(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) axpy(x[i], m.row(i), y);
  return y;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw Error(Errc::dimension_mismatch, "matmul: inner dimensions differ");
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) axpy(a(i, k), b.row(k), c.row(i));
  return c;
}

Mat gram(const Mat& a) {
  const std::size_t n = a.cols();
  Mat g(n, n);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto row = a.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      const double ri = row[i];
      if (ri == 0.0) continue;
      for (std::size_t j = i; j < n; ++j) g(i, j) += ri * row[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

double frobenius(const Mat& m) { return norm(m.data()); }

Vec gaussian_vector(RngStream& rng, std::size_t dim) {
  if (dim == 0) throw Error(Errc::invalid_dimension, "gaussian_vector: dim must be >= 1");
  Vec v(dim);
  for (double& x : v) x = rng.gaussian();
  return v;
}

namespace {

void normalize_in_place(Vec& v) {
  const double n = norm(v);
  for (double& x : v) x /= n;
}

void check_symmetric(const Mat& m) {
  if (m.rows() != m.cols()) throw Error(Errc::invalid_input, "matrix is not square");
  if (m.rows() == 0) throw Error(Errc::invalid_dimension, "matrix is empty");
  if (!all_finite(m.data())) throw Error(Errc::invalid_input, "matrix has non-finite entries");
  const double scale = max_abs(m.data());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-10 * scale)
        throw Error(Errc::invalid_input, "matrix is not symmetric");
}

/// v -= sum_k (v . basis_k) basis_k over the first `count` columns of `basis`.
void project_off(Vec& v, const Mat& basis, std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) {
    double c = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) c += v[i] * basis(i, k);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * basis(i, k);
  }
}

}  // namespace

EigenPair power_iteration_magnitude(const Mat& m, double tol, std::size_t max_iter, RngStream& rng) {
  check_symmetric(m);
  if (!(tol > 0.0)) throw Error(Errc::invalid_input, "power iteration tolerance must be positive");

  Vec v = gaussian_vector(rng, m.rows());
  normalize_in_place(v);
  double lambda = 0.0;
  for (std::size_t it = 0;; ++it) {
    Vec w = matvec(m, v);
    lambda = dot(v, w);
    double residual = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) residual += (w[i] - lambda * v[i]) * (w[i] - lambda * v[i]);
    residual = std::sqrt(residual);
    if (residual <= tol * std::max(1.0, std::abs(lambda))) return {lambda, std::move(v), it};
    if (it == max_iter) break;
    const double wn = norm(w);
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / wn;
  }
  throw NonConvergence("power iteration did not reach tolerance after " + std::to_string(max_iter) +
                           " iterations",
                       lambda, std::move(v));
}

Vec symmetric_eigenvalues(const Mat& m) {
  if (m.rows() != m.cols()) throw Error(Errc::invalid_input, "symmetric_eigenvalues: matrix must be square");
  const std::size_t d = m.rows();
  Mat a = m;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) off += a(i, j) * a(i, j);
    if (off <= 1e-300 || off <= 1e-32 * frobenius(a) * frobenius(a)) break;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  Vec out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = a(i, i);
  std::sort(out.begin(), out.end());
  return out;
}

double spectral_norm(const Mat& m) {
  if (m.empty()) return 0.0;
  const Vec ev = symmetric_eigenvalues(gram(m));
  return std::sqrt(std::max(ev.back(), 0.0));
}

PartialSvd deflated_svd(const Mat& m, std::size_t rank, double tol, std::size_t max_iter, RngStream& rng) {
  if (rank > std::min(m.rows(), m.cols()))
    throw Error(Errc::invalid_input, "deflated_svd: rank exceeds min(rows, cols)");
  if (!(tol > 0.0)) throw Error(Errc::invalid_input, "deflated_svd: tolerance must be positive");

  const Mat g = gram(m);
  PartialSvd out{Vec(rank), Mat(m.rows(), rank), Mat(m.cols(), rank)};

  for (std::size_t k = 0; k < rank; ++k) {
    Vec v = gaussian_vector(rng, m.cols());
    project_off(v, out.right, k);
    normalize_in_place(v);
    double lambda = 0.0;
    bool converged = false;
    for (std::size_t it = 0; it <= max_iter; ++it) {
      Vec w = matvec(g, v);
      project_off(w, out.right, k);
      lambda = dot(v, w);
      double residual = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) residual += (w[i] - lambda * v[i]) * (w[i] - lambda * v[i]);
      if (std::sqrt(residual) <= tol * std::max(1.0, std::abs(lambda))) {
        converged = true;
        break;
      }
      const double wn = norm(w);
      for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / wn;
    }
    if (!converged) {
      throw NonConvergence("deflated_svd: component " + std::to_string(k) + " did not converge after " +
                               std::to_string(max_iter) + " iterations",
                           lambda, std::move(v));
    }
    // Re-project once more so the stored basis stays orthonormal to round-off.
    project_off(v, out.right, k);
    normalize_in_place(v);

    const double sigma = std::sqrt(std::max(lambda, 0.0));
    Vec u = matvec(m, v);
    const double scale = k == 0 ? sigma : out.singular_values[0];
    if (sigma <= 1e-14 * std::max(scale, 1e-300)) {
      // Numerically null component: any unit vector orthogonal to the earlier
      // left vectors completes the basis.
      u = gaussian_vector(rng, m.rows());
    }
    project_off(u, out.left, k);
    normalize_in_place(u);

    out.singular_values[k] = sigma;
    out.right.set_column(k, v);
    out.left.set_column(k, u);
  }

  // Deflation finds components in descending order up to ties; enforce it.
  std::vector<std::size_t> order(rank);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.singular_values[a] > out.singular_values[b]; });
  if (!std::is_sorted(order.begin(), order.end())) {
    PartialSvd sorted{Vec(rank), Mat(m.rows(), rank), Mat(m.cols(), rank)};
    for (std::size_t k = 0; k < rank; ++k) {
      sorted.singular_values[k] = out.singular_values[order[k]];
      sorted.left.set_column(k, out.left.column(order[k]));
      sorted.right.set_column(k, out.right.column(order[k]));
    }
    out = std::move(sorted);
  }
  return out;
}

Mat low_rank_reconstruction(const PartialSvd& svd, std::span<const double> weights) {
  const std::size_t rank = svd.singular_values.size();
  if (!weights.empty() && weights.size() != rank)
    throw Error(Errc::dimension_mismatch, "low_rank_reconstruction: weight count differs from rank");
  Mat out(svd.left.rows(), svd.right.rows());
  for (std::size_t k = 0; k < rank; ++k) {
    const double w = weights.empty() ? svd.singular_values[k] : weights[k];
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < out.rows(); ++i) {
      const double ui = w * svd.left(i, k);
      for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += ui * svd.right(j, k);
    }
  }
  return out;
}

namespace {

double ipow(double t, int q) {
  const double t2 = t * t;
  return q == 4 ? t2 * t2 : t2 * t2 * t2;
}

/// Gradient of row_q_norm at x; returns the value through `value`.
Vec row_q_norm_gradient(const Mat& m, std::span<const double> x, int q, double& value) {
  Vec g(m.cols(), 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double t = dot(m.row(i), x);
    s += ipow(t, q);
    // d/dx |t|^q = q |t|^(q-2) t a_i; the q cancels against 1/q below.
    axpy(ipow(t, q) / (t == 0.0 ? 1.0 : t), m.row(i), g);
  }
  value = std::pow(s, 1.0 / q);
  if (s > 0.0) {
    const double c = std::pow(s, 1.0 / q - 1.0);
    for (double& v : g) v *= c;
  }
  return g;
}

}  // namespace

double row_q_norm(const Mat& m, std::span<const double> x, int q) {
  if (q != 4 && q != 6) throw Error(Errc::invalid_input, "row_q_norm: q must be 4 or 6");
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) s += ipow(dot(m.row(i), x), q);
  return std::pow(s, 1.0 / q);
}

double opnorm_2q_lower(const Mat& m, int q, std::size_t probes, std::size_t ascent_steps, RngStream& rng) {
  if (q != 4 && q != 6) throw Error(Errc::invalid_input, "opnorm_2q_lower: q must be 4 or 6");
  if (probes == 0) throw Error(Errc::invalid_input, "opnorm_2q_lower: probes must be >= 1");
  if (m.rows() == 0 || m.cols() == 0) throw Error(Errc::invalid_dimension, "opnorm_2q_lower: empty matrix");

  double best = 0.0;
  Vec axis(m.cols(), 0.0);
  for (std::size_t j = 0; j < m.cols(); ++j) {
    axis[j] = 1.0;
    best = std::max(best, row_q_norm(m, axis, q));
    axis[j] = 0.0;
  }

  for (std::size_t probe = 0; probe < probes; ++probe) {
    Vec x = gaussian_vector(rng, m.cols());
    normalize_in_place(x);
    double value = 0.0;
    double step = kDefaultAscentStep;
    for (std::size_t k = 0; k < ascent_steps; ++k) {
      Vec g = row_q_norm_gradient(m, x, q, value);
      const double radial = dot(g, x);
      for (std::size_t j = 0; j < g.size(); ++j) g[j] -= radial * x[j];
      const double gn = norm(g);
      if (!(gn > 1e-15 * std::max(value, 1e-300))) break;
      Vec candidate(x);
      axpy(step / gn, g, candidate);
      normalize_in_place(candidate);
      if (row_q_norm(m, candidate, q) > value) {
        x = std::move(candidate);
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, row_q_norm(m, x, q));
  }
  return best;
}

}  // namespace sparsepr
