#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracle {

Eigen jacobi_eigen(const Mat& m) {
  const std::size_t d = m.rows();
  Mat a = m;
  Mat v = Mat::identity(d);
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (i != j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p + 1 < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = 0.5 * std::atan2(2.0 * a(p, q), a(q, q) - a(p, p));
        const double c = std::cos(theta), s = std::sin(theta);
        for (std::size_t k = 0; k < d; ++k) {
          const double kp = a(k, p), kq = a(k, q);
          a(k, p) = c * kp - s * kq;
          a(k, q) = s * kp + c * kq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double pk = a(p, k), qk = a(q, k);
          a(p, k) = c * pk - s * qk;
          a(q, k) = s * pk + c * qk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double kp = v(k, p), kq = v(k, q);
          v(k, p) = c * kp - s * kq;
          v(k, q) = s * kp + c * kq;
        }
      }
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  Eigen out{Vec(d), Mat(d, d)};
  for (std::size_t k = 0; k < d; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < d; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

Svd jacobi_svd(const Mat& m) {
  const std::size_t r = m.rows(), c = m.cols();
  Mat u = m;
  Mat v = Mat::identity(c);
  for (int sweep = 0; sweep < 200; ++sweep) {
    double worst = 0.0;
    for (std::size_t p = 0; p + 1 < c; ++p)
      for (std::size_t q = p + 1; q < c; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (alpha == 0.0 || beta == 0.0) continue;
        worst = std::max(worst, std::abs(gamma) / std::sqrt(alpha * beta));
        if (std::abs(gamma) < 1e-300) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t), sn = cs * t;
        for (std::size_t i = 0; i < r; ++i) {
          const double a = u(i, p), b = u(i, q);
          u(i, p) = cs * a - sn * b;
          u(i, q) = sn * a + cs * b;
        }
        for (std::size_t i = 0; i < c; ++i) {
          const double a = v(i, p), b = v(i, q);
          v(i, p) = cs * a - sn * b;
          v(i, q) = sn * a + cs * b;
        }
      }
    if (worst < 1e-15) break;
  }
  Vec sv(c);
  for (std::size_t k = 0; k < c; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < r; ++i) s += u(i, k) * u(i, k);
    sv[k] = std::sqrt(s);
  }
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sv[a] > sv[b]; });
  Svd out{Vec(c), Mat(r, c), Mat(c, c)};
  for (std::size_t k = 0; k < c; ++k) {
    const std::size_t j = order[k];
    out.values[k] = sv[j];
    for (std::size_t i = 0; i < r; ++i) out.u(i, k) = sv[j] > 0 ? u(i, j) / sv[j] : 0.0;
    for (std::size_t i = 0; i < c; ++i) out.v(i, k) = v(i, j);
  }
  return out;
}

namespace {

double row_dot(const Mat& x, std::size_t i, std::span<const double> b) {
  double z = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) z += x(i, j) * b[j];
  return z;
}

double sq_norm(std::span<const double> b) {
  double s = 0.0;
  for (double v : b) s += v * v;
  return s;
}

}  // namespace

double naive_loss(const Mat& x, std::span<const double> y, std::span<const double> beta, double mu) {
  const double xi = mu - sq_norm(beta);
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double z = row_dot(x, i, beta);
    const double r = y[i] - z * z - xi;
    total += r * r;
  }
  return total / static_cast<double>(x.rows());
}

double naive_threshold(const Mat& x, std::span<const double> y, std::span<const double> beta, double mu, double kappa) {
  const double n = static_cast<double>(x.rows());
  const double p = static_cast<double>(x.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double z = row_dot(x, i, beta);
    const double bracket = y[i] - z * z - mu + sq_norm(beta);
    total += bracket * bracket * z * z;
  }
  return kappa * std::sqrt(std::log(n * p) / (n * n) * total);
}

Vec naive_gradient(const Mat& x, std::span<const double> y, std::span<const double> beta, double mu) {
  const std::size_t p = x.cols();
  const double xi = mu - sq_norm(beta);
  Vec g(p, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double z = row_dot(x, i, beta);
    const double r = y[i] - z * z - xi;
    for (std::size_t a = 0; a < p; ++a) {
      double proj = 0.0;  // [(I - x x^T) beta]_a
      for (std::size_t b = 0; b < p; ++b) proj += ((a == b ? 1.0 : 0.0) - x(i, a) * x(i, b)) * beta[b];
      g[a] += r * proj;
    }
  }
  for (double& v : g) v *= 4.0 / static_cast<double>(x.rows());
  return g;
}

Vec fd_gradient(const Mat& x, std::span<const double> y, std::span<const double> beta, double mu, double h) {
  Vec g(beta.size());
  Vec b(beta.begin(), beta.end());
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double keep = b[j];
    b[j] = keep + h;
    const double up = naive_loss(x, y, b, mu);
    b[j] = keep - h;
    const double down = naive_loss(x, y, b, mu);
    b[j] = keep;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

double rel_error(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace oracle
