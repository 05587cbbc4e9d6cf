#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sparsepr/error.hpp"
#include "sparsepr/linalg.hpp"

using namespace sparsepr;

namespace {

Mat random_mat(std::size_t r, std::size_t c, RngStream& rng) {
  Mat m(r, c);
  for (double& v : m.data()) v = rng.gaussian();
  return m;
}

Mat random_symmetric(std::size_t d, RngStream& rng) {
  Mat a = random_mat(d, d, rng);
  Mat s(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

}  // namespace

TEST(Linalg, MatConstructionChecksSize) {
  EXPECT_THROW(Mat(2, 3, std::vector<double>(5)), Error);
  Mat m(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(m.transpose()(2, 1), 6.0);
  EXPECT_EQ(m.column(1), (Vec{2, 5}));
}

TEST(Linalg, BasicOps) {
  Vec a{1, 2, 3}, b{4, -5, 6};
  EXPECT_DOUBLE_EQ(dot(a, b), 12.0);
  EXPECT_DOUBLE_EQ(norm(Vec{3, 4}), 5.0);
  EXPECT_DOUBLE_EQ(max_abs(b), 6.0);
  EXPECT_EQ(subtract(a, b), (Vec{-3, 7, -3}));
  EXPECT_THROW(dot(a, Vec{1, 2}), Error);
  EXPECT_FALSE(all_finite(Vec{1, NAN}));
  RngStream rng(0, 0);
  EXPECT_THROW(gaussian_vector(rng, 0), Error);
}

TEST(Linalg, MatmulGramAgainstLoops) {
  RngStream rng(1, 0);
  Mat a = random_mat(7, 4, rng), b = random_mat(4, 5, rng);
  Mat c = matmul(a, b);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 4; ++k) s += a(i, k) * b(k, j);
      EXPECT_NEAR(c(i, j), s, 1e-12);
    }
  Mat g = gram(a);
  Mat g2 = matmul(a.transpose(), a);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(g(i, j), g2(i, j), 1e-12);
  Vec x{1, -1, 2, 0.5};
  Vec y = matvec(a, x);
  Vec yt = matvec_t(a.transpose(), x);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(y[i], yt[i], 1e-12);
}

TEST(Linalg, PowerIterationMatchesJacobi) {
  RngStream rng(2, 0);
  for (int trial = 0; trial < 20; ++trial) {
    Mat s = random_symmetric(8, rng);
    // Add a clear spike so the top magnitude is well separated.
    Vec u = gaussian_vector(rng, 8);
    const double un = norm(u);
    for (double& v : u) v /= un;
    const double spike = trial % 2 ? 15.0 : -15.0;
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j) s(i, j) += spike * u[i] * u[j];

    auto ref = oracle::jacobi_eigen(s);
    const double top = std::abs(ref.values.front()) > std::abs(ref.values.back()) ? ref.values.front()
                                                                                    : ref.values.back();
    const std::size_t col = top == ref.values.front() ? 0 : 7;
    EigenPair ep = power_iteration_magnitude(s, 1e-10, 10000, rng);
    EXPECT_NEAR(ep.value, top, 1e-8 * std::abs(top));
    double overlap = 0;
    for (std::size_t i = 0; i < 8; ++i) overlap += ep.vector[i] * ref.vectors(i, col);
    EXPECT_NEAR(std::abs(overlap), 1.0, 1e-8);
  }
}

TEST(Linalg, PowerIterationOppositeSignTieDoesNotConverge) {
  Mat m(2, 2, {1, 0, 0, -1});
  RngStream rng(3, 0);
  try {
    power_iteration_magnitude(m, 1e-10, 200, rng);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.code(), Errc::non_convergence);
    EXPECT_EQ(e.last_iterate().size(), 2u);
  }
}

TEST(Linalg, PowerIterationRejectsBadInput) {
  RngStream rng(4, 0);
  EXPECT_THROW(power_iteration_magnitude(Mat(2, 3), 1e-10, 10, rng), Error);
  EXPECT_THROW(power_iteration_magnitude(Mat(2, 2, {1, 2, 3, 4}), 1e-10, 10, rng), Error);
  EXPECT_THROW(power_iteration_magnitude(Mat(2, 2, {1, NAN, NAN, 1}), 1e-10, 10, rng), Error);
}

TEST(Linalg, SymmetricEigenvaluesMatchOracle) {
  RngStream rng(5, 0);
  for (std::size_t d : {1u, 2u, 5u, 12u}) {
    Mat s = random_symmetric(d, rng);
    Vec ev = symmetric_eigenvalues(s);
    auto ref = oracle::jacobi_eigen(s);
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(ev[i], ref.values[i], 1e-10);
  }
}

TEST(Linalg, SpectralNormMatchesSvdOracle) {
  RngStream rng(6, 0);
  for (int t = 0; t < 10; ++t) {
    Mat m = random_mat(30, 6, rng);
    auto ref = oracle::jacobi_svd(m);
    EXPECT_NEAR(spectral_norm(m), ref.values[0], 1e-10 * ref.values[0]);
  }
  // Near-tied top singular values.
  Mat d(3, 3, {5.0, 0, 0, 0, 5.0 - 1e-12, 0, 0, 0, 1});
  EXPECT_NEAR(spectral_norm(d), 5.0, 1e-12);
}

TEST(Linalg, DeflatedSvdMatchesOracle) {
  RngStream rng(7, 0);
  Mat m = random_mat(40, 10, rng);
  auto ref = oracle::jacobi_svd(m);
  PartialSvd svd = deflated_svd(m, 4, 1e-12, 100000, rng);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(svd.singular_values[k], ref.values[k], 1e-8 * ref.values[0]);
    double ov = 0;
    for (std::size_t i = 0; i < 10; ++i) ov += svd.right(i, k) * ref.v(i, k);
    EXPECT_NEAR(std::abs(ov), 1.0, 1e-6);
  }
  // Orthonormal bases.
  Mat gl = gram(svd.left), gr = gram(svd.right);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_NEAR(gl(i, j), i == j ? 1.0 : 0.0, 1e-10);
      EXPECT_NEAR(gr(i, j), i == j ? 1.0 : 0.0, 1e-10);
    }
}

TEST(Linalg, FullRankReconstructionRecoversMatrix) {
  RngStream rng(8, 0);
  Mat m = random_mat(6, 4, rng);
  PartialSvd svd = deflated_svd(m, 4, 1e-13, 100000, rng);
  Mat r = low_rank_reconstruction(svd);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(r(i, j), m(i, j), 1e-9);
  EXPECT_THROW(low_rank_reconstruction(svd, Vec{1, 2}), Error);
  EXPECT_THROW(deflated_svd(m, 5, 1e-10, 10, rng), Error);
}

TEST(Linalg, DeflatedSvdReportsStalledComponent) {
  RngStream rng(9, 0);
  Mat m = random_mat(20, 8, rng);
  try {
    deflated_svd(m, 3, 1e-14, 1, rng);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_NE(std::string(e.what()).find("component 0"), std::string::npos);
  }
}

TEST(Linalg, RowQNormAndLowerBound) {
  RngStream rng(10, 0);
  Mat m = random_mat(50, 4, rng);
  Vec e0{1, 0, 0, 0};
  double s = 0;
  for (std::size_t i = 0; i < 50; ++i) s += std::pow(m(i, 0), 4);
  EXPECT_NEAR(row_q_norm(m, e0, 4), std::pow(s, 0.25), 1e-12);
  EXPECT_THROW(row_q_norm(m, e0, 3), Error);

  // The certified lower bound is attained by some unit vector, so it never
  // exceeds the brute-force maximum over a fine sphere sample by more than
  // round-off, and it dominates every axis.
  const double lb = opnorm_2q_lower(m, 4, 8, 200, rng);
  double brute = 0;
  RngStream r2(11, 0);
  for (int k = 0; k < 20000; ++k) {
    Vec x = gaussian_vector(r2, 4);
    const double xn = norm(x);
    for (double& v : x) v /= xn;
    brute = std::max(brute, row_q_norm(m, x, 4));
  }
  EXPECT_GE(lb, brute - 1e-3 * brute);
  for (std::size_t j = 0; j < 4; ++j) {
    Vec e(4, 0.0);
    e[j] = 1;
    EXPECT_GE(lb, row_q_norm(m, e, 4));
  }
  // 2->q norm is bounded by the 2->2 norm for q >= 2.
  EXPECT_LE(lb, spectral_norm(m) + 1e-12);
  EXPECT_LE(opnorm_2q_lower(m, 6, 4, 100, rng), spectral_norm(m) + 1e-12);
}
