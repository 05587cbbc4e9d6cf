#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparsepr/linalg.hpp"
#include "sparsepr/rng.hpp"

namespace sparsepr {

/// Link of a single index model: y = eval(x^T beta*, eps).
struct LinkFn {
  std::string name;
  std::function<double(double, double)> eval;
};

/// square: u^2 + v, h1: |u| + v, h2: |u + v|, h3: 4u^2 + 3 sin|u| + v.
const std::vector<LinkFn>& link_registry();

/// Registry lookup; throws invalid-config for an unknown name.
const LinkFn& find_link(std::string_view name);

struct GroundTruth {
  Vec beta_star;
  std::vector<std::size_t> support;  // ascending

  std::size_t p() const noexcept { return beta_star.size(); }
};

struct SimConfig {
  std::size_t p = 1000;
  std::size_t s = 5;
  std::size_t n = 1000;
  std::string link = "h1";
  double sigma = 1.0;
  std::uint64_t seed = 0;

  /// Throws invalid-config unless 1 <= s <= p, n >= 1, sigma >= 0.
  void validate() const;
};

struct Dataset {
  Mat x;  // n x p
  Vec y;  // n

  std::size_t n() const noexcept { return x.rows(); }
  std::size_t p() const noexcept { return x.cols(); }
};

/// Non-owning (x, y) pair; lets the estimator run on sign-flipped responses
/// without copying the design.
struct DataView {
  const Mat* x;
  std::span<const double> y;

  DataView(const Dataset& d) : x(&d.x), y(d.y) {}  // NOLINT: implicit by intent
  DataView(const Mat& design, std::span<const double> responses) : x(&design), y(responses) {}

  std::size_t n() const noexcept { return x->rows(); }
  std::size_t p() const noexcept { return x->cols(); }
};

/// Uniform random s-subset support with a unit-norm Gaussian block on it.
/// Draws the support first, then the block.
GroundTruth generate_signal(const SimConfig& cfg, RngStream& rng);

/// n rows x^(i) ~ N(0, I_p) and y^(i) = link(x^(i)T beta*, eps^(i)),
/// eps^(i) ~ N(0, sigma^2). Draw order per row: the p covariates, then eps.
Dataset sample_dataset(const SimConfig& cfg, const GroundTruth& truth, RngStream& rng);

/// Same as above with an explicit link, for links outside the registry.
Dataset sample_dataset(const SimConfig& cfg, const LinkFn& link, const GroundTruth& truth, RngStream& rng);

/// Responses of a fixed design: y_i = link(x_i^T beta, noise_i).
Vec apply_link(const Mat& x, std::span<const double> beta, std::span<const double> noise, const LinkFn& link);

/// Monte Carlo estimate of a scalar with its standard error.
struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Population moments of Y = h(Z, eps), Z ~ N(0,1), eps ~ N(0, sigma^2).
struct LinkMoments {
  McEstimate mean;  // E Y
  McEstimate var;   // Var Y
  McEstimate rho;   // Cov(Y, Z^2)
};

LinkMoments link_moments(const LinkFn& link, double sigma, std::size_t mc_samples, RngStream& rng);

/// rho = Cov[h(Z, eps), Z^2] by Monte Carlo.
McEstimate true_rho(const LinkFn& link, double sigma, std::size_t mc_samples, RngStream& rng);

}  // namespace sparsepr
