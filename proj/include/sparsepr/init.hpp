#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "sparsepr/linalg.hpp"
#include "sparsepr/model.hpp"
#include "sparsepr/rng.hpp"

namespace sparsepr {

struct InitConfig {
  double gamma = 2.0;
  bool split = false;
  double power_tol = kDefaultPowerTol;
  std::size_t power_max_iter = kDefaultPowerMaxIter;

  void validate() const;
};

struct InitOutput {
  std::vector<std::size_t> s_hat;  // ascending
  Vec v_hat;                       // unit norm, supported on s_hat
  double rho_n = 0.0;
  Vec beta0;                       // v_hat * sqrt(|rho_n| / 2)
  double mu_n = 0.0;
  double eigenvalue = 0.0;         // largest-magnitude eigenvalue of W
  bool degraded = false;           // screening was empty; fell back to the top score
};

struct Screening {
  std::vector<std::size_t> s_hat;
  Vec scores;        // n^-1 sum_i y_i (x_ij^2 - 1) per coordinate
  double threshold;  // gamma * sqrt(log(n p) / n)
};

/// Diagonal screening: keep j with |score_j| > gamma * sqrt(log(np)/n).
Screening screen_coordinates(DataView data, double gamma);

/// |s_hat| x |s_hat| matrix n^-1 sum_i (y_i - mu_n) w_i w_i^T where w_i is
/// x_i restricted to s_hat. Throws empty-screen for an empty index set.
Mat spectral_matrix(DataView data, std::span<const std::size_t> s_hat, double mu_n);

/// Thresholded spectral initializer on one sample. With cfg.split the sample
/// is cut into three contiguous blocks and handed to initialize_split.
InitOutput initialize(const Dataset& data, const InitConfig& cfg, RngStream& rng);

/// Sample-splitting variant: screening on `screen`, mu_n and W on `spectral`,
/// rho_n on `rho_block` with mu_n from `spectral`.
InitOutput initialize_split(DataView screen, DataView spectral, DataView rho_block, const InitConfig& cfg,
                            RngStream& rng);

/// Three contiguous row blocks of (nearly) equal size; the last block takes
/// the remainder.
std::array<Dataset, 3> split_three(const Dataset& data);

double mean(std::span<const double> values);

}  // namespace sparsepr
