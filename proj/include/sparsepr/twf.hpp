#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sparsepr/init.hpp"
#include "sparsepr/linalg.hpp"
#include "sparsepr/model.hpp"

namespace sparsepr {

/// kappa used by the convergence theorem; the experiments default to 15.
inline constexpr double kTheoreticalKappa = 8.94427190999915878564;  // sqrt(80)

struct TwfConfig {
  double kappa = 15.0;
  double eta = 0.005;
  double tol = 1e-4;
  std::size_t max_iter = 1000;
  /// Stop once ||beta_t - beta_{t-1}|| <= tol. Off means exactly max_iter steps.
  bool early_stop = true;
  bool record_trace = false;

  void validate() const;
};

struct TwfState {
  Vec beta;
  std::size_t iteration = 0;
  double mu_n = 0.0;  // mean of the sign-adjusted responses
  int y_sign = 1;     // responses enter as y_sign * y
};

/// One row per iterate, starting with the initializer.
struct TraceEntry {
  double dist = 0.0;          // dist(beta_t / ||beta_t||, beta*); NaN without truth
  double cosine_error = 0.0;  // Err_t; NaN without truth
  double step_norm = 0.0;     // ||beta_t - beta_{t-1}||; 0 for t = 0
  double threshold = 0.0;     // tau(beta_{t-1}) used to produce beta_t; 0 for t = 0
  std::size_t support_size = 0;
  bool support_ok = false;    // supp(beta_t) within supp(beta*); false without truth
};

struct TwfTrace {
  std::vector<TraceEntry> entries;
};

struct EstimationResult {
  Vec beta_hat;  // unit norm
  std::size_t iterations = 0;
  bool converged = false;
  std::optional<TwfTrace> trace;
  InitOutput init;
};

/// mu_n - ||beta||^2
double xi_n(double mu_n, std::span<const double> beta);

/// n^-1 sum_i [y_i - (x_i^T beta)^2 - xi_n(beta)]^2
double loss(DataView data, std::span<const double> beta, double mu_n);

/// (4/n) sum_i [y_i - (x_i^T beta)^2 - xi_n(beta)] (I - x_i x_i^T) beta,
/// accumulated as c * beta - sum_i d_i x_i without forming p x p matrices.
Vec gradient(DataView data, std::span<const double> beta, double mu_n);

/// kappa * sqrt(log(np)/n^2 * sum_i [y_i - (x_i^T beta)^2 - mu_n + ||beta||^2]^2 (x_i^T beta)^2)
double threshold_value(DataView data, std::span<const double> beta, double mu_n, double kappa);

/// Keeps w_j when |w_j| >= tau, else sets it to exactly zero.
Vec hard_threshold(std::span<const double> w, double tau);

/// beta <- T_{eta tau(beta)}[beta - eta grad(beta)] on the responses
/// state.y_sign * y. Throws numeric-overflow on a non-finite iterate.
TwfState step(DataView data, const TwfState& state, const TwfConfig& cfg);

/// Thresholded gradient descent from init.beta0. Responses are negated when
/// init.rho_n < 0 and mu_n is recomputed on the adjusted responses.
EstimationResult run(DataView data, const InitOutput& init, const TwfConfig& cfg,
                     const GroundTruth* truth = nullptr);

}  // namespace sparsepr
