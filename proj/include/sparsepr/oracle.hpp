#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sparsepr/linalg.hpp"
#include "sparsepr/model.hpp"
#include "sparsepr/rng.hpp"

namespace sparsepr {

struct PopulationLoss {
  double var_y = 0.0;
  double rho = 0.0;
};

/// Var(Y) - 2 zeta^2 rho + 2 ||beta||^4 with zeta = <beta, beta*>.
/// Throws invalid-geometry when |zeta| > beta_norm.
double population_variance_loss(const PopulationLoss& pl, double zeta, double beta_norm);

struct ProbeReport {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double bound = 0.0;
  std::size_t seeds_checked = 0;
  double pass_fraction = 1.0;
  double required_fraction = 1.0;
  bool skipped = false;
  std::string detail;
};

struct GridPoint {
  double zeta = 0.0;
  double beta_norm = 0.0;
};

/// zeta/||beta|| in {-1, -0.5, 0, 0.5, 1} times ||beta|| in {0, 0.25, ..., 2}.
std::vector<GridPoint> default_loss_grid();

/// Monte Carlo Var[Y - (X^T beta)^2] at every grid point against the closed
/// form, plus the location of the grid argmin. Each point passes when the
/// Monte Carlo value is within 5 standard errors of the closed form. The
/// argmin must sit within one norm-cell of ||beta|| = |zeta| = sqrt(rho/2);
/// that check is skipped when the grid has fewer than two distinct norms.
/// Without `reference` the closed form uses Monte Carlo moments from 20 * mc
/// draws.
ProbeReport check_population_loss(const LinkFn& link, double sigma, const std::vector<GridPoint>& grid, std::size_t mc,
                         RngStream& rng, std::optional<PopulationLoss> reference = std::nullopt);

inline constexpr double kDefaultSpikedC = 20.0;

/// Second-moment matrix on the true support,
/// M = n^-1 sum_i (y_i - ybar) x_S x_S^T, against rho_ref beta*_S beta*_S^T in
/// max-norm (bound c * sqrt(log n / n)), plus alignment >= min_alignment of
/// its top-|lambda| eigenvector with beta*_S.
ProbeReport check_spiked_moment(DataView data, const GroundTruth& truth, double rho_ref, RngStream& rng,
                         double c = kDefaultSpikedC, double min_alignment = 0.95);

/// Perturbation bound for a spiked symmetric matrix lambda v v^T + noise:
/// |<v, v_hat>|^2 >= 1 - 2 phi / |lambda| with phi = ||noise||_2 and v_hat
/// from power iteration. Skipped when phi >= |lambda| / 2. `slack` absorbs solver
/// precision.
ProbeReport check_perturbation_bound(double lambda, std::span<const double> v, const Mat& noise, RngStream& rng,
                           double slack = 1e-9);

inline constexpr std::size_t kDefaultRipProbes = 8;

/// Explicit-constant isometry bounds on the n x s Gaussian design A_S over
/// `seeds` draws: ||A_S^T A_S - n I||_2 <= 3 sqrt(n) (sqrt(s) + sqrt(3 log n))
/// (required pass fraction 0.99), and lower bounds on ||A_S||_{2->4},
/// ||A_S||_{2->6} never exceeding (3n)^(1/4) and (15n)^(1/6) plus
/// sqrt(s) + sqrt(3 log n).
std::vector<ProbeReport> probe_rip(std::size_t p, std::size_t s, std::size_t n, std::size_t seeds, RngStream& rng,
                                   std::size_t probes = kDefaultRipProbes);

inline constexpr double kDefaultK2 = 10.0;

/// |ybar - mu| and |n^-1 sum y_i (x_i^T beta*)^2 - (mu + rho)| against
/// k2 sqrt(log n / n) across seeds. Reference moments come from
/// `reference` or from 4 * 10^6 Monte Carlo draws.
std::vector<ProbeReport> probe_mean_concentration(const LinkFn& link, double sigma, std::size_t s, std::size_t n,
                                                  std::size_t seeds, RngStream& rng, double k2 = kDefaultK2,
                                                  double required_fraction = 0.99,
                                                  std::optional<LinkMoments> reference = std::nullopt);

struct GradcheckReport {
  std::size_t instances = 0;
  double max_rel_error = 0.0;
  std::string worst;  // description of the worst instance
  bool passed = false;
};

/// Central differences of `loss` (step h) against `gradient` on random
/// instances with p <= 8, n <= 12 cycling through the link registry.
/// Relative error |a - b| / max(1, |a|, |b|) per coordinate.
GradcheckReport gradcheck_suite(std::size_t instances, RngStream& rng, double step = 1e-5, double tol = 1e-5);

}  // namespace sparsepr
