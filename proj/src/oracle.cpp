#include "sparsepr/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sparsepr/error.hpp"
#include "sparsepr/twf.hpp"

namespace sparsepr {

namespace {

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

/// Sample variance (m - 1 divisor) and the standard error of that estimate.
McEstimate sample_variance(const Vec& values) {
  const double m = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= m;
  double m2 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = (v - mean) * (v - mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= m;
  m4 /= m;
  return {m2 * m / (m - 1.0), std::sqrt(std::max(m4 - m2 * m2, 0.0) / m)};
}

}  // namespace

double population_variance_loss(const PopulationLoss& pl, double zeta, double beta_norm) {
  if (!(beta_norm >= 0.0) || std::abs(zeta) > beta_norm)
    throw Error(Errc::invalid_geometry, "population_variance_loss: need |zeta| <= ||beta||");
  return pl.var_y - 2.0 * zeta * zeta * pl.rho + 2.0 * std::pow(beta_norm, 4);
}

std::vector<GridPoint> default_loss_grid() {
  std::vector<GridPoint> grid;
  for (int k = 0; k <= 8; ++k) {
    const double r = 0.25 * k;
    for (double ratio : {-1.0, -0.5, 0.0, 0.5, 1.0}) grid.push_back({ratio * r, r});
  }
  return grid;
}

ProbeReport check_population_loss(const LinkFn& link, double sigma, const std::vector<GridPoint>& grid, std::size_t mc,
                         RngStream& rng, std::optional<PopulationLoss> reference) {
  if (grid.empty()) throw Error(Errc::invalid_input, "check_population_loss: empty grid");
  if (mc < 2) throw Error(Errc::invalid_input, "check_population_loss: need mc >= 2");

  PopulationLoss pl;
  if (reference) {
    pl = *reference;
  } else {
    const LinkMoments mom = link_moments(link, sigma, 20 * mc, rng);
    pl = {mom.var.value, mom.rho.value};
  }

  ProbeReport rep;
  rep.name = "population-loss-" + link.name;
  rep.bound = 5.0;
  std::size_t ok = 0;
  double best = std::numeric_limits<double>::infinity();
  GridPoint argmin{};
  Vec residual(mc);
  for (const GridPoint& g : grid) {
    const double closed = population_variance_loss(pl, g.zeta, g.beta_norm);
    // X^T beta = zeta Z + ||beta_perp|| W with W independent of (Z, eps).
    const double perp = std::sqrt(std::max(g.beta_norm * g.beta_norm - g.zeta * g.zeta, 0.0));
    for (std::size_t i = 0; i < mc; ++i) {
      const double z = rng.gaussian();
      const double w = rng.gaussian();
      const double eps = sigma * rng.gaussian();
      const double u = g.zeta * z + perp * w;
      residual[i] = link.eval(z, eps) - u * u;
    }
    const McEstimate est = sample_variance(residual);
    const double gap = std::abs(est.value - closed);
    if (gap <= 5.0 * est.std_error + 1e-12) ++ok;
    const double zscore = est.std_error > 0.0 ? gap / est.std_error : (gap > 1e-12 ? INFINITY : 0.0);
    rep.observed = std::max(rep.observed, zscore);
    if (est.value < best) {
      best = est.value;
      argmin = g;
    }
  }
  rep.seeds_checked = grid.size();
  rep.pass_fraction = static_cast<double>(ok) / static_cast<double>(grid.size());
  rep.passed = ok == grid.size();

  std::vector<double> norms;
  for (const GridPoint& g : grid) norms.push_back(g.beta_norm);
  std::sort(norms.begin(), norms.end());
  norms.erase(std::unique(norms.begin(), norms.end()), norms.end());
  const double target = std::sqrt(std::abs(pl.rho) / 2.0);
  if (norms.size() >= 2) {
    double cell = INFINITY;
    for (std::size_t k = 1; k < norms.size(); ++k) cell = std::min(cell, norms[k] - norms[k - 1]);
    const bool located = std::abs(argmin.beta_norm - target) <= cell + 1e-12 &&
                         std::abs(std::abs(argmin.zeta) - target) <= cell + 1e-12;
    rep.passed = rep.passed && located;
    rep.detail = format("argmin (zeta=%.4g, |beta|=%.4g), target %.4g, cell %.4g; %zu/%zu points within 5 se",
                        argmin.zeta, argmin.beta_norm, target, cell, ok, grid.size());
  } else {
    rep.detail = format("argmin check skipped; %zu/%zu points within 5 se", ok, grid.size());
  }
  return rep;
}

ProbeReport check_spiked_moment(DataView data, const GroundTruth& truth, double rho_ref, RngStream& rng, double c,
                         double min_alignment) {
  const std::size_t n = data.n();
  const auto& support = truth.support;
  const std::size_t k = support.size();
  if (n < 2) throw Error(Errc::invalid_input, "check_spiked_moment: need n >= 2");
  if (truth.p() != data.p()) throw Error(Errc::dimension_mismatch, "check_spiked_moment: truth dimension differs from p");
  if (k == 0) throw Error(Errc::invalid_input, "check_spiked_moment: empty support");

  const double ybar = mean(data.y);
  const Mat m = spectral_matrix(data, support, ybar);

  ProbeReport rep;
  rep.name = "spiked-moment";
  rep.seeds_checked = 1;
  Vec b(k);
  for (std::size_t a = 0; a < k; ++a) b[a] = truth.beta_star[support[a]];
  const double bn = norm(b);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t j = 0; j < k; ++j) rep.observed = std::max(rep.observed, std::abs(m(a, j) - rho_ref * b[a] * b[j]));
  rep.bound = c * std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(n));

  const EigenPair top = power_iteration_magnitude(m, kDefaultPowerTol, kDefaultPowerMaxIter, rng);
  const double alignment = bn > 0.0 ? std::abs(dot(top.vector, b)) / bn : 0.0;
  rep.passed = rep.observed <= rep.bound && alignment >= min_alignment;
  rep.pass_fraction = rep.passed ? 1.0 : 0.0;
  rep.detail = format("max-norm deviation %.4g vs %.4g; alignment %.6f (need %.3g); lambda %.4g", rep.observed,
                      rep.bound, alignment, min_alignment, top.value);
  return rep;
}

ProbeReport check_perturbation_bound(double lambda, std::span<const double> v, const Mat& noise, RngStream& rng, double slack) {
  const std::size_t d = v.size();
  if (noise.rows() != d || noise.cols() != d) throw Error(Errc::dimension_mismatch, "check_perturbation_bound: noise must be d x d");
  if (lambda == 0.0) throw Error(Errc::invalid_input, "check_perturbation_bound: lambda must be nonzero");

  ProbeReport rep;
  rep.name = "perturbation-bound";
  rep.seeds_checked = 1;

  const double phi = spectral_norm(noise);
  if (phi >= std::abs(lambda) / 2.0) {
    rep.skipped = true;
    rep.pass_fraction = 0.0;
    rep.detail = format("skipped: ||noise||_2 = %.6g >= |lambda|/2 = %.6g", phi, std::abs(lambda) / 2.0);
    return rep;
  }

  Mat a = noise;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) += lambda * v[i] * v[j];
  const EigenPair top = power_iteration_magnitude(a, kDefaultPowerTol, kDefaultPowerMaxIter, rng);
  const double overlap = dot(v, top.vector);
  rep.observed = 1.0 - overlap * overlap;
  rep.bound = 2.0 * phi / std::abs(lambda);
  rep.passed = rep.observed <= rep.bound + slack;
  rep.pass_fraction = rep.passed ? 1.0 : 0.0;
  rep.detail = format("phi %.6g, |<v, v_hat>|^2 = %.12f", phi, overlap * overlap);
  return rep;
}

std::vector<ProbeReport> probe_rip(std::size_t p, std::size_t s, std::size_t n, std::size_t seeds, RngStream& rng,
                                   std::size_t probes) {
  if (s == 0 || s > p) throw Error(Errc::invalid_input, "probe_rip: need 1 <= s <= p");
  if (n < s) throw Error(Errc::invalid_input, "probe_rip: need n >= s");
  if (seeds == 0) throw Error(Errc::invalid_input, "probe_rip: need seeds >= 1");

  const double dn = static_cast<double>(n);
  const double tail = std::sqrt(static_cast<double>(s)) + std::sqrt(3.0 * std::log(dn));
  std::vector<ProbeReport> out(3);
  out[0].name = "rip-spectral";
  out[0].bound = 3.0 * std::sqrt(dn) * tail;
  out[0].required_fraction = 0.99;
  out[1].name = "rip-2to4";
  out[1].bound = std::pow(3.0 * dn, 0.25) + tail;
  out[2].name = "rip-2to6";
  out[2].bound = std::pow(15.0 * dn, 1.0 / 6.0) + tail;

  std::array<std::size_t, 3> ok{};
  for (std::size_t seed = 0; seed < seeds; ++seed) {
    RngStream local = rng.substream(seed);
    Mat a(n, s);
    for (double& e : a.data()) e = local.gaussian();
    Mat dev = gram(a);
    for (std::size_t j = 0; j < s; ++j) dev(j, j) -= dn;
    const double spectral = spectral_norm(dev);
    const std::array<double, 3> observed{
        spectral,
        opnorm_2q_lower(a, 4, probes, kDefaultAscentSteps, local),
        opnorm_2q_lower(a, 6, probes, kDefaultAscentSteps, local),
    };
    for (std::size_t k = 0; k < 3; ++k) {
      out[k].observed = std::max(out[k].observed, observed[k]);
      if (observed[k] <= out[k].bound) ++ok[k];
    }
  }
  for (std::size_t k = 0; k < 3; ++k) {
    out[k].seeds_checked = seeds;
    out[k].pass_fraction = static_cast<double>(ok[k]) / static_cast<double>(seeds);
    out[k].passed = out[k].pass_fraction >= out[k].required_fraction;
    out[k].detail = format("p=%zu s=%zu n=%zu; %zu/%zu seeds within bound; observed is the max over seeds", p, s, n,
                           ok[k], seeds);
  }
  return out;
}

std::vector<ProbeReport> probe_mean_concentration(const LinkFn& link, double sigma, std::size_t s, std::size_t n,
                                                  std::size_t seeds, RngStream& rng, double k2,
                                                  double required_fraction, std::optional<LinkMoments> reference) {
  if (n < 2) throw Error(Errc::invalid_input, "probe_mean_concentration: need n >= 2");
  if (s == 0) throw Error(Errc::invalid_input, "probe_mean_concentration: need s >= 1");
  if (seeds == 0) throw Error(Errc::invalid_input, "probe_mean_concentration: need seeds >= 1");
  const LinkMoments mom = reference ? *reference : link_moments(link, sigma, 4'000'000, rng);
  const double mu = mom.mean.value;
  const double rho = mom.rho.value;

  const double dn = static_cast<double>(n);
  const double bound = k2 * std::sqrt(std::log(dn) / dn);
  std::vector<ProbeReport> out(2);
  out[0].name = "mean-y";
  out[1].name = "mean-y-z2";
  std::array<std::size_t, 2> ok{};
  for (std::size_t seed = 0; seed < seeds; ++seed) {
    RngStream local = rng.substream(seed);
    SimConfig cfg;
    cfg.p = s;
    cfg.s = s;
    cfg.n = n;
    cfg.sigma = sigma;
    const GroundTruth truth = generate_signal(cfg, local);
    const Dataset data = sample_dataset(cfg, link, truth, local);
    double ybar = 0.0, yz2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = dot(data.x.row(i), truth.beta_star);
      ybar += data.y[i];
      yz2 += data.y[i] * z * z;
    }
    const std::array<double, 2> dev{std::abs(ybar / dn - mu), std::abs(yz2 / dn - (mu + rho))};
    for (std::size_t k = 0; k < 2; ++k) {
      out[k].observed = std::max(out[k].observed, dev[k]);
      if (dev[k] <= bound) ++ok[k];
    }
  }
  for (std::size_t k = 0; k < 2; ++k) {
    out[k].bound = bound;
    out[k].seeds_checked = seeds;
    out[k].required_fraction = required_fraction;
    out[k].pass_fraction = static_cast<double>(ok[k]) / static_cast<double>(seeds);
    out[k].passed = out[k].pass_fraction >= required_fraction;
    out[k].detail = format("%s sigma=%g n=%zu K2=%g; mu=%.6g rho=%.6g; %zu/%zu seeds", link.name.c_str(), sigma, n,
                           k2, mu, rho, ok[k], seeds);
  }
  return out;
}

GradcheckReport gradcheck_suite(std::size_t instances, RngStream& rng, double step, double tol) {
  const auto& links = link_registry();
  GradcheckReport rep;
  rep.instances = instances;
  for (std::size_t t = 0; t < instances; ++t) {
    const LinkFn& link = links[t % links.size()];
    const std::size_t p = 1 + rng.uniform_index(8);
    const std::size_t n = 1 + rng.uniform_index(12);
    Dataset data{Mat(n, p), Vec(n)};
    for (double& e : data.x.data()) e = rng.gaussian();
    const Vec truth = gaussian_vector(rng, p);
    Vec noise(n);
    for (double& e : noise) e = rng.gaussian();
    data.y = apply_link(data.x, truth, noise, link);
    const double mu = mean(data.y);
    const Vec beta = gaussian_vector(rng, p);

    const Vec g = gradient(data, beta, mu);
    for (std::size_t j = 0; j < p; ++j) {
      Vec plus = beta, minus = beta;
      plus[j] += step;
      minus[j] -= step;
      const double fd = (loss(data, plus, mu) - loss(data, minus, mu)) / (2.0 * step);
      const double rel = std::abs(fd - g[j]) / std::max({1.0, std::abs(fd), std::abs(g[j])});
      if (rel > rep.max_rel_error) {
        rep.max_rel_error = rel;
        rep.worst = format("instance %zu (%s, p=%zu, n=%zu) coordinate %zu: analytic %.10g, fd %.10g", t,
                           link.name.c_str(), p, n, j, g[j], fd);
      }
    }
  }
  rep.passed = rep.max_rel_error <= tol;
  return rep;
}

}  // namespace sparsepr
