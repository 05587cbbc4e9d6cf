#include "sparsepr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sparsepr/error.hpp"

namespace sparsepr {

const std::vector<LinkFn>& link_registry() {
  static const std::vector<LinkFn> registry{
      {"square", [](double u, double v) { return u * u + v; }},
      {"h1", [](double u, double v) { return std::abs(u) + v; }},
      {"h2", [](double u, double v) { return std::abs(u + v); }},
      {"h3", [](double u, double v) { return 4.0 * u * u + 3.0 * std::sin(std::abs(u)) + v; }},
  };
  return registry;
}

const LinkFn& find_link(std::string_view name) {
  for (const auto& link : link_registry())
    if (link.name == name) return link;
  throw Error(Errc::invalid_config, "unknown link '" + std::string(name) + "'");
}

void SimConfig::validate() const {
  if (p == 0) throw Error(Errc::invalid_config, "p must be >= 1");
  if (s == 0 || s > p) throw Error(Errc::invalid_config, "s must satisfy 1 <= s <= p");
  if (n == 0) throw Error(Errc::invalid_config, "n must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(Errc::invalid_config, "sigma must be finite and >= 0");
}

GroundTruth generate_signal(const SimConfig& cfg, RngStream& rng) {
  cfg.validate();

  // Partial Fisher-Yates: the first s slots are a uniform s-subset.
  std::vector<std::size_t> pool(cfg.p);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < cfg.s; ++i) {
    const std::size_t j = i + rng.uniform_index(cfg.p - i);
    std::swap(pool[i], pool[j]);
  }
  std::vector<std::size_t> support(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cfg.s));

  Vec block = gaussian_vector(rng, cfg.s);
  double block_norm = norm(block);
  while (block_norm == 0.0) {
    block = gaussian_vector(rng, cfg.s);
    block_norm = norm(block);
  }

  GroundTruth truth{Vec(cfg.p, 0.0), support};
  for (std::size_t k = 0; k < cfg.s; ++k) truth.beta_star[support[k]] = block[k] / block_norm;
  std::sort(truth.support.begin(), truth.support.end());
  return truth;
}

Vec apply_link(const Mat& x, std::span<const double> beta, std::span<const double> noise, const LinkFn& link) {
  if (beta.size() != x.cols() || noise.size() != x.rows())
    throw Error(Errc::dimension_mismatch, "apply_link: design, signal and noise sizes disagree");
  std::vector<std::size_t> nonzero;
  for (std::size_t j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) nonzero.push_back(j);
  Vec y(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = x.row(i);
    double u = 0.0;
    for (std::size_t j : nonzero) u += row[j] * beta[j];
    y[i] = link.eval(u, noise[i]);
  }
  return y;
}

Dataset sample_dataset(const SimConfig& cfg, const LinkFn& link, const GroundTruth& truth, RngStream& rng) {
  cfg.validate();
  if (truth.p() != cfg.p) throw Error(Errc::dimension_mismatch, "ground truth dimension differs from cfg.p");

  Dataset data{Mat(cfg.n, cfg.p), Vec(cfg.n)};
  Vec noise(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    for (double& v : data.x.row(i)) v = rng.gaussian();
    noise[i] = cfg.sigma * rng.gaussian();
  }
  data.y = apply_link(data.x, truth.beta_star, noise, link);
  return data;
}

Dataset sample_dataset(const SimConfig& cfg, const GroundTruth& truth, RngStream& rng) {
  return sample_dataset(cfg, find_link(cfg.link), truth, rng);
}

LinkMoments link_moments(const LinkFn& link, double sigma, std::size_t mc_samples, RngStream& rng) {
  if (mc_samples < 2) throw Error(Errc::invalid_input, "link_moments: need at least 2 samples");
  const std::size_t m = mc_samples;
  Vec y(m), z2(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double z = rng.gaussian();
    const double eps = sigma * rng.gaussian();
    y[i] = link.eval(z, eps);
    z2[i] = z * z;
  }
  const double dm = static_cast<double>(m);
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / dm;
  const double zbar = std::accumulate(z2.begin(), z2.end(), 0.0) / dm;

  double m2 = 0.0, m4 = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dy = y[i] - ybar;
    m2 += dy * dy;
    m4 += dy * dy * dy * dy;
    cov += dy * (z2[i] - zbar);
  }
  m2 /= dm;
  m4 /= dm;
  cov /= dm;
  double cov_var = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double c = (y[i] - ybar) * (z2[i] - zbar) - cov;
    cov_var += c * c;
  }
  cov_var /= dm;

  LinkMoments out;
  out.mean = {ybar, std::sqrt(m2 / dm)};
  out.var = {m2 * dm / (dm - 1.0), std::sqrt(std::max(m4 - m2 * m2, 0.0) / dm)};
  out.rho = {cov * dm / (dm - 1.0), std::sqrt(cov_var / dm)};
  return out;
}

McEstimate true_rho(const LinkFn& link, double sigma, std::size_t mc_samples, RngStream& rng) {
  if (mc_samples < 2) throw Error(Errc::invalid_input, "true_rho: need at least 2 samples");
  return link_moments(link, sigma, mc_samples, rng).rho;
}

}  // namespace sparsepr
