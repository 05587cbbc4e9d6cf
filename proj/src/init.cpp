#include "sparsepr/init.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sparsepr/error.hpp"

namespace sparsepr {

void InitConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(Errc::invalid_config, "gamma must be finite and > 0");
  if (!(power_tol > 0.0)) throw Error(Errc::invalid_config, "power_tol must be > 0");
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

Screening screen_coordinates(DataView data, double gamma) {
  const std::size_t n = data.n();
  const std::size_t p = data.p();
  if (n < 2) throw Error(Errc::invalid_input, "screen_coordinates: need n >= 2");
  if (data.y.size() != n) throw Error(Errc::dimension_mismatch, "screen_coordinates: y length differs from n");

  Screening out{{}, Vec(p, 0.0), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double yi = data.y[i];
    if (yi == 0.0) continue;
    auto row = data.x->row(i);
    for (std::size_t j = 0; j < p; ++j) out.scores[j] += yi * (row[j] * row[j] - 1.0);
  }
  const double dn = static_cast<double>(n);
  for (double& s : out.scores) s /= dn;
  out.threshold = gamma * std::sqrt(std::log(dn * static_cast<double>(p)) / dn);
  for (std::size_t j = 0; j < p; ++j)
    if (std::abs(out.scores[j]) > out.threshold) out.s_hat.push_back(j);
  return out;
}

Mat spectral_matrix(DataView data, std::span<const std::size_t> s_hat, double mu_n) {
  if (s_hat.empty()) throw Error(Errc::empty_screen, "spectral_matrix: screened index set is empty");
  const std::size_t k = s_hat.size();
  const std::size_t n = data.n();
  Mat w(k, k);
  Vec restricted(k);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = data.y[i] - mu_n;
    if (c == 0.0) continue;
    auto row = data.x->row(i);
    for (std::size_t a = 0; a < k; ++a) restricted[a] = row[s_hat[a]];
    for (std::size_t a = 0; a < k; ++a) {
      const double ca = c * restricted[a];
      for (std::size_t b = a; b < k; ++b) w(a, b) += ca * restricted[b];
    }
  }
  const double dn = static_cast<double>(n);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a; b < k; ++b) {
      w(a, b) /= dn;
      w(b, a) = w(a, b);
    }
  return w;
}

namespace {

/// n^-1 sum_i y_i (x_i^T v)^2 - mu_n, with v supported on `support`.
double estimate_rho(DataView data, std::span<const double> v, std::span<const std::size_t> support, double mu_n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    auto row = data.x->row(i);
    double t = 0.0;
    for (std::size_t j : support) t += row[j] * v[j];
    acc += data.y[i] * t * t;
  }
  return acc / static_cast<double>(data.n()) - mu_n;
}

}  // namespace

InitOutput initialize_split(DataView screen, DataView spectral, DataView rho_block, const InitConfig& cfg,
                            RngStream& rng) {
  cfg.validate();
  if (screen.p() != spectral.p() || screen.p() != rho_block.p())
    throw Error(Errc::dimension_mismatch, "initialize: blocks have different p");
  if (spectral.n() < 2 || rho_block.n() < 2) throw Error(Errc::invalid_input, "initialize: need n >= 2 per block");

  InitOutput out;
  Screening scr = screen_coordinates(screen, cfg.gamma);
  out.s_hat = std::move(scr.s_hat);
  if (out.s_hat.empty()) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < scr.scores.size(); ++j)
      if (std::abs(scr.scores[j]) > std::abs(scr.scores[best])) best = j;
    out.s_hat = {best};
    out.degraded = true;
  }

  out.mu_n = mean(spectral.y);
  const Mat w = spectral_matrix(spectral, out.s_hat, out.mu_n);

  EigenPair top;
  try {
    top = power_iteration_magnitude(w, cfg.power_tol, cfg.power_max_iter, rng);
  } catch (const NonConvergence& e) {
    throw NonConvergence("initialize: leading eigenvector of the " + std::to_string(w.rows()) + "x" +
                             std::to_string(w.cols()) + " spectral matrix: " + e.what(),
                         e.last_value(), e.last_iterate());
  }
  out.eigenvalue = top.value;

  out.v_hat.assign(screen.p(), 0.0);
  for (std::size_t a = 0; a < out.s_hat.size(); ++a) out.v_hat[out.s_hat[a]] = top.vector[a];

  out.rho_n = estimate_rho(rho_block, out.v_hat, out.s_hat, out.mu_n);
  if (out.rho_n == 0.0) throw Error(Errc::degenerate_signal, "initialize: rho_n is exactly zero");

  out.beta0 = scaled(out.v_hat, std::sqrt(std::abs(out.rho_n) / 2.0));
  return out;
}

std::array<Dataset, 3> split_three(const Dataset& data) {
  const std::size_t n = data.n();
  const std::size_t p = data.p();
  const std::size_t block = n / 3;
  const std::array<std::size_t, 4> bounds{0, block, 2 * block, n};
  std::array<Dataset, 3> out;
  for (std::size_t b = 0; b < 3; ++b) {
    const std::size_t rows = bounds[b + 1] - bounds[b];
    out[b].x = Mat(rows, p);
    out[b].y.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      auto src = data.x.row(bounds[b] + i);
      std::copy(src.begin(), src.end(), out[b].x.row(i).begin());
      out[b].y[i] = data.y[bounds[b] + i];
    }
  }
  return out;
}

InitOutput initialize(const Dataset& data, const InitConfig& cfg, RngStream& rng) {
  if (cfg.split) {
    const auto blocks = split_three(data);
    return initialize_split(blocks[0], blocks[1], blocks[2], cfg, rng);
  }
  return initialize_split(data, data, data, cfg, rng);
}

}  // namespace sparsepr
