#include "sparsepr/twf.hpp"

#include <cmath>
#include <string>

#include "sparsepr/error.hpp"
#include "sparsepr/metrics.hpp"

namespace sparsepr {

void TwfConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(kappa)) throw Error(Errc::invalid_config, "kappa must be finite and > 0");
  if (!positive(eta)) throw Error(Errc::invalid_config, "eta must be finite and > 0");
  if (!positive(tol)) throw Error(Errc::invalid_config, "tol must be finite and > 0");
}

namespace {

void check_dims(DataView data, std::span<const double> beta) {
  if (beta.size() != data.p()) throw Error(Errc::dimension_mismatch, "beta length differs from p");
  if (data.y.size() != data.n()) throw Error(Errc::dimension_mismatch, "y length differs from n");
}

struct Pass {
  double loss_sum = 0.0;  // sum r_i^2
  double tau_sum = 0.0;   // sum r_i^2 z_i^2
  Vec grad;               // filled when requested
};

/// One sweep over the rows with r_i = y_scale * y_i - z_i^2 - xi, z_i = x_i^T beta.
Pass sweep(DataView data, double y_scale, std::span<const double> beta, double mu_n, bool with_gradient) {
  const std::size_t n = data.n();
  const std::size_t p = data.p();
  std::vector<std::size_t> nonzero;
  for (std::size_t j = 0; j < p; ++j)
    if (beta[j] != 0.0) nonzero.push_back(j);
  const double xi = xi_n(mu_n, beta);

  Pass out;
  Vec weighted_rows;
  if (with_gradient) weighted_rows.assign(p, 0.0);
  double r_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = data.x->row(i);
    double z = 0.0;
    for (std::size_t j : nonzero) z += row[j] * beta[j];
    const double r = y_scale * data.y[i] - z * z - xi;
    out.loss_sum += r * r;
    out.tau_sum += r * r * z * z;
    if (with_gradient) {
      r_sum += r;
      const double d = r * z;
      if (d != 0.0) {
        double* acc = weighted_rows.data();
        const double* xr = row.data();
        for (std::size_t j = 0; j < p; ++j) acc[j] += d * xr[j];
      }
    }
  }
  if (with_gradient) {
    out.grad.resize(p);
    const double c = 4.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < p; ++j) out.grad[j] = c * (r_sum * beta[j] - weighted_rows[j]);
  }
  return out;
}

double tau_from(DataView data, double tau_sum, double kappa) {
  const double n = static_cast<double>(data.n());
  const double p = static_cast<double>(data.p());
  return kappa * std::sqrt(std::log(n * p) / (n * n) * tau_sum);
}

struct StepOutcome {
  TwfState state;
  double tau = 0.0;
};

StepOutcome step_impl(DataView data, const TwfState& state, const TwfConfig& cfg) {
  if (!all_finite(state.beta)) throw Error(Errc::numeric_overflow, "step: non-finite input iterate");
  const Pass pass = sweep(data, static_cast<double>(state.y_sign), state.beta, state.mu_n, true);
  const double tau = tau_from(data, pass.tau_sum, cfg.kappa);

  Vec moved(state.beta);
  axpy(-cfg.eta, pass.grad, moved);
  StepOutcome out{{hard_threshold(moved, cfg.eta * tau), state.iteration + 1, state.mu_n, state.y_sign}, tau};
  if (!std::isfinite(tau) || !all_finite(out.state.beta))
    throw Error(Errc::numeric_overflow, "non-finite iterate at iteration " + std::to_string(out.state.iteration));
  return out;
}

}  // namespace

double xi_n(double mu_n, std::span<const double> beta) { return mu_n - dot(beta, beta); }

double loss(DataView data, std::span<const double> beta, double mu_n) {
  check_dims(data, beta);
  if (data.n() == 0) throw Error(Errc::invalid_input, "loss: empty dataset");
  return sweep(data, 1.0, beta, mu_n, false).loss_sum / static_cast<double>(data.n());
}

Vec gradient(DataView data, std::span<const double> beta, double mu_n) {
  check_dims(data, beta);
  if (data.n() == 0) throw Error(Errc::invalid_input, "gradient: empty dataset");
  return sweep(data, 1.0, beta, mu_n, true).grad;
}

double threshold_value(DataView data, std::span<const double> beta, double mu_n, double kappa) {
  check_dims(data, beta);
  if (data.n() == 0) throw Error(Errc::invalid_input, "threshold_value: empty dataset");
  return tau_from(data, sweep(data, 1.0, beta, mu_n, false).tau_sum, kappa);
}

Vec hard_threshold(std::span<const double> w, double tau) {
  if (!(tau >= 0.0)) throw Error(Errc::invalid_input, "hard_threshold: tau must be >= 0");
  Vec out(w.size(), 0.0);
  for (std::size_t j = 0; j < w.size(); ++j)
    if (std::abs(w[j]) >= tau) out[j] = w[j];
  return out;
}

TwfState step(DataView data, const TwfState& state, const TwfConfig& cfg) {
  check_dims(data, state.beta);
  return step_impl(data, state, cfg).state;
}

EstimationResult run(DataView data, const InitOutput& init, const TwfConfig& cfg, const GroundTruth* truth) {
  cfg.validate();
  check_dims(data, init.beta0);
  if (init.rho_n == 0.0) throw Error(Errc::degenerate_signal, "run: rho_n is zero");
  if (truth && truth->p() != data.p()) throw Error(Errc::dimension_mismatch, "run: truth dimension differs from p");

  TwfState state;
  state.y_sign = init.rho_n > 0.0 ? 1 : -1;
  state.mu_n = static_cast<double>(state.y_sign) * mean(data.y);
  state.beta = init.beta0;
  if (norm(state.beta) == 0.0) throw Error(Errc::degenerate_iterate, "run: initial iterate is zero");

  EstimationResult result;
  result.init = init;
  auto record = [&](double step_norm, double tau) {
    if (!cfg.record_trace) return;
    TraceEntry e;
    e.step_norm = step_norm;
    e.threshold = tau;
    for (double b : state.beta) e.support_size += b != 0.0 ? 1 : 0;
    if (truth) {
      const ErrorReport rep = evaluate(state.beta, truth->beta_star, truth->support);
      e.dist = rep.dist;
      e.cosine_error = rep.cosine_error;
      e.support_ok = rep.support_contained;
    } else {
      e.dist = e.cosine_error = std::nan("");
    }
    result.trace->entries.push_back(e);
  };
  if (cfg.record_trace) {
    result.trace.emplace();
    result.trace->entries.reserve(cfg.max_iter + 1);
  }
  record(0.0, 0.0);

  while (state.iteration < cfg.max_iter) {
    StepOutcome next = step_impl(data, state, cfg);
    const double step_norm = norm(subtract(next.state.beta, state.beta));
    state = std::move(next.state);
    if (norm(state.beta) == 0.0)
      throw Error(Errc::degenerate_iterate,
                  "iterate collapsed to zero at iteration " + std::to_string(state.iteration));
    record(step_norm, next.tau);
    if (cfg.early_stop && step_norm <= cfg.tol) {
      result.converged = true;
      break;
    }
  }

  result.iterations = state.iteration;
  result.beta_hat = scaled(state.beta, 1.0 / norm(state.beta));
  return result;
}

}  // namespace sparsepr
