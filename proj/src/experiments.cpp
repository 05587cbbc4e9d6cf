#include "sparsepr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "sparsepr/error.hpp"
#include "sparsepr/io.hpp"
#include "sparsepr/metrics.hpp"

namespace sparsepr {

double inv_snr(std::size_t s, std::size_t p, std::size_t n) {
  return static_cast<double>(s) * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t link_index, std::size_t s, std::size_t n, std::size_t trial) {
  return hash_words({seed, link_index, s, n, trial});
}

std::size_t link_index(const std::string& name) {
  const auto& links = link_registry();
  for (std::size_t k = 0; k < links.size(); ++k)
    if (links[k].name == name) return k;
  throw Error(Errc::invalid_config, "unknown link '" + name + "'");
}

TrialOutcome run_trial(const SimConfig& cfg, const InitConfig& init_cfg, const TwfConfig& twf_cfg) {
  RngStream model_rng(cfg.seed, 0);
  RngStream init_rng(cfg.seed, 1);
  TrialOutcome out;
  out.truth = generate_signal(cfg, model_rng);
  const Dataset data = sample_dataset(cfg, out.truth, model_rng);
  const InitOutput init = initialize(data, init_cfg, init_rng);
  out.result = run(data, init, twf_cfg, &out.truth);
  return out;
}

void parallel_for(std::size_t count, std::size_t parallelism, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(parallelism, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<std::size_t> geometric_grid(std::size_t lo, std::size_t hi, std::size_t count) {
  if (count == 0 || lo == 0 || hi < lo) throw Error(Errc::invalid_config, "geometric_grid: need 1 <= lo <= hi, count >= 1");
  if (count == 1) return {lo};
  std::vector<std::size_t> out;
  const double ratio = std::pow(static_cast<double>(hi) / static_cast<double>(lo), 1.0 / static_cast<double>(count - 1));
  for (std::size_t k = 0; k < count; ++k) {
    const auto v = static_cast<std::size_t>(std::llround(static_cast<double>(lo) * std::pow(ratio, static_cast<double>(k))));
    if (out.empty() || v != out.back()) out.push_back(v);
  }
  out.back() = hi;
  return out;
}

std::vector<ExperimentRecord> run_fig1(const Fig1Config& cfg) {
  if (cfg.links.empty() || cfg.s_values.empty() || cfg.n_values.empty())
    throw Error(Errc::invalid_config, "fig1: links, s values and n values must be non-empty");
  for (std::size_t n : cfg.n_values)
    if (n < 2) throw Error(Errc::invalid_config, "fig1: every n must be >= 2");
  for (const auto& name : cfg.links) link_index(name);
  cfg.init.validate();
  cfg.twf.validate();

  std::vector<ExperimentRecord> records;
  for (const auto& link : cfg.links)
    for (std::size_t s : cfg.s_values)
      for (std::size_t n : cfg.n_values)
        for (std::size_t t = 0; t < cfg.trials; ++t) {
          ExperimentRecord r;
          r.trial = t;
          r.link = link;
          r.p = cfg.p;
          r.s = s;
          r.n = n;
          r.inv_snr = inv_snr(s, cfg.p, n);
          r.seed = trial_seed(cfg.seed, link_index(link), s, n, t);
          records.push_back(std::move(r));
        }

  TwfConfig twf = cfg.twf;
  twf.record_trace = true;
  parallel_for(records.size(), cfg.parallelism, [&](std::size_t i) {
    ExperimentRecord& r = records[i];
    SimConfig sim{cfg.p, r.s, r.n, r.link, cfg.sigma, r.seed};
    try {
      const TrialOutcome out = run_trial(sim, cfg.init, twf);
      const ErrorReport rep = evaluate(out.result.beta_hat, out.truth.beta_star, out.truth.support);
      r.cosine_error = rep.cosine_error;
      r.dist = rep.dist;
      r.iterations = out.result.iterations;
      r.support_ok_all_iters = std::all_of(out.result.trace->entries.begin(), out.result.trace->entries.end(),
                                           [](const TraceEntry& e) { return e.support_ok; });
    } catch (const std::exception& e) {
      r.cosine_error = r.dist = std::nan("");
      r.error = e.what();
    }
  });

  std::stable_sort(records.begin(), records.end(), [](const ExperimentRecord& a, const ExperimentRecord& b) {
    return std::tie(a.link, a.s, a.n, a.trial) < std::tie(b.link, b.s, b.n, b.trial);
  });
  return records;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::dimension_mismatch, "fit_line: x and y differ in length");
  const std::size_t m = x.size();
  LinearFit fit;
  fit.points = m;
  if (m < 2) throw Error(Errc::invalid_input, "fit_line: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(Errc::invalid_input, "fit_line: x values are all equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

Fig2Result run_fig2(const Fig2Config& cfg) {
  if (cfg.links.empty()) throw Error(Errc::invalid_config, "fig2: links must be non-empty");
  if (cfg.report_lo < 1 || cfg.report_lo > cfg.report_hi || cfg.report_hi > cfg.total_iters)
    throw Error(Errc::invalid_config, "fig2: report range must lie in [1, total_iters]");
  if (cfg.n < 2) throw Error(Errc::invalid_config, "fig2: n must be >= 2");
  for (const auto& name : cfg.links) link_index(name);
  cfg.init.validate();

  TwfConfig twf = cfg.twf;
  twf.max_iter = cfg.total_iters;
  twf.early_stop = false;
  twf.record_trace = true;
  twf.validate();

  struct TrialRows {
    std::vector<ConvergenceRecord> rows;
    std::size_t support_ok = 0;
    std::size_t support_pairs = 0;
    std::string error;
  };
  const std::size_t per_link = cfg.trials;
  std::vector<TrialRows> results(cfg.links.size() * per_link);

  parallel_for(results.size(), cfg.parallelism, [&](std::size_t i) {
    const std::string& link = cfg.links[i / per_link];
    const std::size_t trial = i % per_link;
    SimConfig sim{cfg.p, cfg.s, cfg.n, link, cfg.sigma, trial_seed(cfg.seed, link_index(link), cfg.s, cfg.n, trial)};
    TrialRows& out = results[i];
    try {
      const TrialOutcome outcome = run_trial(sim, cfg.init, twf);
      const auto& entries = outcome.result.trace->entries;
      const double err_final = entries[cfg.total_iters].cosine_error;
      for (std::size_t t = cfg.report_lo; t <= cfg.report_hi; ++t) {
        const double gap = entries[t].cosine_error - err_final;
        if (gap > 0.0) out.rows.push_back({trial, link, t, entries[t].cosine_error, std::log(gap)});
      }
      for (const TraceEntry& e : entries) out.support_ok += e.support_ok ? 1 : 0;
      out.support_pairs = entries.size();
    } catch (const std::exception& e) {
      out.error = link + " trial " + std::to_string(trial) + ": " + e.what();
    }
  });

  Fig2Result res;
  for (std::size_t l = 0; l < cfg.links.size(); ++l) {
    Fig2LinkSummary summary;
    summary.link = cfg.links[l];
    std::map<std::size_t, std::vector<double>> by_t;
    for (std::size_t trial = 0; trial < per_link; ++trial) {
      const TrialRows& tr = results[l * per_link + trial];
      if (!tr.error.empty()) {
        ++summary.failed_trials;
        res.failures.push_back(tr.error);
        continue;
      }
      summary.support_ok_pairs += tr.support_ok;
      summary.support_pairs += tr.support_pairs;
      for (const auto& row : tr.rows) {
        res.rows.push_back(row);
        by_t[row.t].push_back(row.log_gap);
      }
    }
    Vec xs, ys;
    std::vector<Fig2Aggregate> agg;
    for (const auto& [t, values] : by_t) {
      Fig2Aggregate a;
      a.link = summary.link;
      a.t = t;
      a.count = values.size();
      for (double v : values) a.mean += v;
      a.mean /= static_cast<double>(a.count);
      if (a.count > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - a.mean) * (v - a.mean);
        a.std_error = std::sqrt(ss / static_cast<double>(a.count - 1)) / std::sqrt(static_cast<double>(a.count));
      }
      xs.push_back(static_cast<double>(t));
      ys.push_back(a.mean);
      agg.push_back(a);
    }
    if (xs.size() >= 2) summary.fit = fit_line(xs, ys);
    else summary.fit.points = xs.size();
    res.aggregate.insert(res.aggregate.end(), agg.begin(), agg.end());
    res.summary.push_back(summary);
  }
  std::stable_sort(res.rows.begin(), res.rows.end(), [](const ConvergenceRecord& a, const ConvergenceRecord& b) {
    return std::tie(a.link, a.trial, a.t) < std::tie(b.link, b.trial, b.t);
  });
  std::stable_sort(res.aggregate.begin(), res.aggregate.end(), [](const Fig2Aggregate& a, const Fig2Aggregate& b) {
    return std::tie(a.link, a.t) < std::tie(b.link, b.t);
  });
  return res;
}

void reconstruct(const PartialSvd& svd, std::span<const double> beta_hat, ImageDemoResult& out) {
  const std::size_t rank = svd.singular_values.size();
  if (beta_hat.size() < rank) throw Error(Errc::dimension_mismatch, "reconstruct: fewer weights than components");
  const double alpha_norm = norm(svd.singular_values);
  Vec weights(rank);
  for (std::size_t j = 0; j < rank; ++j) weights[j] = alpha_norm * beta_hat[j];
  out.truncation = low_rank_reconstruction(svd);
  out.reconstruction = low_rank_reconstruction(svd, weights);

  double err2 = 0.0;
  const auto a = out.reconstruction.data();
  const auto b = out.truncation.data();
  for (std::size_t i = 0; i < a.size(); ++i) err2 += (a[i] - b[i]) * (a[i] - b[i]);
  for (std::size_t j = rank; j < beta_hat.size(); ++j) err2 += alpha_norm * alpha_norm * beta_hat[j] * beta_hat[j];
  out.relative_error = std::sqrt(err2) / frobenius(out.truncation);
}

ImageDemoResult run_image_demo(const ImageDemoConfig& cfg, const Mat& image, RngStream& rng) {
  if (cfg.rank_s == 0 || cfg.rank_s > std::min(image.rows(), image.cols()))
    throw Error(Errc::invalid_config, "image: rank_s must be in [1, min(image dims)]");
  if (!(cfg.n_multiplier > 0.0)) throw Error(Errc::invalid_config, "image: n multiplier must be > 0");

  ImageDemoResult out;
  out.p = image.rows();
  out.svd = deflated_svd(image, cfg.rank_s, kDefaultPowerTol, kDefaultPowerMaxIter, rng);
  const double alpha_norm = norm(out.svd.singular_values);
  if (alpha_norm == 0.0) throw Error(Errc::invalid_input, "image: image has no nonzero singular values");

  GroundTruth truth;
  truth.beta_star.assign(out.p, 0.0);
  for (std::size_t j = 0; j < cfg.rank_s; ++j) {
    truth.beta_star[j] = out.svd.singular_values[j] / alpha_norm;
    if (truth.beta_star[j] != 0.0) truth.support.push_back(j);
  }
  out.beta_star = truth.beta_star;

  const double s = static_cast<double>(cfg.rank_s);
  out.n = static_cast<std::size_t>(std::ceil(cfg.n_multiplier * s * s * std::log(static_cast<double>(out.p))));
  SimConfig sim{out.p, cfg.rank_s, out.n, cfg.link, cfg.sigma, cfg.seed};
  RngStream model_rng(cfg.seed, 0);
  RngStream init_rng(cfg.seed, 1);
  const Dataset data = sample_dataset(sim, truth, model_rng);
  const InitOutput init = initialize(data, cfg.init, init_rng);
  TwfConfig twf = cfg.twf;
  twf.early_stop = false;
  const EstimationResult est = run(data, init, twf, &truth);

  out.beta_hat = est.beta_hat;
  if (dot(out.beta_hat, out.beta_star) < 0.0)
    for (double& b : out.beta_hat) b = -b;
  out.alignment = std::abs(dot(out.beta_hat, out.beta_star));
  reconstruct(out.svd, out.beta_hat, out);
  return out;
}

ImageDemoResult run_image_demo(const ImageDemoConfig& cfg, RngStream& rng) {
  return run_image_demo(cfg, load_pgm(cfg.image_path), rng);
}

}  // namespace sparsepr
