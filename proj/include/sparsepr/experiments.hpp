#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sparsepr/init.hpp"
#include "sparsepr/linalg.hpp"
#include "sparsepr/model.hpp"
#include "sparsepr/twf.hpp"

namespace sparsepr {

struct ExperimentRecord {
  std::size_t trial = 0;
  std::string link;
  std::size_t p = 0, s = 0, n = 0;
  double inv_snr = 0.0;  // s sqrt(log p / n)
  double cosine_error = 0.0;
  double dist = 0.0;
  std::size_t iterations = 0;
  bool support_ok_all_iters = false;
  std::uint64_t seed = 0;
  std::string error;  // empty unless the trial failed; metrics are NaN then
};

struct ConvergenceRecord {
  std::size_t trial = 0;
  std::string link;
  std::size_t t = 0;
  double err_t = 0.0;
  double log_gap = 0.0;  // log(Err_t - Err_T); rows with Err_t <= Err_T are not emitted
};

double inv_snr(std::size_t s, std::size_t p, std::size_t n);

/// Per-trial seed from (seed, link registry index, s, n, trial).
std::uint64_t trial_seed(std::uint64_t seed, std::size_t link_index, std::size_t s, std::size_t n, std::size_t trial);

/// Index of `name` in link_registry(); throws invalid-config when absent.
std::size_t link_index(const std::string& name);

struct TrialOutcome {
  GroundTruth truth;
  EstimationResult result;
};

/// One full pipeline run with cfg.seed as the trial seed: signal and data from
/// stream (seed, 0), the initializer's power iteration from stream (seed, 1).
TrialOutcome run_trial(const SimConfig& cfg, const InitConfig& init_cfg, const TwfConfig& twf_cfg);

/// Runs task(i) for i in [0, count) on `parallelism` workers. Exceptions from
/// a task are rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t parallelism, const std::function<void(std::size_t)>& task);

struct Fig1Config {
  std::vector<std::string> links{"h1", "h2", "h3"};
  std::size_t p = 1000;
  std::vector<std::size_t> s_values{5, 8, 10};
  std::vector<std::size_t> n_values;
  std::size_t trials = 100;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
  InitConfig init;
  TwfConfig twf;
};

/// Geometric grid of `count` sample sizes from lo to hi inclusive, rounded.
std::vector<std::size_t> geometric_grid(std::size_t lo, std::size_t hi, std::size_t count);

/// One record per (link, s, n, trial), sorted in that order.
std::vector<ExperimentRecord> run_fig1(const Fig1Config& cfg);

struct Fig2Config {
  std::vector<std::string> links{"h1", "h2", "h3"};
  std::size_t p = 1000;
  std::size_t s = 5;
  std::size_t n = 863;
  std::size_t trials = 50;
  std::size_t total_iters = 1000;
  std::size_t report_lo = 101;
  std::size_t report_hi = 300;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
  InitConfig init;
  TwfConfig twf;  // max_iter, early_stop and record_trace are overridden
};

struct Fig2Aggregate {
  std::string link;
  std::size_t t = 0;
  double mean = 0.0;
  double std_error = 0.0;  // sample sd / sqrt(count); 0 for one trial
  std::size_t count = 0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares of y on x. Needs at least two distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct Fig2LinkSummary {
  std::string link;
  LinearFit fit;                  // mean log_gap against t over the report range
  std::size_t support_ok_pairs = 0;  // (trial, t) with supp(beta_t) inside supp(beta*), t in [0, T]
  std::size_t support_pairs = 0;
  std::size_t failed_trials = 0;
};

struct Fig2Result {
  std::vector<ConvergenceRecord> rows;  // sorted by (link, trial, t)
  std::vector<Fig2Aggregate> aggregate;  // sorted by (link, t)
  std::vector<Fig2LinkSummary> summary;  // in cfg.links order
  std::vector<std::string> failures;
};

Fig2Result run_fig2(const Fig2Config& cfg);

struct ImageDemoConfig {
  std::string image_path;
  std::size_t rank_s = 20;
  double n_multiplier = 10.0;  // n = ceil(mult * s^2 * log p)
  double sigma = 1.0;
  std::string link = "h2";
  std::uint64_t seed = 0;
  InitConfig init;
  TwfConfig twf;  // the demo runs exactly twf.max_iter iterations
};

struct ImageDemoResult {
  std::size_t p = 0;
  std::size_t n = 0;
  Vec beta_star;
  Vec beta_hat;      // sign-aligned so <beta_hat, beta_star> >= 0
  double alignment = 0.0;
  Mat truncation;      // best rank-s approximation M_s
  Mat reconstruction;  // ||alpha|| sum_{j < s} beta_hat_j u_j v_j^T
  double relative_error = 0.0;  // ||M_hat - M_s||_F / ||M_s||_F, off-support weights included
  PartialSvd svd;
};

/// M_hat for given weights on the leading components, plus the relative
/// Frobenius error against M_s. Weights beyond the computed components add
/// their squared mass through the orthonormality of singular vectors.
void reconstruct(const PartialSvd& svd, std::span<const double> beta_hat, ImageDemoResult& out);

ImageDemoResult run_image_demo(const ImageDemoConfig& cfg, const Mat& image, RngStream& rng);

/// Loads cfg.image_path as PGM and runs the demo.
ImageDemoResult run_image_demo(const ImageDemoConfig& cfg, RngStream& rng);

}  // namespace sparsepr
