#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sparsepr/error.hpp"
#include "sparsepr/metrics.hpp"
#include "sparsepr/twf.hpp"

using namespace sparsepr;

namespace {

Dataset small_data(std::size_t n, std::size_t p, const std::string& link, RngStream& rng) {
  Dataset d{Mat(n, p), Vec(n)};
  for (double& v : d.x.data()) v = rng.gaussian();
  Vec beta = gaussian_vector(rng, p);
  Vec noise = gaussian_vector(rng, n);
  d.y = apply_link(d.x, beta, noise, find_link(link));
  return d;
}

struct Problem {
  GroundTruth truth;
  Dataset data;
};

Problem simulate(const std::string& link, std::size_t p, std::size_t s, std::size_t n, double sigma, std::uint64_t seed) {
  SimConfig c;
  c.p = p;
  c.s = s;
  c.n = n;
  c.link = link;
  c.sigma = sigma;
  RngStream rng(seed, 0);
  GroundTruth t = generate_signal(c, rng);
  Dataset d = sample_dataset(c, t, rng);
  return {std::move(t), std::move(d)};
}

}  // namespace

TEST(Twf, LossMatchesNaiveSum) {
  RngStream rng(1, 0);
  for (int t = 0; t < 20; ++t) {
    Dataset d = small_data(12, 6, "h3", rng);
    Vec beta = gaussian_vector(rng, 6);
    const double mu = rng.gaussian();
    EXPECT_NEAR(loss(d, beta, mu), oracle::naive_loss(d.x, d.y, beta, mu),
                1e-12 * std::max(1.0, oracle::naive_loss(d.x, d.y, beta, mu)));
  }
}

TEST(Twf, GradientMatchesExplicitProjection) {
  RngStream rng(2, 0);
  for (int t = 0; t < 20; ++t) {
    Dataset d = small_data(10, 7, "h2", rng);
    Vec beta = gaussian_vector(rng, 7);
    beta[t % 7] = 0.0;  // exercise the sparse path
    const double mu = mean(d.y);
    Vec g = gradient(d, beta, mu);
    Vec ref = oracle::naive_gradient(d.x, d.y, beta, mu);
    for (std::size_t j = 0; j < 7; ++j) EXPECT_LE(oracle::rel_error(g[j], ref[j]), 1e-12);
  }
}

TEST(Twf, GradientMatchesFiniteDifferences) {
  RngStream rng(3, 0);
  for (const char* link : {"square", "h1", "h2", "h3"}) {
    for (int t = 0; t < 10; ++t) {
      Dataset d = small_data(12, 8, link, rng);
      Vec beta = gaussian_vector(rng, 8);
      const double mu = mean(d.y);
      Vec g = gradient(d, beta, mu);
      Vec fd = oracle::fd_gradient(d.x, d.y, beta, mu, 1e-5);
      for (std::size_t j = 0; j < 8; ++j) EXPECT_LE(oracle::rel_error(g[j], fd[j]), 1e-5) << link << " " << j;
    }
  }
}

TEST(Twf, ThresholdMatchesFormula) {
  RngStream rng(4, 0);
  for (int t = 0; t < 10; ++t) {
    Dataset d = small_data(11, 5, "h1", rng);
    Vec beta = gaussian_vector(rng, 5);
    const double mu = mean(d.y);
    EXPECT_NEAR(threshold_value(d, beta, mu, 15.0), oracle::naive_threshold(d.x, d.y, beta, mu, 15.0),
                1e-12 * oracle::naive_threshold(d.x, d.y, beta, mu, 15.0));
  }
}

TEST(Twf, XiAndShapes) {
  EXPECT_DOUBLE_EQ(xi_n(2.0, Vec{1, 1}), 0.0);
  RngStream rng(5, 0);
  Dataset d = small_data(5, 3, "h1", rng);
  EXPECT_THROW(loss(d, Vec{1, 2}, 0.0), Error);
  EXPECT_THROW(gradient(d, Vec{1, 2, 3, 4}, 0.0), Error);
}

TEST(Twf, HardThreshold) {
  Vec w{0.5, -0.1, 0.2, -0.3};
  EXPECT_EQ(hard_threshold(w, 0.2), (Vec{0.5, 0, 0.2, -0.3}));
  EXPECT_EQ(hard_threshold(w, 0.0), w);
  EXPECT_EQ(hard_threshold(w, 10.0), (Vec{0, 0, 0, 0}));
  EXPECT_THROW(hard_threshold(w, -1.0), Error);
  EXPECT_THROW(hard_threshold(w, NAN), Error);
}

TEST(Twf, StepIsThresholdedGradientStep) {
  RngStream rng(6, 0);
  Dataset d = small_data(12, 6, "h1", rng);
  TwfState st{gaussian_vector(rng, 6), 3, mean(d.y), 1};
  TwfConfig cfg;
  cfg.eta = 0.01;
  cfg.kappa = 2.0;
  TwfState next = step(d, st, cfg);
  Vec g = oracle::naive_gradient(d.x, d.y, st.beta, st.mu_n);
  const double tau = oracle::naive_threshold(d.x, d.y, st.beta, st.mu_n, cfg.kappa);
  EXPECT_EQ(next.iteration, 4u);
  for (std::size_t j = 0; j < 6; ++j) {
    const double w = st.beta[j] - cfg.eta * g[j];
    if (std::abs(std::abs(w) - cfg.eta * tau) < 1e-12) continue;
    EXPECT_NEAR(next.beta[j], std::abs(w) >= cfg.eta * tau ? w : 0.0, 1e-12);
  }
}

TEST(Twf, NegativeSignStepUsesFlippedResponses) {
  RngStream rng(7, 0);
  Dataset d = small_data(10, 4, "h2", rng);
  Dataset flipped = d;
  for (double& v : flipped.y) v = -v;
  Vec beta = gaussian_vector(rng, 4);
  TwfConfig cfg;
  TwfState a{beta, 0, -mean(d.y), -1};
  TwfState b{beta, 0, -mean(d.y), 1};
  EXPECT_EQ(step(d, a, cfg).beta, step(flipped, b, cfg).beta);
}

TEST(Twf, StepRejectsNonFinite) {
  RngStream rng(8, 0);
  Dataset d = small_data(5, 3, "h1", rng);
  TwfState st{Vec{1, NAN, 0}, 0, 0.0, 1};
  try {
    step(d, st, TwfConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::numeric_overflow);
  }
}

TEST(Twf, ConfigValidation) {
  for (auto mutate : {+[](TwfConfig& c) { c.kappa = 0; }, +[](TwfConfig& c) { c.eta = -1; },
                      +[](TwfConfig& c) { c.tol = NAN; }}) {
    TwfConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), Error);
  }
  EXPECT_NEAR(kTheoreticalKappa, std::sqrt(80.0), 1e-15);
}

TEST(Twf, RunRecoversSquareLink) {
  Problem pr = simulate("square", 100, 3, 3000, 0.0, 11);
  RngStream rng(11, 1);
  InitOutput init = initialize(pr.data, InitConfig{}, rng);
  TwfConfig cfg;
  cfg.record_trace = true;
  EstimationResult r = run(pr.data, init, cfg, &pr.truth);
  EXPECT_NEAR(norm(r.beta_hat), 1.0, 1e-12);
  EXPECT_LT(cosine_error(r.beta_hat, pr.truth.beta_star), 1e-3);
  ASSERT_TRUE(r.trace.has_value());
  EXPECT_EQ(r.trace->entries.size(), r.iterations + 1);
  EXPECT_EQ(r.trace->entries.front().step_norm, 0.0);
  EXPECT_EQ(r.trace->entries.front().threshold, 0.0);
  if (r.converged) EXPECT_LE(r.trace->entries.back().step_norm, cfg.tol);
}

TEST(Twf, RunWithoutEarlyStopTakesAllIterations) {
  Problem pr = simulate("h1", 80, 3, 1500, 1.0, 12);
  RngStream rng(12, 1);
  InitOutput init = initialize(pr.data, InitConfig{}, rng);
  TwfConfig cfg;
  cfg.early_stop = false;
  cfg.max_iter = 57;
  cfg.record_trace = true;
  EstimationResult r = run(pr.data, init, cfg);
  EXPECT_EQ(r.iterations, 57u);
  EXPECT_FALSE(r.converged);
  ASSERT_EQ(r.trace->entries.size(), 58u);
  EXPECT_TRUE(std::isnan(r.trace->entries[5].cosine_error));
  EXPECT_FALSE(r.trace->entries[5].support_ok);
}

TEST(Twf, RunEqualsRepeatedSteps) {
  Problem pr = simulate("h2", 120, 4, 2000, 1.0, 13);
  RngStream rng(13, 1);
  InitOutput init = initialize(pr.data, InitConfig{}, rng);
  TwfConfig cfg;
  cfg.early_stop = false;
  cfg.max_iter = 40;
  cfg.record_trace = true;
  EstimationResult r = run(pr.data, init, cfg, &pr.truth);

  TwfState st{init.beta0, 0, mean(pr.data.y), 1};
  ASSERT_GT(init.rho_n, 0.0);
  for (std::size_t k = 1; k <= 40; ++k) {
    TwfState next = step(pr.data, st, cfg);
    const auto& e = r.trace->entries[k];
    EXPECT_DOUBLE_EQ(e.step_norm, norm(subtract(next.beta, st.beta)));
    EXPECT_NEAR(e.threshold, oracle::naive_threshold(pr.data.x, pr.data.y, st.beta, st.mu_n, cfg.kappa),
                1e-10 * e.threshold);
    std::size_t nz = 0;
    for (double b : next.beta) nz += b != 0.0;
    EXPECT_EQ(e.support_size, nz);
    EXPECT_EQ(e.support_ok, support_contained(next.beta, pr.truth.support));
    st = next;
  }
  EXPECT_EQ(r.beta_hat, scaled(st.beta, 1.0 / norm(st.beta)));
}

TEST(Twf, NegativeRhoFlipsResponses) {
  // y = -u^2: rho < 0; the estimator must still find the direction.
  SimConfig c;
  c.p = 60;
  c.s = 3;
  c.n = 3000;
  c.sigma = 0.0;
  RngStream g(14, 0);
  GroundTruth t = generate_signal(c, g);
  LinkFn neg{"neg", [](double u, double) { return -u * u; }};
  Dataset d = sample_dataset(c, neg, t, g);
  RngStream rng(14, 1);
  InitOutput init = initialize(d, InitConfig{}, rng);
  EXPECT_LT(init.rho_n, 0.0);
  EstimationResult r = run(d, init, TwfConfig{}, &t);
  EXPECT_LT(cosine_error(r.beta_hat, t.beta_star), 1e-3);
}

TEST(Twf, RunRejectsDegenerateInputs) {
  Problem pr = simulate("h1", 20, 2, 200, 1.0, 15);
  InitOutput init;
  init.beta0.assign(20, 0.0);
  init.rho_n = 1.0;
  try {
    run(pr.data, init, TwfConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_iterate);
  }
  init.rho_n = 0.0;
  init.beta0[0] = 1.0;
  try {
    run(pr.data, init, TwfConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_signal);
  }
  init.rho_n = 1.0;
  GroundTruth wrong{Vec(5, 0.0), {0}};
  EXPECT_THROW(run(pr.data, init, TwfConfig{}, &wrong), Error);
}

TEST(Twf, CollapseReportsIteration) {
  Problem pr = simulate("h1", 20, 2, 200, 1.0, 16);
  InitOutput init;
  init.beta0.assign(20, 0.0);
  init.beta0[3] = 1e-3;
  init.rho_n = 1.0;
  TwfConfig cfg;
  cfg.kappa = 1e6;
  try {
    run(pr.data, init, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_iterate);
    EXPECT_NE(std::string(e.what()).find("iteration 1"), std::string::npos);
  }
}
