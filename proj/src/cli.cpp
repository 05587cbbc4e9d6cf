#include "sparsepr/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparsepr/error.hpp"
#include "sparsepr/experiments.hpp"
#include "sparsepr/metrics.hpp"

namespace sparsepr {

namespace {

const std::vector<std::string> kCommands{"simulate", "fig1", "fig2", "image", "verify", "gradcheck"};

// Flag name (without dashes) and the help line shown by --help.
const std::vector<std::pair<std::string, std::string>> kValueFlags{
    {"p", "ambient dimension"},
    {"s", "sparsity; comma-separated list for fig1"},
    {"n", "sample size; comma-separated list for fig1"},
    {"link", "link name (square, h1, h2, h3); comma-separated list for fig1/fig2"},
    {"sigma", "noise standard deviation"},
    {"gamma", "screening constant"},
    {"kappa", "threshold constant"},
    {"eta", "step size"},
    {"tol", "stopping tolerance on ||beta_t - beta_{t-1}||"},
    {"max-iter", "iteration cap (fig2 and image: exact iteration count)"},
    {"trials", "trials per configuration (verify: seeds per statistical probe)"},
    {"seed", "64-bit master seed"},
    {"out", "output path (default stdout)"},
    {"format", "csv or json"},
    {"parallelism", "worker threads"},
    {"rank-s", "image demo rank"},
    {"n-mult", "image demo sample multiplier: n = ceil(mult * s^2 * log p)"},
    {"image", "image demo PGM path"},
    {"report-lo", "fig2 first reported iteration"},
    {"report-hi", "fig2 last reported iteration"},
};

[[noreturn]] void usage(const std::string& msg) { throw UsageError(msg, 2); }

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) usage("invalid value '" + text + "' for " + key);
  return value;
}

double parse_real(const std::string& key, const std::string& text) {
  const double v = parse_number<double>(key, text);
  if (!std::isfinite(v)) usage("non-finite value for " + key);
  return v;
}

std::vector<std::string> split_list(const std::string& key, const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) usage("empty list entry for " + key);
    out.push_back(item);
  }
  if (out.empty()) usage("empty list for " + key);
  return out;
}

std::vector<std::size_t> parse_counts(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(key, text)) out.push_back(parse_number<std::size_t>(key, item));
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  usage("invalid boolean '" + text + "' for " + key);
}

/// Single setter shared by config-file keys and flags; `key` uses underscores.
void apply(CliConfig& c, const std::string& key, const std::string& v) {
  if (key == "p") c.p = parse_number<std::size_t>(key, v);
  else if (key == "s") c.s_values = parse_counts(key, v);
  else if (key == "n") c.n_values = parse_counts(key, v);
  else if (key == "link") c.links = split_list(key, v);
  else if (key == "sigma") c.sigma = parse_real(key, v);
  else if (key == "gamma") c.init.gamma = parse_real(key, v);
  else if (key == "kappa") c.twf.kappa = parse_real(key, v);
  else if (key == "eta") c.twf.eta = parse_real(key, v);
  else if (key == "tol") c.twf.tol = parse_real(key, v);
  else if (key == "max_iter") c.twf.max_iter = parse_number<std::size_t>(key, v);
  else if (key == "trials") c.trials = parse_number<std::size_t>(key, v);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "split") c.init.split = parse_bool(key, v);
  else if (key == "out") c.out_path = v;
  else if (key == "format") {
    if (v != "csv" && v != "json") usage("format must be csv or json");
    c.format = parse_format(v);
  } else if (key == "parallelism") {
    c.parallelism = parse_number<std::size_t>(key, v);
    if (c.parallelism == 0) usage("parallelism must be >= 1");
  } else if (key == "rank_s") c.rank_s = parse_number<std::size_t>(key, v);
  else if (key == "n_mult") c.n_mult = parse_real(key, v);
  else if (key == "image") c.image_path = v;
  else if (key == "report_lo") c.report_lo = parse_number<std::size_t>(key, v);
  else if (key == "report_hi") c.report_hi = parse_number<std::size_t>(key, v);
  else usage("unknown key '" + key + "'");
}

std::string json_to_text(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return format_real(v.get<double>());
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (item.is_array() || item.is_object()) usage("nested value for config key '" + key + "'");
      if (!out.empty()) out += ',';
      out += json_to_text(key, item);
    }
    return out;
  }
  usage("unsupported value for config key '" + key + "'");
}

void apply_config_file(CliConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) usage("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    usage("config file '" + path + "': " + e.what());
  }
  if (!doc.is_object()) usage("config file '" + path + "' must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "config") usage("config file may not name another config file");
    apply(c, key, json_to_text(key, value));
  }
}

std::string underscore(std::string s) {
  std::replace(s.begin(), s.end(), '-', '_');
  return s;
}

}  // namespace

CliConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Sparse phase retrieval under an unknown link: spectral initialization and thresholded gradient flow",
               "sparsepr"};
  std::string command;
  app.add_option("command", command, "simulate | fig1 | fig2 | image | verify | gradcheck")
      ->required()
      ->check(CLI::IsMember(kCommands));
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  for (const auto& [name, help] : kValueFlags) options.emplace_back(name, app.add_option("--" + name, values[name], help));
  bool split = false;
  CLI::Option* split_opt = app.add_flag("--split", split, "three-block sample splitting in the initializer");
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw UsageError(app.help(), 0);
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\n" + app.help(), 2);
  }

  CliConfig cfg;
  cfg.command = command;
  cfg.parallelism = std::max(1u, std::thread::hardware_concurrency());
  cfg.config_path = config_path;
  try {
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (const auto& [name, opt] : options)
      if (opt->count() > 0) apply(cfg, underscore(name), values[name]);
    if (split_opt->count() > 0) cfg.init.split = split;
  } catch (const UsageError& e) {
    throw UsageError(std::string(e.what()) + "\n" + app.help(), 2);
  }
  return cfg;
}

namespace {

nlohmann::json real_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

void emit(const CliConfig& cfg, std::ostream& out, auto write) {
  if (cfg.out_path.empty()) {
    write(out);
  } else {
    std::ofstream file(cfg.out_path, std::ios::binary);
    if (!file) throw Error(Errc::io_error, "cannot open '" + cfg.out_path + "' for writing");
    write(file);
    file.flush();
    if (!file) throw Error(Errc::io_error, "write to '" + cfg.out_path + "' failed");
  }
}

int cmd_simulate(const CliConfig& cfg, std::ostream& out) {
  const std::string link = cfg.links.empty() ? "h1" : cfg.links.front();
  SimConfig sim{cfg.p, cfg.s_values.front(), cfg.n_values.empty() ? 1000 : cfg.n_values.front(), link, cfg.sigma,
                cfg.seed};
  const TrialOutcome o = run_trial(sim, cfg.init, cfg.twf);
  const ErrorReport rep = evaluate(o.result.beta_hat, o.truth.beta_star, o.truth.support);
  nlohmann::json beta = nlohmann::json::array();
  for (std::size_t j = 0; j < o.result.beta_hat.size(); ++j)
    if (o.result.beta_hat[j] != 0.0) beta.push_back({{"index", j}, {"value", o.result.beta_hat[j]}});
  nlohmann::json doc = {
      {"seed", cfg.seed},
      {"p", sim.p},
      {"s", sim.s},
      {"n", sim.n},
      {"link", link},
      {"sigma", sim.sigma},
      {"iterations", o.result.iterations},
      {"converged", o.result.converged},
      {"cosine_error", real_or_null(rep.cosine_error)},
      {"dist", real_or_null(rep.dist)},
      {"support_contained", rep.support_contained},
      {"true_support", o.truth.support},
      {"init",
       {{"s_hat", o.result.init.s_hat},
        {"rho_n", o.result.init.rho_n},
        {"mu_n", o.result.init.mu_n},
        {"eigenvalue", o.result.init.eigenvalue},
        {"degraded", o.result.init.degraded}}},
      {"beta_hat_nonzeros", beta},
  };
  emit(cfg, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  return 0;
}

int cmd_fig1(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  Fig1Config f;
  if (!cfg.links.empty()) f.links = cfg.links;
  f.p = cfg.p;
  f.s_values = cfg.s_values;
  f.n_values = cfg.n_values.empty() ? geometric_grid(1000, 16000, 5) : cfg.n_values;
  f.trials = cfg.trials == 0 ? 100 : cfg.trials;
  f.sigma = cfg.sigma;
  f.seed = cfg.seed;
  f.parallelism = cfg.parallelism;
  f.init = cfg.init;
  f.twf = cfg.twf;
  const auto records = run_fig1(f);
  std::size_t failed = 0;
  for (const auto& r : records)
    if (!r.error.empty()) ++failed;
  if (failed > 0) err << failed << " of " << records.size() << " trials failed\n";
  emit(cfg, out, [&](std::ostream& os) { write_records(records, os, cfg.format); });
  return 0;
}

int cmd_fig2(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  Fig2Config f;
  if (!cfg.links.empty()) f.links = cfg.links;
  f.p = cfg.p;
  f.s = cfg.s_values.front();
  f.n = cfg.n_values.empty() ? 863 : cfg.n_values.front();
  f.trials = cfg.trials == 0 ? 50 : cfg.trials;
  f.total_iters = cfg.twf.max_iter;
  f.report_lo = cfg.report_lo;
  f.report_hi = cfg.report_hi;
  f.sigma = cfg.sigma;
  f.seed = cfg.seed;
  f.parallelism = cfg.parallelism;
  f.init = cfg.init;
  f.twf = cfg.twf;
  const Fig2Result res = run_fig2(f);
  for (const auto& s : res.summary) {
    char line[256];
    std::snprintf(line, sizeof line, "%s: slope %.6g, R^2 %.4f over %zu points; support ok %zu/%zu; failed %zu\n",
                  s.link.c_str(), s.fit.slope, s.fit.r2, s.fit.points, s.support_ok_pairs, s.support_pairs,
                  s.failed_trials);
    err << line;
  }
  for (const auto& f2 : res.failures) err << "failed: " << f2 << '\n';
  emit(cfg, out, [&](std::ostream& os) { write_records(res.rows, os, cfg.format); });
  return 0;
}

int cmd_image(const CliConfig& cfg, std::ostream& out) {
  if (cfg.image_path.empty()) throw UsageError("image requires --image PATH", 2);
  ImageDemoConfig ic;
  ic.image_path = cfg.image_path;
  ic.rank_s = cfg.rank_s;
  ic.n_multiplier = cfg.n_mult;
  ic.sigma = cfg.sigma;
  ic.link = cfg.links.empty() ? "h2" : cfg.links.front();
  ic.seed = cfg.seed;
  ic.init = cfg.init;
  ic.twf = cfg.twf;
  RngStream rng(cfg.seed, 2);
  const ImageDemoResult res = run_image_demo(ic, rng);
  if (!cfg.out_path.empty()) write_pgm(res.reconstruction, cfg.out_path);
  nlohmann::json doc = {{"p", res.p},
                        {"n", res.n},
                        {"rank_s", ic.rank_s},
                        {"link", ic.link},
                        {"alignment", res.alignment},
                        {"relative_error", res.relative_error},
                        {"singular_values", res.svd.singular_values}};
  out << doc.dump(2) << '\n';
  return 0;
}

int cmd_verify(const CliConfig& cfg, std::ostream& out) {
  const auto reports = run_verify_suite(cfg.seed, cfg.trials == 0 ? 100 : cfg.trials);
  bool all = true;
  char line[512];
  std::snprintf(line, sizeof line, "%-16s %-6s %14s %14s %8s  %s\n", "probe", "result", "observed", "bound",
                "pass", "detail");
  out << line;
  for (const auto& r : reports) {
    all = all && r.passed;
    std::snprintf(line, sizeof line, "%-16s %-6s %14.6g %14.6g %8.3f  %s\n", r.name.c_str(),
                  r.skipped ? "skip" : (r.passed ? "pass" : "FAIL"), r.observed, r.bound, r.pass_fraction,
                  r.detail.c_str());
    out << line;
  }
  return all ? 0 : 1;
}

int cmd_gradcheck(const CliConfig& cfg, std::ostream& out) {
  RngStream rng(cfg.seed, 3);
  const GradcheckReport rep = gradcheck_suite(cfg.trials == 0 ? 100 : cfg.trials, rng);
  out << (rep.passed ? "pass" : "FAIL") << ": " << rep.instances << " instances, max relative error "
      << format_real(rep.max_rel_error) << '\n';
  if (!rep.worst.empty()) out << "worst: " << rep.worst << '\n';
  return rep.passed ? 0 : 1;
}

ProbeReport random_perturbation_bound(std::size_t count, RngStream& rng) {
  ProbeReport agg;
  agg.name = "perturbation-bound";
  agg.bound = 0.0;
  std::size_t ok = 0;
  double worst_margin = INFINITY;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t d = 2 + rng.uniform_index(11);
    Vec v = gaussian_vector(rng, d);
    v = scaled(v, 1.0 / norm(v));
    const double lambda = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.5 + 4.5 * rng.uniform());
    Mat g(d, d);
    for (double& e : g.data()) e = rng.gaussian();
    Mat noise(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) noise(i, j) = g(i, j) + g(j, i);
    const double target = 0.45 * rng.uniform() * std::abs(lambda);
    const double fro = frobenius(noise);
    for (double& e : noise.data()) e *= target / fro;
    const ProbeReport r = check_perturbation_bound(lambda, v, noise, rng);
    if (r.passed) ++ok;
    if (!r.skipped) worst_margin = std::min(worst_margin, r.bound - r.observed);
  }
  agg.seeds_checked = count;
  agg.pass_fraction = static_cast<double>(ok) / static_cast<double>(count);
  agg.passed = ok == count;
  agg.observed = -worst_margin;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu/%zu instances; observed is -(smallest bound margin)", ok, count);
  agg.detail = buf;
  return agg;
}

}  // namespace

std::vector<ProbeReport> run_verify_suite(std::uint64_t seed, std::size_t seeds) {
  std::vector<ProbeReport> out;

  RngStream grad_rng(seed, 10);
  const GradcheckReport g = gradcheck_suite(100, grad_rng);
  ProbeReport gr;
  gr.name = "gradcheck";
  gr.passed = g.passed;
  gr.observed = g.max_rel_error;
  gr.bound = 1e-5;
  gr.seeds_checked = g.instances;
  gr.pass_fraction = g.passed ? 1.0 : 0.0;
  gr.detail = g.worst;
  out.push_back(gr);

  RngStream p21(seed, 11);
  out.push_back(check_population_loss(find_link("square"), 0.0, default_loss_grid(), 200'000, p21, PopulationLoss{2.0, 2.0}));
  const double two_over_pi = 2.0 / std::acos(-1.0);
  out.push_back(check_population_loss(find_link("h1"), 1.0, default_loss_grid(), 200'000, p21,
                             PopulationLoss{2.0 - two_over_pi, std::sqrt(two_over_pi)}));

  RngStream p22(seed, 12);
  for (const auto& [link, sigma] : {std::pair<std::string, double>{"square", 0.0}, {"h3", 1.0}}) {
    SimConfig sim{50, 3, 50'000, link, sigma, seed};
    RngStream data_rng = p22.substream(link_index(link));
    const GroundTruth truth = generate_signal(sim, data_rng);
    const Dataset data = sample_dataset(sim, truth, data_rng);
    const double rho = link == "square" ? 2.0 : true_rho(find_link(link), sigma, 4'000'000, data_rng).value;
    ProbeReport r = check_spiked_moment(data, truth, rho, data_rng);
    r.name += "-" + link;
    out.push_back(r);
  }

  RngStream a1(seed, 13);
  out.push_back(random_perturbation_bound(1000, a1));

  RngStream rip(seed, 14);
  for (auto& r : probe_rip(100, 5, 5000, seeds, rip)) out.push_back(r);

  RngStream mc(seed, 15);
  for (auto& r : probe_mean_concentration(find_link("square"), 1.0, 5, 10'000, seeds, mc, kDefaultK2, 0.99,
                                          LinkMoments{{1.0, 0.0}, {3.0, 0.0}, {2.0, 0.0}}))
    out.push_back(r);
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    const CliConfig cfg = parse_args(args);
    cfg.init.validate();
    cfg.twf.validate();
    if (cfg.s_values.empty()) throw UsageError("--s must not be empty", 2);
    if (cfg.command == "simulate") return cmd_simulate(cfg, out);
    if (cfg.command == "fig1") return cmd_fig1(cfg, out, err);
    if (cfg.command == "fig2") return cmd_fig2(cfg, out, err);
    if (cfg.command == "image") return cmd_image(cfg, out);
    if (cfg.command == "verify") return cmd_verify(cfg, out);
    if (cfg.command == "gradcheck") return cmd_gradcheck(cfg, out);
    throw UsageError("unknown command '" + cfg.command + "'", 2);
  } catch (const UsageError& e) {
    (e.exit_code() == 0 ? out : err) << e.what() << '\n';
    return e.exit_code();
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return e.code() == Errc::invalid_config ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace sparsepr
