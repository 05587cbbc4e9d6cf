#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsepr/init.hpp"
#include "sparsepr/io.hpp"
#include "sparsepr/oracle.hpp"
#include "sparsepr/twf.hpp"

namespace sparsepr {

struct CliConfig {
  std::string command;  // simulate, fig1, fig2, image, verify, gradcheck
  std::size_t p = 1000;
  std::vector<std::size_t> s_values{5};
  std::vector<std::size_t> n_values;     // empty: the subcommand's default
  std::vector<std::string> links;        // empty: the subcommand's default
  double sigma = 1.0;
  InitConfig init;
  TwfConfig twf;
  std::size_t trials = 0;  // 0: the subcommand's default
  std::uint64_t seed = 0;
  std::string out_path;
  Format format = Format::csv;
  std::size_t parallelism = 1;
  std::string config_path;
  std::size_t rank_s = 20;
  double n_mult = 10.0;
  std::string image_path;
  std::size_t report_lo = 101;
  std::size_t report_hi = 300;
};

/// Usage failure (exit code 2) or an explicit help request (exit code 0).
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& what, int exit_code) : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

/// Defaults, then the JSON file named by --config (keys are flag names with
/// dashes replaced by underscores; unknown keys rejected), then flags.
/// Throws UsageError.
CliConfig parse_args(const std::vector<std::string>& args);

/// Probe table run by `verify`: gradient check, variance-loss grid, spiked
/// second moment, perturbation bound, isometry and mean-concentration probes.
std::vector<ProbeReport> run_verify_suite(std::uint64_t seed, std::size_t seeds);

/// Entry point behind the executable. Returns 0 on success, 1 on runtime or
/// I/O failure (and failed verify/gradcheck), 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sparsepr
