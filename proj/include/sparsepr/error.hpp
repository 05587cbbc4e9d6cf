#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sparsepr {

enum class Errc {
  invalid_dimension,
  invalid_input,
  invalid_config,
  dimension_mismatch,
  non_convergence,
  empty_screen,
  degenerate_signal,
  numeric_overflow,
  degenerate_iterate,
  undefined_direction,
  invalid_geometry,
  parse_error,
  io_error,
};

std::string_view to_string(Errc code) noexcept;

/// Base exception for every failure raised by the library. The code lets
/// callers branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Iterative solver ran out of iterations. Carries the last iterate so the
/// caller can inspect how far it got.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double last_value, std::vector<double> last_iterate)
      : Error(Errc::non_convergence, what),
        last_value_(last_value),
        last_iterate_(std::move(last_iterate)) {}

  double last_value() const noexcept { return last_value_; }
  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

 private:
  double last_value_;
  std::vector<double> last_iterate_;
};

inline std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_dimension: return "invalid-dimension";
    case Errc::invalid_input: return "invalid-input";
    case Errc::invalid_config: return "invalid-config";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::non_convergence: return "non-convergence";
    case Errc::empty_screen: return "empty-screen";
    case Errc::degenerate_signal: return "degenerate-signal";
    case Errc::numeric_overflow: return "numeric-overflow";
    case Errc::degenerate_iterate: return "degenerate-iterate";
    case Errc::undefined_direction: return "undefined-direction";
    case Errc::invalid_geometry: return "invalid-geometry";
    case Errc::parse_error: return "parse-error";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace sparsepr
