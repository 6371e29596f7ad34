#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fidhvi/presets.hpp"

namespace fidhvi::cli {

enum ExitCode : int {
  kOk = 0,
  kBoundsFailed = 1,
  kConfigError = 2,
  kConstantViolation = 3,
  kNonConvergence = 4,
};

/// Thresholds asserted by `solve` and `contact`.
inline constexpr double kMaxIntegralResidual = 1e-6;
inline constexpr double kMaxInclusionResidual = 1e-8;
inline constexpr double kMaxCaputoResidual = 5e-3;
/// Window asserted by `perturb` on the fitted log-log slope.
inline constexpr double kSlopeLow = 0.8;
inline constexpr double kSlopeHigh = 1.2;

struct RunConfig {
  std::string command;  ///< check, solve, perturb, contact, bench
  std::string preset;
  PresetOverrides overrides;
  int steps_per_subinterval = 256;
  double tol = 1e-10;
  double inner_tol = 1e-10;
  int max_sweeps = 200;
  std::string out_dir = "out";
  std::uint64_t seed = 20240611;
  int samples = 2000;
  std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4};
  /// perturb: linear_shift (default) or, on contact presets, normal_quadratic,
  /// friction_to_zero (default) or normal_absolute.
  std::string family;
  std::vector<double> shift;  ///< b of linear_shift; all ones when empty
  int threads = 1;

  /// ConfigError on the first problem.
  void validate() const;
};

/// Strict: unknown keys and wrong types are ConfigErrors.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Comma-separated list of numbers.
std::vector<double> parse_number_list(const std::string& text);

/// Thread count from FIDHVI_THREADS, capped by hardware concurrency.
int thread_budget();

/// Runs one command, writing CSVs under `out_dir` and a short human log to
/// `log`. Every failure becomes an exit code plus one JSON line on `err`.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace fidhvi::cli
