#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fvpopt/config.hpp"
#include "fvpopt/montecarlo.hpp"
#include "fvpopt/problems.hpp"
#include "fvpopt/verification.hpp"

namespace fvpopt {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitPropertyFailure = 2,
  kExitDivergence = 3,
};

/// Command-line overrides applied on top of a parsed config.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> realizations;
  std::optional<std::size_t> iters;
  /// Directory that relative output paths are resolved against.
  std::optional<std::filesystem::path> out_dir;
};

void apply_overrides(ExperimentConfig& config, const Overrides& overrides);

/// Builds the problem instance described by the [problem] section, with the
/// operator replaced by T(x) = 2x when a fault is injected.
ProblemInstance build_problem(const ProblemConfig& config);

struct CheckOutcome {
  std::string suite;
  PropertyReport report;
  /// Pass threshold for report.worst_violation.
  double tolerance = kPropertyTol;

  bool passed() const { return report.passed(tolerance); }
};

/// Runs the configured property suites in order. Deterministic given the
/// algorithm seed.
std::vector<CheckOutcome> run_checks(const ExperimentConfig& config, const ProblemInstance& problem);

/// "realization,n,error,residual" rows sorted by (realization, n), values with
/// 17 significant digits. Missing errors (no oracle) are written as nan.
std::string format_csv(const std::vector<RunRecord>& records);

/// Full batch run: checks, ensemble, outputs. Diagnostics go to `diagnostics`;
/// data goes only to the configured files. Returns an ExitCode.
int run_experiment(const ExperimentConfig& config, std::ostream& diagnostics);

}  // namespace fvpopt
