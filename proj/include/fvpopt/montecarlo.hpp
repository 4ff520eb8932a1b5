#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fvpopt/engine.hpp"

namespace fvpopt {

struct RealizationFailure {
  std::size_t realization_id = 0;
  bool divergence = false;
  std::optional<std::size_t> step;
  std::string message;
};

struct EnsembleRun {
  /// Successful realizations in increasing realization_id order.
  std::vector<RunRecord> records;
  std::vector<RealizationFailure> failures;

  bool complete() const { return failures.empty(); }
  bool diverged() const;
};

/// Runs `realizations` independent copies of the iteration. Realization r uses
/// seed derive_seed(base_seed, r) regardless of `threads` (0 = hardware
/// concurrency), so the result does not depend on scheduling. A failing
/// realization is recorded in `failures` and does not stop its siblings.
EnsembleRun run_ensemble(const ObjectiveSpec& objective, const RandomOperator& op,
                         const AlgorithmConfig& config, const std::optional<Vector>& oracle,
                         std::size_t realizations, std::uint64_t base_seed,
                         std::size_t threads = 0);

struct CurvePoint {
  std::size_t n = 0;
  double value = 0.0;
};

/// Ensemble estimates on the shared recording grid.
///
/// mse: (1/R) sum_r e_r(n)^2, the mean-square error.
/// as_proxy: fraction of realizations whose recorded tail max_{m >= n} e_r(m)
/// stays within tol. Almost-sure convergence is not finitely observable; this
/// fraction is the estimator used in its place.
struct EnsembleSummary {
  std::vector<CurvePoint> mse_curve;
  std::vector<CurvePoint> as_proxy_curve;
  std::size_t realizations = 0;
  double tol = 0.0;

  /// Value of the MSE curve at recorded index n; throws UsageError if n is not on the grid.
  double mse_at(std::size_t n) const;
  double as_proxy_at(std::size_t n) const;
};

/// Throws UsageError for an empty input, records without errors (no oracle),
/// or records on different grids.
EnsembleSummary summarize(std::span<const RunRecord> records, double tol);

}  // namespace fvpopt
