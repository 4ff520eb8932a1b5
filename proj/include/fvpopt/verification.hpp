#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fvpopt/operators.hpp"
#include "fvpopt/random.hpp"
#include "fvpopt/space.hpp"

namespace fvpopt {

/// Tolerance below which a sampled worst violation counts as a pass.
inline constexpr double kPropertyTol = 1e-10;

/// Result of a sampled falsification run for a property "lhs <= rhs".
/// worst_violation is the maximum of lhs - rhs over the samples, so a value
/// <= 0 means no counterexample was found.
struct PropertyReport {
  std::string property_name;
  std::size_t samples = 0;
  double worst_violation = 0.0;
  /// Human-readable inputs of the worst sample.
  std::string witness_input;

  bool passed(double tol = kPropertyTol) const { return worst_violation <= tol; }
};

// Sampled points are standard normal vectors scaled by 0.1, 1 and 10 in
// rotation; witnesses are used in rotation; realizations are drawn from the
// operator's own sample space.

/// ||T(w,x) - z|| - ||x - z|| over sampled (w, x, witness z).
PropertyReport check_quasi_nonexpansive(const RandomOperator& op, std::size_t samples, Rng& rng);

/// (eta/2)||x - T(w,x)||^2 - <x - T_hat(w,x), x - z> over sampled (w, x, z),
/// with T_hat the eta-average of op. eta in (0,1].
PropertyReport check_averaged_descent(const RandomOperator& op, double eta, std::size_t samples,
                                      Rng& rng);

/// Same inequality with a caller-supplied averaged map, for testing averaging
/// implementations other than average().
PropertyReport check_averaged_descent(const RandomOperator& base, const RandomOperator& averaged,
                                      double eta, std::size_t samples, Rng& rng);

/// Quasi-nonexpansivity of the eta-average of op. eta in (0,1].
PropertyReport check_averaged_quasi_nonexpansive(const RandomOperator& op, double eta,
                                                 std::size_t samples, Rng& rng);

PropertyReport check_averaged_quasi_nonexpansive(const RandomOperator& averaged,
                                                 std::size_t samples, Rng& rng);

/// Pointwise check that each candidate is fixed by every realization of T
/// exactly when it is fixed by every realization of T_hat (both to 1e-10).
/// Finite spaces are enumerated; parameterized ones use `panel_size` draws.
/// A disagreement contributes the larger of the two displacements.
PropertyReport check_fixed_set_agreement(const RandomOperator& op, double eta,
                                         const std::vector<Vector>& candidates, Rng& rng,
                                         std::size_t panel_size = 64);

PropertyReport check_fixed_set_agreement(const RandomOperator& base,
                                         const RandomOperator& averaged,
                                         const std::vector<Vector>& candidates, Rng& rng,
                                         std::size_t panel_size = 64);

enum class MsVerdict { pass, fail, rejected_input };

struct MsConsistencyReport {
  MsVerdict verdict = MsVerdict::rejected_input;
  /// Mean of squared errors per recorded index.
  std::vector<double> mse;
  /// Mean over realizations of the squared tail supremum sup_{m >= n} e_m^2.
  std::vector<double> mean_tail_sup;
  std::string message;
};

/// Desk-scale consistency check of "bounded + almost surely convergent implies
/// mean-square convergent". Input: one error sequence per realization, all on
/// the same recorded grid. Rejects the input if any entry is non-finite or
/// exceeds `bound`. Passes if the mean squared error never exceeds the mean
/// squared tail supremum and trends downward (final MSE below the first, or zero).
MsConsistencyReport check_as_implies_ms(const std::vector<std::vector<double>>& run_errors,
                                        double bound);

}  // namespace fvpopt
