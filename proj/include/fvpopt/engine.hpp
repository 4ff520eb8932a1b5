#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fvpopt/objectives.hpp"
#include "fvpopt/operators.hpp"
#include "fvpopt/random.hpp"
#include "fvpopt/space.hpp"

namespace fvpopt {

/// Relaxation sequence alpha_n in [0,1] weighting the gradient step against
/// the averaged operator step.
class StepSchedule {
 public:
  /// alpha_n = 1/(1+n)^zeta with zeta in (0,1]; alpha_n -> 0 and sum alpha_n
  /// diverges. Throws ConfigError for zeta outside (0,1].
  static StepSchedule power(double zeta);

  /// Explicit alpha_0, alpha_1, ... The caller attests that the full sequence
  /// tends to zero with a divergent sum; run() refuses unattested schedules.
  static StepSchedule custom(std::vector<double> alphas, bool attested);

  double alpha(std::size_t n) const;

  bool is_power() const { return values_.empty(); }
  double zeta() const { return zeta_; }
  bool attested() const { return attested_; }
  /// Number of explicit values; 0 for the power kind.
  std::size_t length() const { return values_.size(); }

 private:
  StepSchedule() = default;

  double zeta_ = 1.0;
  std::vector<double> values_;
  bool attested_ = true;
};

struct AlgorithmConfig {
  /// Gradient step; defaults to rho/K^2, the midpoint of (0, 2 rho/K^2).
  std::optional<double> beta;
  double eta = 0.5;
  StepSchedule schedule = StepSchedule::power(1.0);
  std::size_t max_iters = 1000;
  std::uint64_t seed = 0;
  /// Record every k-th iterate; 0 selects the geometric grid 0..10, 20..100, 200..1000, ...
  std::size_t record_every = 0;
  /// Starting point; zero vector when absent.
  std::optional<Vector> initial_point;
  /// Keep the label of every sampled realization (finite spaces only).
  bool log_omega = false;
};

/// Open interval (0, 2 rho/K^2) of admissible gradient steps.
struct BetaInterval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double beta) const { return beta > lower && beta < upper; }
  std::string to_string() const;
};

/// Throws UsageError unless rho, k > 0.
BetaInterval beta_interval(double rho, double k);

/// gamma = 1 - sqrt(1 - beta (2 rho - beta K^2)), so that x - beta grad f(x)
/// is (1 - gamma)-Lipschitz. Throws UsageError unless 0 < rho <= k and
/// AdmissibilityError (naming the interval) for beta outside it.
double contraction_factor(double rho, double k, double beta);

/// Resolved gradient step for `objective`: the configured beta, validated, or
/// rho/K^2. Throws AdmissibilityError when the configured beta is outside the
/// open interval.
double effective_beta(const AlgorithmConfig& config, const ObjectiveSpec& objective);

/// Throws ConfigError / AdmissibilityError if `config` cannot drive `objective`.
void validate_config(const AlgorithmConfig& config, const ObjectiveSpec& objective);

/// Recorded iteration indices for a run of `max_iters` steps; always contains
/// 0 and max_iters.
std::vector<std::size_t> recording_grid(std::size_t max_iters, std::size_t record_every);

struct IterateState {
  std::size_t n = 0;
  Vector x;
};

struct StepOutcome {
  IterateState next;
  OmegaStar omega;
  /// ||x_n - T(omega*_n, x_n)|| against the base operator.
  double residual = 0.0;
};

/// One step x_{n+1} = alpha (x_n - beta grad f(x_n)) + (1 - alpha) T_hat(omega*_n, x_n),
/// with omega*_n drawn from the base operator's sample space. Throws
/// DivergenceError if the new iterate is non-finite or exceeds the guard norm.
StepOutcome step(const IterateState& state, const ObjectiveSpec& objective,
                 const AveragedOperator& averaged, double alpha, double beta, Rng& rng);

/// Norm above which an iterate is treated as diverged.
inline constexpr double kDivergenceGuard = 1e12;

/// Trajectory of one realization, sampled on the recording grid.
struct RunRecord {
  std::size_t realization_id = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> recorded_indices;
  /// ||x_n - x*||; empty without an oracle.
  std::vector<double> errors;
  /// C_n = 1/2 ||x_n - x*||^2; empty without an oracle.
  std::vector<double> c_values;
  /// ||x_n - T(omega*_n, x_n)||.
  std::vector<double> residuals;
  /// Minimum residual over all steps m <= n (not only recorded ones).
  std::vector<double> running_min_residuals;
  Vector initial_x;
  Vector final_x;
  /// Sampled labels, when AlgorithmConfig::log_omega was set.
  std::vector<std::size_t> omega_log;
  /// Smallest recorded index after which C_n never increased on the grid.
  /// Diagnostic only; the index where C_n becomes monotone is not knowable.
  std::optional<std::size_t> c_monotone_from;
};

/// Runs max_iters steps from the configured initial point. Deterministic given
/// config.seed. Throws ConfigError if the operator declares no fixed value
/// point, or the config is inadmissible; DivergenceError on divergence.
RunRecord run(const ObjectiveSpec& objective, const RandomOperator& op,
              const AlgorithmConfig& config, const std::optional<Vector>& oracle = std::nullopt);

/// min over probes p of <p - x, grad f(x)>; nonnegative (up to roundoff) at the
/// constrained optimum when the probes lie in the feasible set.
double vi_residual(const Vector& candidate, const ObjectiveSpec& objective,
                   std::span<const Vector> probes);

/// max(||x0 - x*||, beta ||grad f(x*)|| / gamma), the radius no iterate can leave.
double boundedness_radius(const ObjectiveSpec& objective, double beta, const Vector& x0,
                          const Vector& oracle);

struct OccurrenceReport {
  std::map<std::size_t, std::size_t> counts;
  std::size_t min_count = 0;
  /// Labels of k_tilde that never occurred in the logged horizon.
  std::vector<std::size_t> flagged;
};

/// Occurrence counts of the labels in k_tilde over a logged horizon. Zero
/// counts are flagged as a risk for the finite run, not as a violation.
/// Throws UsageError for labels >= space_size.
OccurrenceReport occurrence_report(std::span<const std::size_t> omega_log,
                                   const std::set<std::size_t>& k_tilde, std::size_t space_size);

}  // namespace fvpopt
