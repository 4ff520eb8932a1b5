#include "fvpopt/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <fmt/core.h>

#include "fvpopt/errors.hpp"

namespace fvpopt {

// ---------------------------------------------------------------------------
// StepSchedule

StepSchedule StepSchedule::power(double zeta) {
  if (!(zeta > 0.0 && zeta <= 1.0)) {
    throw ConfigError(fmt::format("zeta = {} must lie in (0, 1]", zeta));
  }
  StepSchedule s;
  s.zeta_ = zeta;
  return s;
}

StepSchedule StepSchedule::custom(std::vector<double> alphas, bool attested) {
  if (alphas.empty()) throw ConfigError("custom step schedule is empty");
  for (std::size_t n = 0; n < alphas.size(); ++n) {
    if (!(alphas[n] >= 0.0 && alphas[n] <= 1.0)) {
      throw ConfigError(fmt::format("custom step schedule: alpha_{} = {} outside [0, 1]", n,
                                    alphas[n]));
    }
  }
  StepSchedule s;
  s.values_ = std::move(alphas);
  s.attested_ = attested;
  return s;
}

double StepSchedule::alpha(std::size_t n) const {
  if (values_.empty()) return 1.0 / std::pow(1.0 + static_cast<double>(n), zeta_);
  if (n >= values_.size()) {
    throw UsageError(fmt::format("custom step schedule has {} values, alpha_{} requested",
                                 values_.size(), n));
  }
  return values_[n];
}

// ---------------------------------------------------------------------------
// Admissibility

std::string BetaInterval::to_string() const { return fmt::format("({}, {})", lower, upper); }

BetaInterval beta_interval(double rho, double k) {
  if (!(rho > 0.0) || !(k > 0.0)) {
    throw UsageError(fmt::format("beta_interval: need rho, K > 0, got rho = {}, K = {}", rho, k));
  }
  return BetaInterval{0.0, 2.0 * rho / (k * k)};
}

double contraction_factor(double rho, double k, double beta) {
  if (!(rho > 0.0) || !(k >= rho)) {
    throw UsageError(fmt::format("contraction_factor: need 0 < rho <= K, got rho = {}, K = {}",
                                 rho, k));
  }
  const BetaInterval interval = beta_interval(rho, k);
  if (!interval.contains(beta)) {
    throw AdmissibilityError(fmt::format("beta = {} must lie in the open interval {}", beta,
                                         interval.to_string()));
  }
  double discriminant = 1.0 - beta * (2.0 * rho - beta * k * k);
  if (discriminant < 0.0 && discriminant > -1e-14) discriminant = 0.0;
  return 1.0 - std::sqrt(discriminant);
}

double effective_beta(const AlgorithmConfig& config, const ObjectiveSpec& objective) {
  const BetaInterval interval = beta_interval(objective.rho(), objective.lipschitz_k());
  if (!config.beta) return objective.rho() / (objective.lipschitz_k() * objective.lipschitz_k());
  if (!interval.contains(*config.beta)) {
    throw AdmissibilityError(fmt::format("beta = {} must lie in the open interval {}",
                                         *config.beta, interval.to_string()));
  }
  return *config.beta;
}

void validate_config(const AlgorithmConfig& config, const ObjectiveSpec& objective) {
  effective_beta(config, objective);
  if (!(config.eta > 0.0 && config.eta < 1.0)) {
    throw ConfigError(fmt::format("eta = {} must lie in the open interval (0, 1)", config.eta));
  }
  if (!config.schedule.is_power()) {
    if (!config.schedule.attested()) {
      throw ConfigError(
          "custom step schedule is not attested to satisfy alpha_n -> 0 and sum alpha_n = inf");
    }
    if (config.schedule.length() < config.max_iters) {
      throw ConfigError(fmt::format("custom step schedule has {} values but max_iters = {}",
                                    config.schedule.length(), config.max_iters));
    }
  }
  if (config.initial_point &&
      static_cast<std::size_t>(config.initial_point->size()) != objective.dim()) {
    throw ConfigError(fmt::format("initial point has dimension {}, problem has {}",
                                  config.initial_point->size(), objective.dim()));
  }
}

std::vector<std::size_t> recording_grid(std::size_t max_iters, std::size_t record_every) {
  std::vector<std::size_t> grid;
  if (record_every > 0) {
    for (std::size_t n = 0; n <= max_iters; n += record_every) grid.push_back(n);
  } else {
    std::size_t stride = 1;
    for (std::size_t n = 0; n <= max_iters;) {
      grid.push_back(n);
      if (n >= 10 * stride) stride *= 10;
      n += stride;
    }
  }
  if (grid.back() != max_iters) grid.push_back(max_iters);
  return grid;
}

// ---------------------------------------------------------------------------
// Iteration

StepOutcome step(const IterateState& state, const ObjectiveSpec& objective,
                 const AveragedOperator& averaged, double alpha, double beta, Rng& rng) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw UsageError(fmt::format("step: alpha = {} outside [0, 1]", alpha));
  }
  const Vector& x = state.x;
  StepOutcome out;
  out.omega = averaged.base().space().sample(rng);
  const Vector tx = averaged.base().apply(out.omega, x);
  out.residual = norm(x - tx);

  Vector next = alpha * (x - beta * objective.gradient(x)) + (1.0 - alpha) * averaged.combine(x, tx);
  if (!all_finite(next)) {
    throw DivergenceError(fmt::format("non-finite iterate produced at step {}", state.n), state.n);
  }
  const double size = norm(next);
  if (size > kDivergenceGuard) {
    throw DivergenceError(
        fmt::format("iterate norm {:.3e} exceeds {:.0e} at step {}", size, kDivergenceGuard,
                    state.n),
        state.n);
  }
  out.next = IterateState{state.n + 1, std::move(next)};
  return out;
}

RunRecord run(const ObjectiveSpec& objective, const RandomOperator& op,
              const AlgorithmConfig& config, const std::optional<Vector>& oracle) {
  if (objective.dim() != op.dim()) {
    throw ConfigError(fmt::format("objective is on R^{} but operator '{}' is on R^{}",
                                  objective.dim(), op.name(), op.dim()));
  }
  if (!op.declares_feasible()) {
    throw ConfigError(fmt::format(
        "operator '{}' declares no fixed value point (no witness, no membership predicate)",
        op.name()));
  }
  validate_config(config, objective);
  if (oracle && static_cast<std::size_t>(oracle->size()) != objective.dim()) {
    throw UsageError("run: oracle dimension does not match the problem");
  }
  if (config.log_omega && !op.space().is_finite()) {
    throw ConfigError("omega logging requires a finite sample space");
  }

  const double beta = effective_beta(config, objective);
  const AveragedOperator averaged = average(op, config.eta);
  Rng rng(config.seed);

  RunRecord record;
  record.seed = config.seed;
  record.recorded_indices = recording_grid(config.max_iters, config.record_every);
  const std::size_t slots = record.recorded_indices.size();
  record.residuals.reserve(slots);
  record.running_min_residuals.reserve(slots);
  if (oracle) {
    record.errors.reserve(slots);
    record.c_values.reserve(slots);
  }

  IterateState state{
      0, config.initial_point.value_or(Vector::Zero(static_cast<Eigen::Index>(objective.dim())))};
  record.initial_x = state.x;
  double running_min = std::numeric_limits<double>::infinity();
  std::size_t next_slot = 0;

  auto record_point = [&](const Vector& x, double residual) {
    record.residuals.push_back(residual);
    record.running_min_residuals.push_back(running_min);
    if (oracle) {
      const double err = norm(x - *oracle);
      record.errors.push_back(err);
      record.c_values.push_back(0.5 * err * err);
    }
    ++next_slot;
  };

  for (std::size_t n = 0; n < config.max_iters; ++n) {
    StepOutcome out = step(state, objective, averaged, config.schedule.alpha(n), beta, rng);
    running_min = std::min(running_min, out.residual);
    if (config.log_omega) record.omega_log.push_back(out.omega.label);
    if (next_slot < slots && record.recorded_indices[next_slot] == n) {
      record_point(state.x, out.residual);
    }
    state = std::move(out.next);
  }

  // Residual of the final iterate needs one more realization; the draw does
  // not influence the trajectory.
  const OmegaStar last = op.space().sample(rng);
  const double final_residual = norm(state.x - op.apply(last, state.x));
  running_min = std::min(running_min, final_residual);
  record_point(state.x, final_residual);

  record.final_x = state.x;
  if (oracle && !record.c_values.empty()) {
    std::size_t k = record.c_values.size() - 1;
    while (k > 0 && record.c_values[k - 1] >= record.c_values[k]) --k;
    record.c_monotone_from = record.recorded_indices[k];
  }
  return record;
}

// ---------------------------------------------------------------------------
// Diagnostics

double vi_residual(const Vector& candidate, const ObjectiveSpec& objective,
                   std::span<const Vector> probes) {
  if (probes.empty()) throw UsageError("vi_residual: no probes");
  const Vector g = objective.gradient(candidate);
  double worst = std::numeric_limits<double>::infinity();
  for (const Vector& p : probes) worst = std::min(worst, inner(p - candidate, g));
  return worst;
}

double boundedness_radius(const ObjectiveSpec& objective, double beta, const Vector& x0,
                          const Vector& oracle) {
  const double gamma = contraction_factor(objective.rho(), objective.lipschitz_k(), beta);
  return std::max(norm(x0 - oracle), beta * norm(objective.gradient(oracle)) / gamma);
}

OccurrenceReport occurrence_report(std::span<const std::size_t> omega_log,
                                   const std::set<std::size_t>& k_tilde, std::size_t space_size) {
  OccurrenceReport report;
  for (std::size_t label : k_tilde) {
    if (label >= space_size) {
      throw UsageError(fmt::format("occurrence_report: label {} outside sample space of size {}",
                                   label, space_size));
    }
    report.counts[label] = 0;
  }
  for (std::size_t label : omega_log) {
    if (label >= space_size) {
      throw UsageError(fmt::format("occurrence_report: logged label {} outside sample space of size {}",
                                   label, space_size));
    }
    auto it = report.counts.find(label);
    if (it != report.counts.end()) ++it->second;
  }
  report.min_count = std::numeric_limits<std::size_t>::max();
  for (const auto& [label, count] : report.counts) {
    report.min_count = std::min(report.min_count, count);
    if (count == 0) report.flagged.push_back(label);
  }
  if (report.counts.empty()) report.min_count = 0;
  return report;
}

}  // namespace fvpopt
