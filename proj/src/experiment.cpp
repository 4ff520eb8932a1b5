#include "fvpopt/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "fvpopt/errors.hpp"
#include "fvpopt/objectives.hpp"

namespace fvpopt {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kGradientTol = 1e-6;
constexpr double kGradientStep = 1e-6;
constexpr double kConstantsTol = 1e-9;
constexpr std::size_t kGradientPoints = 100;
constexpr std::size_t kExtraCandidates = 16;

ConvexFunction constraint_function(const std::string& name) {
  if (name == "norm") return norm_function();
  if (name == "max_coordinate") return max_coordinate_function();
  if (name == "squared_norm") return squared_norm_function();
  throw ConfigError(fmt::format("[problem] constraint: unknown function '{}'", name));
}

std::filesystem::path resolve(const std::filesystem::path& dir, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : dir / p;
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

/// JSON number, or null for non-finite values.
ordered_json number_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << contents;
  if (!out) throw ConfigError(fmt::format("failed writing '{}'", path.string()));
}

ordered_json checks_json(const std::vector<CheckOutcome>& checks) {
  ordered_json out = ordered_json::array();
  for (const CheckOutcome& c : checks) {
    out.push_back({{"suite", c.suite},
                   {"samples", c.report.samples},
                   {"worst_violation", number_or_null(c.report.worst_violation)},
                   {"tolerance", c.tolerance},
                   {"passed", c.passed()},
                   {"worst_input", c.report.witness_input}});
  }
  return out;
}

ordered_json curve_json(const std::vector<CurvePoint>& curve) {
  ordered_json out = ordered_json::array();
  for (const CurvePoint& p : curve) out.push_back({p.n, number_or_null(p.value)});
  return out;
}

}  // namespace

void apply_overrides(ExperimentConfig& config, const Overrides& overrides) {
  if (overrides.seed) config.algorithm.seed = *overrides.seed;
  if (overrides.realizations) {
    if (*overrides.realizations == 0) throw ConfigError("--realizations must be positive");
    config.ensemble.realizations = *overrides.realizations;
  }
  if (overrides.iters) {
    if (*overrides.iters == 0) throw ConfigError("--iters must be positive");
    config.algorithm.max_iters = *overrides.iters;
    if (!config.algorithm.schedule.is_power() &&
        config.algorithm.schedule.length() < config.algorithm.max_iters) {
      throw ConfigError(fmt::format("--iters {} exceeds the {} configured step sizes",
                                    *overrides.iters, config.algorithm.schedule.length()));
    }
  }
  if (overrides.out_dir) {
    config.output.csv_path = resolve(*overrides.out_dir, config.output.csv_path).string();
    config.output.summary_path = resolve(*overrides.out_dir, config.output.summary_path).string();
  }
}

ProblemInstance build_problem(const ProblemConfig& config) {
  ProblemInstance problem = std::visit(
      [](const auto& p) -> ProblemInstance {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RandomProjectionQpParams>) {
          return build_random_projection_qp(p.dim, p.halfspaces, p.q, p.c,
                                            p.instance_seed.value_or(0));
        } else if constexpr (std::is_same_v<T, ConsensusParams>) {
          const EdgeProcess process =
              p.activation == Activation::single_edge
                  ? EdgeProcess::single_edge(p.agents, p.edges)
                  : EdgeProcess::bernoulli(p.agents, p.edges, p.activation_probability);
          return build_consensus_problem(p.agents, p.local_dim, p.targets, process, p.mixing, 0);
        } else {
          return build_sublevel_problem(constraint_function(p.constraint), p.level, p.q, p.c);
        }
      },
      config.params);
  if (config.fault == FaultInjection::expanding_operator) {
    problem.op = make_scaling_operator(problem.objective.dim(), 2.0);
  }
  return problem;
}

std::vector<CheckOutcome> run_checks(const ExperimentConfig& config,
                                     const ProblemInstance& problem) {
  std::vector<CheckOutcome> outcomes;
  const std::size_t samples = config.checks.samples;
  const double eta = config.algorithm.eta;
  const RandomOperator& op = problem.op;
  for (std::size_t i = 0; i < config.checks.suites.size(); ++i) {
    const std::string& suite = config.checks.suites[i];
    Rng rng(derive_seed(~config.algorithm.seed, i));
    CheckOutcome outcome;
    outcome.suite = suite;
    if (suite == "quasi_nonexpansive") {
      outcome.report = check_quasi_nonexpansive(op, samples, rng);
    } else if (suite == "averaged_descent") {
      outcome.report = check_averaged_descent(op, eta, samples, rng);
    } else if (suite == "averaged_quasi_nonexpansive") {
      outcome.report = check_averaged_quasi_nonexpansive(op, eta, samples, rng);
    } else if (suite == "fixed_set_agreement") {
      std::vector<Vector> candidates = op.witnesses();
      static constexpr std::array<double, 3> kScales{0.1, 1.0, 10.0};
      for (std::size_t k = 0; k < kExtraCandidates; ++k) {
        candidates.push_back(gaussian_vector(op.dim(), kScales[k % kScales.size()], rng));
      }
      outcome.report = check_fixed_set_agreement(op, eta, candidates, rng);
    } else if (suite == "gradient") {
      static constexpr std::array<double, 3> kScales{0.1, 1.0, 10.0};
      PropertyReport report;
      report.property_name = "gradient";
      report.samples = std::min(samples, kGradientPoints);
      for (std::size_t k = 0; k < report.samples; ++k) {
        const Vector x = gaussian_vector(problem.objective.dim(), kScales[k % kScales.size()], rng);
        const double err = check_gradient(problem.objective, x, kGradientStep);
        if (k == 0 || err > report.worst_violation) {
          report.worst_violation = err;
          report.witness_input = fmt::format("point {}", k);
        }
      }
      outcome.report = report;
      outcome.tolerance = kGradientTol;
    } else if (suite == "constants") {
      const ConstantEstimate est =
          estimate_constants(problem.objective, std::max<std::size_t>(samples, 2), rng);
      PropertyReport report;
      report.property_name = "constants";
      report.samples = est.pairs_used;
      report.worst_violation = std::max(problem.objective.rho() - est.rho_hat,
                                        est.k_hat - problem.objective.lipschitz_k());
      report.witness_input = fmt::format("rho_hat={:.17g}, k_hat={:.17g}", est.rho_hat, est.k_hat);
      outcome.report = report;
      outcome.tolerance = kConstantsTol;
    } else {
      throw ConfigError(fmt::format("[checks] suites: unknown suite '{}'", suite));
    }
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

std::string format_csv(const std::vector<RunRecord>& records) {
  std::vector<const RunRecord*> sorted;
  for (const RunRecord& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const RunRecord* a, const RunRecord* b) {
    return a->realization_id < b->realization_id;
  });
  std::string out = "realization,n,error,residual\n";
  for (const RunRecord* r : sorted) {
    for (std::size_t k = 0; k < r->recorded_indices.size(); ++k) {
      const double error = r->errors.empty() ? std::nan("") : r->errors[k];
      out += fmt::format("{},{},{},{}\n", r->realization_id, r->recorded_indices[k],
                         format_double(error), format_double(r->residuals[k]));
    }
  }
  return out;
}

int run_experiment(const ExperimentConfig& config, std::ostream& diagnostics) {
  const ProblemInstance problem = build_problem(config.problem);
  const double beta = effective_beta(config.algorithm, problem.objective);
  const BetaInterval interval =
      beta_interval(problem.objective.rho(), problem.objective.lipschitz_k());
  const double gamma =
      contraction_factor(problem.objective.rho(), problem.objective.lipschitz_k(), beta);

  ordered_json summary;
  summary["family"] = problem.family;
  summary["fault"] =
      config.problem.fault == FaultInjection::none ? "none" : "expanding_operator";
  summary["dimension"] = problem.objective.dim();
  summary["rho"] = problem.objective.rho();
  summary["lipschitz_k"] = problem.objective.lipschitz_k();
  summary["beta"] = beta;
  summary["beta_interval"] = {{"lower", interval.lower}, {"upper", interval.upper}};
  summary["gamma"] = gamma;
  summary["eta"] = config.algorithm.eta;
  if (config.algorithm.schedule.is_power()) {
    summary["step_schedule"] = {{"kind", "power"}, {"zeta", config.algorithm.schedule.zeta()}};
  } else {
    summary["step_schedule"] = {{"kind", "custom"},
                                {"length", config.algorithm.schedule.length()}};
  }
  summary["max_iters"] = config.algorithm.max_iters;
  summary["seed"] = config.algorithm.seed;
  summary["oracle_method"] = problem.oracle_method;
  if (problem.oracle_solution) {
    ordered_json x = ordered_json::array();
    for (double v : *problem.oracle_solution) x.push_back(v);
    summary["oracle_solution"] = x;
  } else {
    summary["oracle_solution"] = nullptr;
  }

  const std::vector<CheckOutcome> checks = run_checks(config, problem);
  summary["checks"] = checks_json(checks);
  bool checks_passed = true;
  for (const CheckOutcome& c : checks) {
    if (!c.passed()) {
      checks_passed = false;
      diagnostics << fmt::format("check '{}' failed: worst violation {:.6g} > {:.1g} at {}\n",
                                 c.suite, c.report.worst_violation, c.tolerance,
                                 c.report.witness_input);
    }
  }
  if (!checks_passed) {
    summary["status"] = "property_failure";
    summary["ensemble"] = nullptr;
    write_file(config.output.summary_path, summary.dump(2) + "\n");
    return kExitPropertyFailure;
  }

  const EnsembleRun ensemble =
      run_ensemble(problem.objective, problem.op, config.algorithm, problem.oracle_solution,
                   config.ensemble.realizations, config.algorithm.seed, config.ensemble.threads);

  ordered_json ens;
  ens["realizations"] = config.ensemble.realizations;
  ens["completed"] = ensemble.records.size();
  ens["complete"] = ensemble.complete();
  ens["tol"] = config.ensemble.tol;
  ordered_json failures = ordered_json::array();
  for (const RealizationFailure& f : ensemble.failures) {
    failures.push_back({{"realization", f.realization_id},
                        {"divergence", f.divergence},
                        {"step", f.step ? ordered_json(*f.step) : ordered_json(nullptr)},
                        {"message", f.message}});
    diagnostics << fmt::format("realization {} failed: {}\n", f.realization_id, f.message);
  }
  ens["failures"] = failures;
  const std::size_t final_n = config.algorithm.max_iters;
  ens["final_n"] = final_n;
  if (!ensemble.records.empty() && problem.oracle_solution) {
    const EnsembleSummary stats = summarize(ensemble.records, config.ensemble.tol);
    ens["final_mse"] = number_or_null(stats.mse_at(final_n));
    ens["as_proxy_final"] = number_or_null(stats.as_proxy_at(final_n));
    ens["mse_curve"] = curve_json(stats.mse_curve);
    ens["as_proxy_curve"] = curve_json(stats.as_proxy_curve);
  } else {
    ens["final_mse"] = nullptr;
    ens["as_proxy_final"] = nullptr;
  }
  summary["ensemble"] = ens;

  int code = kExitOk;
  if (ensemble.diverged()) {
    code = kExitDivergence;
  } else if (!ensemble.complete()) {
    code = kExitUsage;
  }
  summary["status"] = code == kExitOk ? "ok" : (code == kExitDivergence ? "divergence" : "error");

  write_file(config.output.csv_path, format_csv(ensemble.records));
  write_file(config.output.summary_path, summary.dump(2) + "\n");
  return code;
}

}  // namespace fvpopt
