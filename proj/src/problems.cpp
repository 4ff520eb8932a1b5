#include "fvpopt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Dense>
#include <fmt/core.h>

#include "fvpopt/engine.hpp"
#include "fvpopt/errors.hpp"

namespace fvpopt {

namespace {

constexpr double kOracleStepTol = 1e-12;
constexpr std::size_t kOracleMaxIters = 1'000'000;
constexpr std::size_t kDykstraMaxSweeps = 200'000;

double max_violation(const std::vector<Halfspace>& halfspaces, const Vector& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const Halfspace& h : halfspaces) worst = std::max(worst, h.a.dot(x) - h.b);
  return worst;
}

/// Projected gradient with step 1/K, stopped at ||x_{k+1} - x_k|| <= 1e-12.
template <typename Project>
Vector projected_gradient(const ObjectiveSpec& objective, const Vector& start, Project&& project) {
  const double step = 1.0 / objective.lipschitz_k();
  Vector x = project(start);
  for (std::size_t k = 0; k < kOracleMaxIters; ++k) {
    Vector next = project(x - step * objective.gradient(x));
    const double moved = norm(next - x);
    x = std::move(next);
    if (moved <= kOracleStepTol) return x;
  }
  throw ConfigError("reference projected-gradient solve did not settle");
}

std::vector<OmegaStar> realization_panel(const SampleSpace& space, Rng& rng) {
  if (space.is_finite()) return space.enumerate();
  std::vector<OmegaStar> draws;
  for (int k = 0; k < 64; ++k) draws.push_back(space.sample(rng));
  return draws;
}

}  // namespace

RandomQpData random_qp_data(std::size_t dim, std::size_t halfspace_count, std::uint64_t seed) {
  if (dim == 0) throw UsageError("random_qp_data: dimension must be positive");
  Rng rng(seed);
  std::uniform_real_distribution<double> offset(0.2, 1.0);
  std::uniform_real_distribution<double> spectrum(1.0, 1.5);
  const auto d = static_cast<Eigen::Index>(dim);

  RandomQpData data;
  Vector sum_normals = Vector::Zero(d);
  for (std::size_t i = 0; i < halfspace_count; ++i) {
    Vector a = gaussian_vector(dim, 1.0, rng);
    a /= norm(a);
    sum_normals += a;
    data.halfspaces.push_back(Halfspace{std::move(a), offset(rng)});
  }

  Matrix gaussian(d, d);
  for (Eigen::Index j = 0; j < d; ++j) gaussian.col(j) = gaussian_vector(dim, 1.0, rng);
  const Matrix rotation = Eigen::HouseholderQR<Matrix>(gaussian).householderQ();
  Vector lambda(d);
  for (Eigen::Index i = 0; i < d; ++i) lambda[i] = spectrum(rng);
  data.q = rotation * lambda.asDiagonal() * rotation.transpose();
  data.q = 0.5 * (data.q + data.q.transpose());

  const Vector target =
      halfspace_count > 0 ? Vector(2.0 * sum_normals) : gaussian_vector(dim, 1.0, rng);
  data.c = data.q * target;
  return data;
}

Vector project_onto_polyhedron(const std::vector<Halfspace>& halfspaces, const Vector& x) {
  if (halfspaces.empty()) return x;
  Vector y = x;
  std::vector<Vector> increments(halfspaces.size(), Vector::Zero(x.size()));
  for (std::size_t sweep = 0; sweep < kDykstraMaxSweeps; ++sweep) {
    // The iterate can stall for a sweep while the increments still move, so
    // both enter the stopping test.
    double change = 0.0;
    for (std::size_t i = 0; i < halfspaces.size(); ++i) {
      const Halfspace& h = halfspaces[i];
      const Vector shifted = y + increments[i];
      const double excess = h.a.dot(shifted) - h.b;
      Vector projected = excess > 0.0 ? Vector(shifted - (excess / h.a.squaredNorm()) * h.a)
                                       : shifted;
      const Vector increment = shifted - projected;
      change += norm(projected - y) + norm(increment - increments[i]);
      increments[i] = increment;
      y = std::move(projected);
    }
    if (change <= 1e-15 * (1.0 + norm(y))) break;
  }
  if (max_violation(halfspaces, y) > 1e-9) {
    throw ConfigError(fmt::format(
        "halfspace intersection appears empty (residual violation {:.3e} after projection)",
        max_violation(halfspaces, y)));
  }
  return y;
}

ProblemInstance build_random_projection_qp(std::size_t dim,
                                           const std::vector<Halfspace>& halfspaces,
                                           const Matrix& q, const Vector& c, std::uint64_t seed) {
  if (static_cast<std::size_t>(q.rows()) != dim || static_cast<std::size_t>(c.size()) != dim) {
    throw ConfigError(
        fmt::format("random_projection_qp: Q is {}x{} and c has {} entries, dim = {}", q.rows(),
                    q.cols(), c.size(), dim));
  }
  ObjectiveSpec objective = [&] {
    try {
      return make_quadratic(q, c);
    } catch (const UsageError& e) {
      throw ConfigError(e.what());
    }
  }();
  for (std::size_t i = 0; i < halfspaces.size(); ++i) {
    if (static_cast<std::size_t>(halfspaces[i].a.size()) != dim) {
      throw ConfigError(
          fmt::format("random_projection_qp: halfspace {} has dimension {}, dim = {}", i,
                      halfspaces[i].a.size(), dim));
    }
    if (!(halfspaces[i].a.squaredNorm() > 0.0)) {
      throw ConfigError(fmt::format("random_projection_qp: halfspace {} has a zero normal", i));
    }
  }

  const auto d = static_cast<Eigen::Index>(dim);
  const Vector unconstrained = *objective.unconstrained_minimizer();

  if (halfspaces.empty()) {
    RandomOperator op = make_deterministic_operator(identity_piece(), {Vector::Zero(d)});
    return ProblemInstance{"random_projection_qp", std::move(objective), std::move(op),
                           unconstrained, "direct solve of Q x = c (no constraints)",
                           [dim](Rng& rng) { return gaussian_vector(dim, 3.0, rng); }};
  }

  auto project = [halfspaces](const Vector& x) { return project_onto_polyhedron(halfspaces, x); };
  Vector oracle = projected_gradient(objective, unconstrained, project);

  std::vector<OperatorPiece> pieces;
  for (const Halfspace& h : halfspaces) pieces.push_back(make_halfspace_projector(h.a, h.b));
  std::vector<double> weights(pieces.size(), 1.0 / static_cast<double>(pieces.size()));
  weights.back() = 1.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) weights.back() -= weights[i];

  std::vector<Vector> witnesses{oracle, project(Vector::Zero(d))};
  RandomOperator op = make_random_selection(pieces, weights, std::move(witnesses));

  (void)seed;
  return ProblemInstance{
      "random_projection_qp", std::move(objective), std::move(op), std::move(oracle),
      "projected gradient (step 1/K) with Dykstra projection onto the full halfspace "
      "intersection, stopped at ||x_{k+1} - x_k|| <= 1e-12",
      [project, dim](Rng& rng) { return project(gaussian_vector(dim, 3.0, rng)); }};
}

ProblemInstance build_consensus_problem(std::size_t agents, std::size_t local_dim,
                                        const std::vector<Vector>& local_targets,
                                        const EdgeProcess& edge_process, double mixing,
                                        std::uint64_t seed) {
  (void)seed;
  if (local_targets.size() != agents) {
    throw ConfigError(fmt::format("consensus: {} targets for {} agents", local_targets.size(),
                                  agents));
  }
  const auto d = static_cast<Eigen::Index>(local_dim);
  std::vector<ObjectiveSpec> locals;
  Vector mean = Vector::Zero(d);
  for (std::size_t i = 0; i < agents; ++i) {
    if (local_targets[i].size() != d) {
      throw ConfigError(fmt::format("consensus: target {} has dimension {}, local_dim = {}", i,
                                    local_targets[i].size(), local_dim));
    }
    locals.push_back(make_squared_distance(local_targets[i]));
    mean += local_targets[i];
  }
  mean /= static_cast<double>(agents);

  const auto components = connected_components(agents, edge_process.support());
  if (components.size() > 1) {
    std::string partition;
    for (const auto& comp : components) {
      partition += "{";
      for (std::size_t k = 0; k < comp.size(); ++k) partition += fmt::format("{}{}", k ? "," : "", comp[k]);
      partition += "}";
    }
    throw ConfigError(fmt::format(
        "consensus: edges with positive probability do not connect the agents; components {}",
        partition));
  }

  RandomOperator op = [&] {
    try {
      return make_gossip_operator(agents, local_dim, edge_process, mixing);
    } catch (const UsageError& e) {
      throw ConfigError(e.what());
    }
  }();
  Vector oracle = mean.replicate(static_cast<Eigen::Index>(agents), 1);
  return ProblemInstance{
      "consensus", make_separable_sum(locals), std::move(op), std::move(oracle),
      "analytic mean of local targets",
      [agents, local_dim](Rng& rng) -> Vector {
        return gaussian_vector(local_dim, 3.0, rng).replicate(static_cast<Eigen::Index>(agents), 1);
      }};
}

ProblemInstance build_sublevel_problem(const ConvexFunction& g, double level, const Matrix& q,
                                       const Vector& c) {
  ObjectiveSpec objective = [&] {
    try {
      return make_quadratic(q, c);
    } catch (const UsageError& e) {
      throw ConfigError(e.what());
    }
  }();
  const std::size_t dim = objective.dim();
  const auto d = static_cast<Eigen::Index>(dim);
  const Vector unconstrained = *objective.unconstrained_minimizer();

  // Best feasible point of a 41^d grid around the unconstrained minimizer and
  // the origin.
  std::optional<Vector> grid_best;
  if (dim <= 3) {
    const double half_width = 2.0 * std::max(1.0, norm(unconstrained));
    constexpr int kPerAxis = 41;
    double best_value = std::numeric_limits<double>::infinity();
    std::size_t total = 1;
    for (std::size_t k = 0; k < dim; ++k) total *= kPerAxis;
    Vector x(d);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      for (Eigen::Index k = 0; k < d; ++k) {
        const auto i = static_cast<double>(rest % kPerAxis);
        rest /= kPerAxis;
        x[k] = -half_width + 2.0 * half_width * i / (kPerAxis - 1);
      }
      if (g.value(x) > level) continue;
      const double fx = objective.value(x);
      if (fx < best_value) {
        best_value = fx;
        grid_best = x;
      }
    }
  }

  std::optional<Vector> oracle;
  std::string method = "unavailable: constraint function exposes no sublevel projection";
  std::vector<Vector> witnesses;
  std::function<Vector(Rng&)> sampler;

  if (g.project_sublevel) {
    auto project = [g, level](const Vector& x) { return g.project_sublevel(x, level); };
    Vector anchor;
    try {
      anchor = project(Vector::Zero(d));
    } catch (const UsageError& e) {
      throw ConfigError(fmt::format("sublevel set of '{}' at level {} is empty: {}", g.name, level,
                                    e.what()));
    }
    if (g.value(anchor) > level + 1e-9) {
      throw ConfigError(fmt::format("sublevel set of '{}' at level {} is empty", g.name, level));
    }
    oracle = projected_gradient(objective, grid_best.value_or(unconstrained), project);
    method = dim <= 3 ? "41^d grid search refined by projected gradient (step 1/K) with the "
                        "exact sublevel projection, stopped at ||x_{k+1} - x_k|| <= 1e-12"
                      : "projected gradient (step 1/K) with the exact sublevel projection, "
                        "stopped at ||x_{k+1} - x_k|| <= 1e-12";
    witnesses = {*oracle, anchor};
    sampler = [project, dim](Rng& rng) { return project(gaussian_vector(dim, 3.0, rng)); };
  } else {
    if (!grid_best) {
      throw ConfigError(fmt::format("no feasible point of '{}' <= {} is known", g.name, level));
    }
    witnesses = {*grid_best};
    sampler = [g, level, dim, anchor = *grid_best](Rng& rng) -> Vector {
      // Rejection sampling with a fall back to the known feasible point.
      for (int attempt = 0; attempt < 1000; ++attempt) {
        Vector x = gaussian_vector(dim, 3.0, rng);
        if (g.value(x) <= level) return x;
      }
      return anchor;
    };
  }

  const OperatorPiece projector = make_subgradient_projector(g, level, dim);
  RandomOperator op = make_random_selection({projector, identity_piece()}, {0.5, 0.5},
                                            std::move(witnesses));
  return ProblemInstance{"sublevel", std::move(objective), std::move(op), std::move(oracle),
                         std::move(method), std::move(sampler)};
}

InstanceCheck check_instance(const ProblemInstance& problem, std::size_t probe_count, Rng& rng) {
  if (!problem.oracle_solution) throw UsageError("check_instance: problem has no oracle solution");
  if (probe_count == 0) throw UsageError("check_instance: need at least one probe");
  const Vector& x = *problem.oracle_solution;
  InstanceCheck check;
  for (const OmegaStar& omega : realization_panel(problem.op.space(), rng)) {
    check.fixedness = std::max(check.fixedness, norm(problem.op.apply(omega, x) - x));
  }
  std::vector<Vector> probes;
  probes.reserve(probe_count);
  for (std::size_t k = 0; k < probe_count; ++k) probes.push_back(problem.sample_feasible(rng));
  check.vi_residual = vi_residual(x, problem.objective, probes);
  return check;
}

}  // namespace fvpopt
