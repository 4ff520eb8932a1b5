#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fvpopt/objectives.hpp"
#include "fvpopt/operators.hpp"
#include "fvpopt/random.hpp"
#include "fvpopt/space.hpp"

namespace fvpopt {

/// min f(x) subject to x in FVP(T), together with a reference solution
/// computed by a method that shares no code path with the iteration.
struct ProblemInstance {
  std::string family;
  ObjectiveSpec objective;
  RandomOperator op;
  std::optional<Vector> oracle_solution;
  std::string oracle_method;
  /// Draws a point of the feasible set (used as variational-inequality probes).
  std::function<Vector(Rng&)> sample_feasible;
};

struct Halfspace {
  Vector a;
  double b = 0.0;
};

/// Halfspaces, SPD matrix and linear term of a generated test instance.
struct RandomQpData {
  std::vector<Halfspace> halfspaces;
  Matrix q;
  Vector c;
};

/// Deterministic instance generator: unit normals drawn from N(0,I), offsets
/// in [0.2, 1] (so the origin is strictly feasible), Q = R diag(lambda) R^T
/// with lambda in [1, 1.5] and a random rotation R, and c chosen so the
/// unconstrained minimizer 2 * sum_i a_i violates the constraints.
RandomQpData random_qp_data(std::size_t dim, std::size_t halfspace_count, std::uint64_t seed);

/// Euclidean projection onto the intersection of halfspaces by Dykstra's
/// alternating projections. Throws ConfigError if the sweeps do not settle
/// on a feasible point (empty intersection).
Vector project_onto_polyhedron(const std::vector<Halfspace>& halfspaces, const Vector& x);

/// f(x) = 1/2 <x,Qx> - <c,x> over the intersection of halfspaces; the operator
/// picks one halfspace projector uniformly at random. With no halfspaces the
/// operator is the identity and the oracle is Q^{-1} c. The construction is
/// deterministic; `seed` is accepted for symmetry with the other builders.
ProblemInstance build_random_projection_qp(std::size_t dim,
                                           const std::vector<Halfspace>& halfspaces,
                                           const Matrix& q, const Vector& c, std::uint64_t seed);

/// m agents with local costs 1/2 ||x_i - c_i||^2 coupled by random gossip. The
/// support of the edge process must connect the agents; the oracle is every
/// agent at the mean target.
ProblemInstance build_consensus_problem(std::size_t agents, std::size_t local_dim,
                                        const std::vector<Vector>& local_targets,
                                        const EdgeProcess& edge_process, double mixing,
                                        std::uint64_t seed);

/// f(x) = 1/2 <x,Qx> - <c,x> over {g <= level}; the operator picks the
/// subgradient projector of g or the identity with probability 1/2 each. The
/// oracle (when g exposes a sublevel projection) starts from the best feasible
/// point of a 41^d grid (d <= 3) and is refined by projected gradient.
ProblemInstance build_sublevel_problem(const ConvexFunction& g, double level, const Matrix& q,
                                       const Vector& c);

struct InstanceCheck {
  /// max over the sampled panel of ||T(w, x*) - x*||.
  double fixedness = 0.0;
  /// vi_residual of x* against the sampled probes.
  double vi_residual = 0.0;
};

/// Checks the oracle solution of `problem` against `probe_count` feasible
/// probes and a panel of realizations. Throws UsageError without an oracle.
InstanceCheck check_instance(const ProblemInstance& problem, std::size_t probe_count, Rng& rng);

}  // namespace fvpopt
