#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fvpopt/random.hpp"
#include "fvpopt/space.hpp"

namespace fvpopt {

/// One realization omega* of a sample space. Finite spaces identify it by
/// `label`; parameterized spaces carry their draw in `params`.
struct OmegaStar {
  std::size_t label = 0;
  std::vector<double> params;
};

/// The index set Omega* of a random operator together with the rule used to
/// draw from it. Sampling is a pure function of the caller's RNG state.
class SampleSpace {
 public:
  using Sampler = std::function<OmegaStar(Rng&)>;

  /// Categorical distribution over `labels`. Weights must be strictly
  /// positive and sum to 1 within 1e-12.
  static SampleSpace finite(std::vector<std::string> labels, std::vector<double> weights);

  /// Continuous or combinatorial space described only by its sampler.
  static SampleSpace parameterized(std::string description, Sampler sampler);

  bool is_finite() const { return !labels_.empty(); }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::string& description() const { return description_; }

  OmegaStar sample(Rng& rng) const;

  /// Every realization of a finite space, in label order. Throws for
  /// parameterized spaces.
  std::vector<OmegaStar> enumerate() const;

  bool contains(const OmegaStar& omega) const;

 private:
  SampleSpace() = default;

  std::string description_;
  std::vector<std::string> labels_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  Sampler sampler_;
};

/// A deterministic map H -> H used as one realization T(omega*, .).
struct OperatorPiece {
  std::string name;
  /// Dimension the piece is defined on; 0 if it acts on any dimension.
  std::size_t dim = 0;
  std::function<Vector(const Vector&)> map;
  /// Fixed-point membership test with tolerance, when known in closed form.
  std::function<bool(const Vector&, double)> is_fixed_point;

  Vector operator()(const Vector& x) const { return map(x); }
};

/// Convex function with a subgradient oracle.
struct ConvexFunction {
  std::string name;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> subgradient;
  /// Euclidean projection onto {g <= level} when available in closed form.
  /// Only reference solvers use it; the iteration never does.
  std::function<Vector(const Vector&, double)> project_sublevel;
};

/// g(x) = ||x||, subgradient x/||x|| (zero at the origin).
ConvexFunction norm_function();
/// g(x) = max_i x_i, subgradient e_k for the first maximizing index k.
ConvexFunction max_coordinate_function();
/// g(x) = ||x||^2, gradient 2x.
ConvexFunction squared_norm_function();

OperatorPiece identity_piece();

/// Projection onto {x : <a,x> <= b}. Throws UsageError for a = 0.
OperatorPiece make_halfspace_projector(const Vector& a, double b);

/// Projection onto the closed ball B(center, radius). Throws UsageError for radius <= 0.
OperatorPiece make_ball_projector(const Vector& center, double radius);

/// Subgradient projector onto {g <= level}:
///   Q(x) = x                                 if g(x) <= level
///   Q(x) = x - (g(x) - level)/||u||^2 * u     otherwise, u in dg(x).
/// Quasi-nonexpansive, but in general not nonexpansive. Applying it at an
/// infeasible point where the oracle returns u = 0 throws DegenerateOracleError.
OperatorPiece make_subgradient_projector(ConvexFunction g, double level, std::size_t dim);

/// The random map T : Omega* x R^d -> R^d with its declared fixed value points.
///
/// A fixed value point is a single x fixed by T(omega*, .) for every omega*.
/// The set is represented by witness points plus an optional membership
/// predicate rather than enumerated.
class RandomOperator {
 public:
  using ApplyFn = std::function<Vector(const OmegaStar&, const Vector&)>;
  using MembershipFn = std::function<bool(const Vector&, double)>;

  RandomOperator(std::string name, std::size_t dim, SampleSpace space, ApplyFn apply,
                 std::vector<Vector> witnesses, MembershipFn membership = {});

  Vector apply(const OmegaStar& omega, const Vector& x) const;

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  const SampleSpace& space() const { return space_; }
  const std::vector<Vector>& witnesses() const { return witnesses_; }
  bool has_membership() const { return static_cast<bool>(membership_); }

  /// Membership predicate; throws UsageError if none was declared.
  bool in_fvp(const Vector& x, double tol) const;

  /// True when the fixed-value-point set is declared nonempty, either by a
  /// witness or a membership predicate.
  bool declares_feasible() const { return !witnesses_.empty() || has_membership(); }

 private:
  std::string name_;
  std::size_t dim_;
  SampleSpace space_;
  ApplyFn apply_;
  std::vector<Vector> witnesses_;
  MembershipFn membership_;
};

/// T_hat(omega*, x) = (1 - eta) x + eta T(omega*, x), eta in (0,1).
/// Shares the fixed value points of its base.
class AveragedOperator {
 public:
  const RandomOperator& base() const { return base_; }
  double eta() const { return eta_; }

  Vector apply(const OmegaStar& omega, const Vector& x) const;

  /// Combination step given an already evaluated T(omega*, x).
  Vector combine(const Vector& x, const Vector& tx) const { return (1.0 - eta_) * x + eta_ * tx; }

  /// The averaged map as a RandomOperator over the same sample space.
  RandomOperator as_random_operator() const;

 private:
  friend AveragedOperator average(const RandomOperator& base, double eta);
  friend AveragedOperator average_relaxed(const RandomOperator& base, double eta);

  AveragedOperator(RandomOperator base, double eta) : base_(std::move(base)), eta_(eta) {}

  RandomOperator base_;
  double eta_;
};

/// Averaging used by the iteration. Throws ConfigError unless eta in (0,1).
AveragedOperator average(const RandomOperator& base, double eta);

/// Same as average() but admits eta = 1, the closed range the fixed-point
/// properties of averaging hold on. Used by the property checkers.
AveragedOperator average_relaxed(const RandomOperator& base, double eta);

/// Finite Omega* = {0..k-1} with categorical weights; realization i applies
/// pieces[i]. Each witness must be fixed by every piece to 1e-10.
RandomOperator make_random_selection(const std::vector<OperatorPiece>& pieces,
                                     const std::vector<double>& weights,
                                     std::vector<Vector> witnesses);

/// Single deterministic piece as a random operator with a one-point space.
RandomOperator make_deterministic_operator(const OperatorPiece& piece,
                                           std::vector<Vector> witnesses);

// ---------------------------------------------------------------------------
// Gossip over random networks
// ---------------------------------------------------------------------------

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
};

using EdgeSet = std::vector<Edge>;

/// Distribution over undirected edge sets on `agents` nodes.
class EdgeProcess {
 public:
  /// Finite family of edge sets with strictly positive weights summing to 1.
  static EdgeProcess finite(std::size_t agents, std::vector<EdgeSet> outcomes,
                            std::vector<double> weights);

  /// One edge of `edges` activated per realization, uniformly.
  static EdgeProcess single_edge(std::size_t agents, const EdgeSet& edges);

  /// Each edge of `edges` active independently with probability p in (0,1].
  static EdgeProcess bernoulli(std::size_t agents, EdgeSet edges, double p);

  std::size_t agents() const { return agents_; }

  /// Edges with positive activation probability.
  EdgeSet support() const;

  SampleSpace sample_space() const;

  EdgeSet edges_of(const OmegaStar& omega) const;

 private:
  EdgeProcess() = default;

  std::size_t agents_ = 0;
  std::vector<EdgeSet> outcomes_;  // finite kind
  std::vector<double> weights_;
  EdgeSet base_edges_;             // bernoulli kind
  double probability_ = 0.0;
};

EdgeSet ring_edges(std::size_t agents);
EdgeSet path_edges(std::size_t agents);
EdgeSet complete_edges(std::size_t agents);

/// Connected components of the graph on `agents` nodes with edges `edges`,
/// each listed in increasing node order.
std::vector<std::vector<std::size_t>> connected_components(std::size_t agents,
                                                           const EdgeSet& edges);

/// Pairwise gossip on the stacked space R^{m*d}. For every activated edge
/// (i,j), in order, x_i <- x_i - (mixing/2)(x_i - x_j) and symmetrically for
/// x_j. Consensus vectors are fixed for every realization. Throws UsageError
/// for m < 2, d < 1, mixing outside (0,1] or edges referencing unknown agents.
RandomOperator make_gossip_operator(std::size_t agents, std::size_t local_dim,
                                    const EdgeProcess& edge_process, double mixing);

/// T(x) = scale * x, a fixture that violates quasi-nonexpansivity for
/// scale > 1 while still fixing the origin.
RandomOperator make_scaling_operator(std::size_t dim, double scale);

}  // namespace fvpopt
