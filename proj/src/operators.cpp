#include "fvpopt/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <fmt/core.h>

#include "fvpopt/errors.hpp"

namespace fvpopt {

namespace {

constexpr double kWeightSumTol = 1e-12;
constexpr double kWitnessTol = 1e-10;

void check_weights(const std::vector<double>& weights, const char* who) {
  if (weights.empty()) throw UsageError(fmt::format("{}: no weights", who));
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw UsageError(fmt::format("{}: weight {} = {} is not strictly positive", who, i,
                                   weights[i]));
    }
    total += weights[i];
  }
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw UsageError(fmt::format("{}: weights sum to {:.17g}, expected 1", who, total));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// SampleSpace

SampleSpace SampleSpace::finite(std::vector<std::string> labels, std::vector<double> weights) {
  if (labels.empty()) throw UsageError("SampleSpace::finite: at least one label required");
  if (labels.size() != weights.size()) {
    throw UsageError(fmt::format("SampleSpace::finite: {} labels but {} weights", labels.size(),
                                 weights.size()));
  }
  check_weights(weights, "SampleSpace::finite");
  SampleSpace space;
  space.description_ = fmt::format("finite({})", labels.size());
  space.labels_ = std::move(labels);
  space.weights_ = std::move(weights);
  space.cumulative_.resize(space.weights_.size());
  std::partial_sum(space.weights_.begin(), space.weights_.end(), space.cumulative_.begin());
  return space;
}

SampleSpace SampleSpace::parameterized(std::string description, Sampler sampler) {
  if (!sampler) throw UsageError("SampleSpace::parameterized: empty sampler");
  SampleSpace space;
  space.description_ = std::move(description);
  space.sampler_ = std::move(sampler);
  return space;
}

OmegaStar SampleSpace::sample(Rng& rng) const {
  if (!is_finite()) return sampler_(rng);
  if (labels_.size() == 1) return OmegaStar{0, {}};
  // Inverse-CDF draw; the last bucket absorbs the rounding of the partial sums.
  const double u = std::uniform_real_distribution<double>(0.0, cumulative_.back())(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto label = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                           labels_.size() - 1);
  return OmegaStar{label, {}};
}

std::vector<OmegaStar> SampleSpace::enumerate() const {
  if (!is_finite()) {
    throw UsageError(fmt::format("SampleSpace '{}' is not finite", description_));
  }
  std::vector<OmegaStar> all;
  all.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) all.push_back(OmegaStar{i, {}});
  return all;
}

bool SampleSpace::contains(const OmegaStar& omega) const {
  return is_finite() ? omega.label < labels_.size() : true;
}

// ---------------------------------------------------------------------------
// Convex functions

ConvexFunction norm_function() {
  ConvexFunction g;
  g.name = "norm";
  g.value = [](const Vector& x) { return norm(x); };
  g.subgradient = [](const Vector& x) -> Vector {
    const double n = norm(x);
    if (n == 0.0) return Vector::Zero(x.size());
    return x / n;
  };
  g.project_sublevel = [](const Vector& x, double level) -> Vector {
    if (level < 0.0) throw UsageError("norm sublevel set is empty for a negative level");
    const double n = norm(x);
    return n <= level ? x : Vector(x * (level / n));
  };
  return g;
}

ConvexFunction max_coordinate_function() {
  ConvexFunction g;
  g.name = "max_coordinate";
  g.value = [](const Vector& x) { return x.maxCoeff(); };
  g.subgradient = [](const Vector& x) -> Vector {
    Eigen::Index k = 0;
    x.maxCoeff(&k);
    Vector u = Vector::Zero(x.size());
    u[k] = 1.0;
    return u;
  };
  g.project_sublevel = [](const Vector& x, double level) -> Vector {
    return x.cwiseMin(level);
  };
  return g;
}

ConvexFunction squared_norm_function() {
  ConvexFunction g;
  g.name = "squared_norm";
  g.value = [](const Vector& x) { return x.squaredNorm(); };
  g.subgradient = [](const Vector& x) -> Vector { return 2.0 * x; };
  g.project_sublevel = [](const Vector& x, double level) -> Vector {
    if (level < 0.0) throw UsageError("squared_norm sublevel set is empty for a negative level");
    const double r = std::sqrt(level);
    const double n = norm(x);
    return n <= r ? x : Vector(x * (r / n));
  };
  return g;
}

// ---------------------------------------------------------------------------
// Deterministic pieces

OperatorPiece identity_piece() {
  return OperatorPiece{"identity", 0, [](const Vector& x) { return x; },
                       [](const Vector&, double) { return true; }};
}

OperatorPiece make_halfspace_projector(const Vector& a, double b) {
  const double a_sq = a.squaredNorm();
  if (!(a_sq > 0.0)) throw UsageError("make_halfspace_projector: normal vector a is zero");
  OperatorPiece piece;
  piece.name = fmt::format("halfspace(b={})", b);
  piece.dim = static_cast<std::size_t>(a.size());
  piece.map = [a, b, a_sq](const Vector& x) -> Vector {
    const double ax = inner(a, x);
    if (ax <= b) return x;
    return x - ((ax - b) / a_sq) * a;
  };
  piece.is_fixed_point = [a, b](const Vector& x, double tol) { return inner(a, x) <= b + tol; };
  return piece;
}

OperatorPiece make_ball_projector(const Vector& center, double radius) {
  if (!(radius > 0.0)) {
    throw UsageError(fmt::format("make_ball_projector: radius {} must be positive", radius));
  }
  OperatorPiece piece;
  piece.name = fmt::format("ball(r={})", radius);
  piece.dim = static_cast<std::size_t>(center.size());
  piece.map = [center, radius](const Vector& x) -> Vector {
    const Vector offset = x - center;
    const double dist = norm(offset);
    if (dist <= radius) return x;
    return center + (radius / dist) * offset;
  };
  piece.is_fixed_point = [center, radius](const Vector& x, double tol) {
    return norm(x - center) <= radius + tol;
  };
  return piece;
}

OperatorPiece make_subgradient_projector(ConvexFunction g, double level, std::size_t dim) {
  if (!g.value || !g.subgradient) {
    throw UsageError("make_subgradient_projector: function needs value and subgradient");
  }
  OperatorPiece piece;
  piece.name = fmt::format("subgradient_projector({} <= {})", g.name, level);
  piece.dim = dim;
  piece.map = [g, level](const Vector& x) -> Vector {
    const double gx = g.value(x);
    if (gx <= level) return x;
    const Vector u = g.subgradient(x);
    const double u_sq = u.squaredNorm();
    if (!(u_sq > 0.0)) {
      throw DegenerateOracleError(fmt::format(
          "subgradient projector: zero subgradient of '{}' at an infeasible point (g = {})",
          g.name, gx));
    }
    return x - ((gx - level) / u_sq) * u;
  };
  piece.is_fixed_point = [g, level](const Vector& x, double tol) {
    return g.value(x) <= level + tol;
  };
  return piece;
}

// ---------------------------------------------------------------------------
// RandomOperator

RandomOperator::RandomOperator(std::string name, std::size_t dim, SampleSpace space,
                               ApplyFn apply, std::vector<Vector> witnesses,
                               MembershipFn membership)
    : name_(std::move(name)),
      dim_(dim),
      space_(std::move(space)),
      apply_(std::move(apply)),
      witnesses_(std::move(witnesses)),
      membership_(std::move(membership)) {
  if (dim_ == 0) throw UsageError(fmt::format("operator '{}': dimension must be positive", name_));
  if (!apply_) throw UsageError(fmt::format("operator '{}': empty apply function", name_));
  for (const Vector& w : witnesses_) {
    if (static_cast<std::size_t>(w.size()) != dim_) {
      throw UsageError(fmt::format("operator '{}': witness of dimension {} in R^{}", name_,
                                   w.size(), dim_));
    }
  }
}

Vector RandomOperator::apply(const OmegaStar& omega, const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw UsageError(fmt::format("operator '{}': point of dimension {} in R^{}", name_, x.size(),
                                 dim_));
  }
  return apply_(omega, x);
}

bool RandomOperator::in_fvp(const Vector& x, double tol) const {
  if (!membership_) {
    throw UsageError(fmt::format("operator '{}' declares no membership predicate", name_));
  }
  return membership_(x, tol);
}

// ---------------------------------------------------------------------------
// Averaging

Vector AveragedOperator::apply(const OmegaStar& omega, const Vector& x) const {
  return combine(x, base_.apply(omega, x));
}

RandomOperator AveragedOperator::as_random_operator() const {
  const AveragedOperator self = *this;
  RandomOperator::MembershipFn membership;
  if (base_.has_membership()) {
    membership = [self](const Vector& x, double tol) { return self.base_.in_fvp(x, tol); };
  }
  return RandomOperator(
      fmt::format("averaged({}, eta={})", base_.name(), eta_), base_.dim(), base_.space(),
      [self](const OmegaStar& omega, const Vector& x) { return self.apply(omega, x); },
      base_.witnesses(), membership);
}

AveragedOperator average(const RandomOperator& base, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw ConfigError(fmt::format("eta = {} must lie in the open interval (0, 1)", eta));
  }
  return AveragedOperator(base, eta);
}

AveragedOperator average_relaxed(const RandomOperator& base, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw UsageError(fmt::format("eta = {} must lie in (0, 1]", eta));
  }
  return AveragedOperator(base, eta);
}

// ---------------------------------------------------------------------------
// Random selection

RandomOperator make_random_selection(const std::vector<OperatorPiece>& pieces,
                                     const std::vector<double>& weights,
                                     std::vector<Vector> witnesses) {
  if (pieces.empty()) throw UsageError("make_random_selection: no pieces");
  if (pieces.size() != weights.size()) {
    throw UsageError(fmt::format("make_random_selection: {} pieces but {} weights",
                                 pieces.size(), weights.size()));
  }
  check_weights(weights, "make_random_selection");

  std::size_t dim = 0;
  for (const OperatorPiece& p : pieces) {
    if (p.dim == 0) continue;
    if (dim != 0 && p.dim != dim) {
      throw UsageError(fmt::format("make_random_selection: pieces disagree on dimension ({} vs {})",
                                   dim, p.dim));
    }
    dim = p.dim;
  }
  if (dim == 0 && !witnesses.empty()) dim = static_cast<std::size_t>(witnesses.front().size());
  if (dim == 0) {
    throw UsageError("make_random_selection: cannot infer the dimension from pieces or witnesses");
  }

  for (std::size_t w = 0; w < witnesses.size(); ++w) {
    if (static_cast<std::size_t>(witnesses[w].size()) != dim) {
      throw UsageError(fmt::format("make_random_selection: witness {} has dimension {} in R^{}", w,
                                   witnesses[w].size(), dim));
    }
    for (const OperatorPiece& p : pieces) {
      const double moved = norm(p(witnesses[w]) - witnesses[w]);
      if (moved > kWitnessTol) {
        throw UsageError(fmt::format(
            "make_random_selection: witness {} is moved by piece '{}' (distance {:.3e})", w,
            p.name, moved));
      }
    }
  }

  std::vector<std::string> labels;
  labels.reserve(pieces.size());
  bool all_membership = true;
  for (const OperatorPiece& p : pieces) {
    labels.push_back(p.name);
    all_membership = all_membership && static_cast<bool>(p.is_fixed_point);
  }

  RandomOperator::MembershipFn membership;
  if (all_membership) {
    membership = [pieces](const Vector& x, double tol) {
      return std::all_of(pieces.begin(), pieces.end(),
                         [&](const OperatorPiece& p) { return p.is_fixed_point(x, tol); });
    };
  }

  std::string name = "selection(";
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    name += (i ? ", " : "") + pieces[i].name;
  }
  name += ")";

  return RandomOperator(
      std::move(name), dim, SampleSpace::finite(std::move(labels), weights),
      [pieces](const OmegaStar& omega, const Vector& x) { return pieces.at(omega.label)(x); },
      std::move(witnesses), std::move(membership));
}

RandomOperator make_deterministic_operator(const OperatorPiece& piece,
                                           std::vector<Vector> witnesses) {
  return make_random_selection({piece}, {1.0}, std::move(witnesses));
}

// ---------------------------------------------------------------------------
// Gossip

namespace {

void check_edges(std::size_t agents, const EdgeSet& edges, const char* who) {
  for (const Edge& e : edges) {
    if (e.i >= agents || e.j >= agents || e.i == e.j) {
      throw UsageError(fmt::format("{}: invalid edge ({}, {}) on {} agents", who, e.i, e.j,
                                   agents));
    }
  }
}

std::string format_edges(const EdgeSet& edges) {
  std::string s = "{";
  for (std::size_t k = 0; k < edges.size(); ++k) {
    s += fmt::format("{}({},{})", k ? "," : "", edges[k].i, edges[k].j);
  }
  return s + "}";
}

}  // namespace

EdgeProcess EdgeProcess::finite(std::size_t agents, std::vector<EdgeSet> outcomes,
                                std::vector<double> weights) {
  if (outcomes.empty()) throw UsageError("EdgeProcess::finite: no outcomes");
  if (outcomes.size() != weights.size()) {
    throw UsageError("EdgeProcess::finite: outcome and weight counts differ");
  }
  check_weights(weights, "EdgeProcess::finite");
  for (const EdgeSet& s : outcomes) check_edges(agents, s, "EdgeProcess::finite");
  EdgeProcess p;
  p.agents_ = agents;
  p.outcomes_ = std::move(outcomes);
  p.weights_ = std::move(weights);
  return p;
}

EdgeProcess EdgeProcess::single_edge(std::size_t agents, const EdgeSet& edges) {
  if (edges.empty()) throw UsageError("EdgeProcess::single_edge: no edges");
  std::vector<EdgeSet> outcomes;
  outcomes.reserve(edges.size());
  for (const Edge& e : edges) outcomes.push_back(EdgeSet{e});
  // Uniform weights, with the last one absorbing rounding so they sum to 1.
  std::vector<double> weights(edges.size(), 1.0 / static_cast<double>(edges.size()));
  weights.back() = 1.0 - std::accumulate(weights.begin(), weights.end() - 1, 0.0);
  return finite(agents, std::move(outcomes), std::move(weights));
}

EdgeProcess EdgeProcess::bernoulli(std::size_t agents, EdgeSet edges, double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw UsageError(fmt::format("EdgeProcess::bernoulli: probability {} outside (0, 1]", p));
  }
  if (edges.empty()) throw UsageError("EdgeProcess::bernoulli: no edges");
  check_edges(agents, edges, "EdgeProcess::bernoulli");
  EdgeProcess process;
  process.agents_ = agents;
  process.base_edges_ = std::move(edges);
  process.probability_ = p;
  return process;
}

EdgeSet EdgeProcess::support() const {
  if (!outcomes_.empty()) {
    EdgeSet all;
    for (const EdgeSet& s : outcomes_) all.insert(all.end(), s.begin(), s.end());
    return all;
  }
  return base_edges_;
}

SampleSpace EdgeProcess::sample_space() const {
  if (!outcomes_.empty()) {
    std::vector<std::string> labels;
    labels.reserve(outcomes_.size());
    for (const EdgeSet& s : outcomes_) labels.push_back(format_edges(s));
    return SampleSpace::finite(std::move(labels), weights_);
  }
  const std::size_t count = base_edges_.size();
  const double p = probability_;
  return SampleSpace::parameterized(
      fmt::format("bernoulli(p={}, edges={})", p, count), [count, p](Rng& rng) {
        std::bernoulli_distribution active(p);
        OmegaStar omega;
        omega.params.resize(count);
        for (double& bit : omega.params) bit = active(rng) ? 1.0 : 0.0;
        return omega;
      });
}

EdgeSet EdgeProcess::edges_of(const OmegaStar& omega) const {
  if (!outcomes_.empty()) return outcomes_.at(omega.label);
  if (omega.params.size() != base_edges_.size()) {
    throw UsageError("EdgeProcess: realization does not match the edge count");
  }
  EdgeSet active;
  for (std::size_t k = 0; k < base_edges_.size(); ++k) {
    if (omega.params[k] != 0.0) active.push_back(base_edges_[k]);
  }
  return active;
}

EdgeSet ring_edges(std::size_t agents) {
  EdgeSet edges;
  if (agents < 2) return edges;
  if (agents == 2) return {Edge{0, 1}};
  for (std::size_t i = 0; i < agents; ++i) edges.push_back(Edge{i, (i + 1) % agents});
  return edges;
}

EdgeSet path_edges(std::size_t agents) {
  EdgeSet edges;
  for (std::size_t i = 0; i + 1 < agents; ++i) edges.push_back(Edge{i, i + 1});
  return edges;
}

EdgeSet complete_edges(std::size_t agents) {
  EdgeSet edges;
  for (std::size_t i = 0; i < agents; ++i) {
    for (std::size_t j = i + 1; j < agents; ++j) edges.push_back(Edge{i, j});
  }
  return edges;
}

std::vector<std::vector<std::size_t>> connected_components(std::size_t agents,
                                                           const EdgeSet& edges) {
  std::vector<std::size_t> parent(agents);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const Edge& e : edges) {
    const std::size_t a = find(e.i), b = find(e.j);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::vector<std::size_t>> components;
  std::vector<std::size_t> slot(agents, agents);
  for (std::size_t v = 0; v < agents; ++v) {
    const std::size_t root = find(v);
    if (slot[root] == agents) {
      slot[root] = components.size();
      components.emplace_back();
    }
    components[slot[root]].push_back(v);
  }
  return components;
}

RandomOperator make_gossip_operator(std::size_t agents, std::size_t local_dim,
                                    const EdgeProcess& edge_process, double mixing) {
  if (agents < 2) throw UsageError(fmt::format("gossip: need at least 2 agents, got {}", agents));
  if (local_dim < 1) throw UsageError("gossip: local dimension must be positive");
  if (!(mixing > 0.0 && mixing <= 1.0)) {
    throw UsageError(fmt::format("gossip: mixing {} outside (0, 1]", mixing));
  }
  if (edge_process.agents() != agents) {
    throw UsageError(fmt::format("gossip: edge process is on {} agents, operator on {}",
                                 edge_process.agents(), agents));
  }

  const auto m = static_cast<Eigen::Index>(agents);
  const auto d = static_cast<Eigen::Index>(local_dim);
  const std::size_t dim = agents * local_dim;

  // Consensus witnesses: the origin, the all-ones vector and one stacked
  // non-constant block.
  Vector block(d);
  for (Eigen::Index k = 0; k < d; ++k) block[k] = static_cast<double>(k + 1);
  std::vector<Vector> witnesses{Vector::Zero(m * d), Vector::Ones(m * d),
                                block.replicate(m, 1)};

  auto apply = [edge_process, d, mixing](const OmegaStar& omega, const Vector& x) -> Vector {
    Vector y = x;
    const double w = 0.5 * mixing;
    for (const Edge& e : edge_process.edges_of(omega)) {
      const Eigen::Index i = static_cast<Eigen::Index>(e.i) * d;
      const Eigen::Index j = static_cast<Eigen::Index>(e.j) * d;
      const Vector diff = y.segment(i, d) - y.segment(j, d);
      y.segment(i, d) -= w * diff;
      y.segment(j, d) += w * diff;
    }
    return y;
  };

  auto consensus = [m, d](const Vector& x, double tol) {
    for (Eigen::Index a = 1; a < m; ++a) {
      if ((x.segment(a * d, d) - x.segment(0, d)).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
  };

  return RandomOperator(fmt::format("gossip(m={}, d={}, mixing={})", agents, local_dim, mixing),
                        dim, edge_process.sample_space(), std::move(apply), std::move(witnesses),
                        std::move(consensus));
}

RandomOperator make_scaling_operator(std::size_t dim, double scale) {
  return RandomOperator(
      fmt::format("scaling({})", scale), dim, SampleSpace::finite({"scale"}, {1.0}),
      [scale](const OmegaStar&, const Vector& x) -> Vector { return scale * x; },
      {Vector::Zero(static_cast<Eigen::Index>(dim))},
      [](const Vector& x, double tol) { return norm(x) <= tol; });
}

}  // namespace fvpopt
