#include "fvpopt/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "fvpopt/errors.hpp"
#include "fvpopt/objectives.hpp"

namespace fvpopt {

namespace {

using boost::property_tree::ptree;
using nlohmann::json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// One section of the document with bookkeeping for unknown keys.
class Section {
 public:
  Section(std::string name, const ptree* tree) : name_(std::move(name)), tree_(tree) {}

  void reject_unknown(const std::set<std::string>& allowed) const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!allowed.count(key)) {
        throw ConfigError(fmt::format("[{}] {}: unknown key", name_, key));
      }
    }
  }

  bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }

  std::string raw(const std::string& key) const {
    if (!has(key)) throw ConfigError(fmt::format("[{}] {}: missing required key", name_, key));
    return trim(tree_->get<std::string>(key));
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(fmt::format("[{}] {}: {}", name_, key, what));
  }

  json value(const std::string& key) const {
    const std::string text = raw(key);
    try {
      return json::parse(text);
    } catch (const json::parse_error&) {
      fail(key, fmt::format("cannot parse '{}'", text));
    }
  }

  double number(const std::string& key) const {
    const json v = value(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t unsigned_int(const std::string& key) const {
    const json v = value(key);
    if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::uint64_t unsigned_or(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? unsigned_int(key) : fallback;
  }

  bool boolean_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json v = value(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string identifier(const std::string& key) const {
    std::string text = raw(key);
    if (text.empty()) fail(key, "empty value");
    return text;
  }

  std::string identifier_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? identifier(key) : fallback;
  }

  std::vector<std::string> identifier_list(const std::string& key) const {
    const std::string text = raw(key);
    if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
      fail(key, "expected a bracketed list");
    }
    std::vector<std::string> items;
    std::stringstream body(text.substr(1, text.size() - 2));
    std::string item;
    while (std::getline(body, item, ',')) {
      item = trim(item);
      if (item.size() >= 2 && item.front() == '"' && item.back() == '"') {
        item = item.substr(1, item.size() - 2);
      }
      if (item.empty()) {
        if (items.empty() && body.eof()) break;
        fail(key, "empty list entry");
      }
      items.push_back(item);
    }
    return items;
  }

  Vector vector(const std::string& key) const { return to_vector(key, value(key)); }

  Vector to_vector(const std::string& key, const json& v) const {
    if (!v.is_array()) fail(key, "expected a bracketed list of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(key, fmt::format("entry {} is not a number", i));
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }

  std::vector<Vector> vector_list(const std::string& key) const {
    const json v = value(key);
    if (!v.is_array()) fail(key, "expected a list of lists");
    std::vector<Vector> out;
    for (const json& row : v) out.push_back(to_vector(key, row));
    return out;
  }

  Vector vector_of_size(const std::string& key, std::size_t size) const {
    Vector v = vector(key);
    if (static_cast<std::size_t>(v.size()) != size) {
      fail(key, fmt::format("expected {} entries, got {}", size, v.size()));
    }
    return v;
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  const ptree* tree_;
};

std::size_t positive_size(const Section& s, const std::string& key) {
  const std::uint64_t v = s.unsigned_int(key);
  if (v == 0) s.fail(key, "must be positive");
  return static_cast<std::size_t>(v);
}

/// Q from q_diagonal or q_matrix (exactly one), checked to be symmetric
/// positive definite.
Matrix read_q(const Section& s, std::size_t dim) {
  const bool diag = s.has("q_diagonal");
  const bool dense = s.has("q_matrix");
  if (diag == dense) {
    throw ConfigError(fmt::format("[{}] q_diagonal: give exactly one of q_diagonal and q_matrix",
                                  s.name()));
  }
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix q;
  if (diag) {
    q = s.vector_of_size("q_diagonal", dim).asDiagonal();
  } else {
    const std::vector<Vector> rows = s.vector_list("q_matrix");
    if (rows.size() != dim) {
      s.fail("q_matrix", fmt::format("expected {} rows, got {}", dim, rows.size()));
    }
    q.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const Vector& row = rows[static_cast<std::size_t>(i)];
      if (row.size() != d) s.fail("q_matrix", fmt::format("row {} has {} entries", i, row.size()));
      q.row(i) = row.transpose();
    }
  }
  try {
    make_quadratic(q, Vector::Zero(d));
  } catch (const UsageError& e) {
    s.fail(diag ? "q_diagonal" : "q_matrix", e.what());
  }
  return q;
}

const std::set<std::string> kCommonProblemKeys{"family", "inject_fault"};

const std::map<std::string, std::set<std::string>> kFamilyKeys{
    {"random_projection_qp",
     {"dim", "halfspace_normals", "halfspace_offsets", "halfspace_count", "instance_seed",
      "q_diagonal", "q_matrix", "c"}},
    {"consensus",
     {"agents", "local_dim", "targets", "topology", "edges", "activation",
      "activation_probability", "mixing"}},
    {"sublevel", {"dim", "constraint", "level", "q_diagonal", "q_matrix", "c"}},
};

RandomProjectionQpParams parse_qp(const Section& s) {
  RandomProjectionQpParams p;
  p.dim = positive_size(s, "dim");
  if (s.has("halfspace_count")) {
    for (const char* key :
         {"halfspace_normals", "halfspace_offsets", "q_diagonal", "q_matrix", "c"}) {
      if (s.has(key)) s.fail(key, "cannot be combined with halfspace_count (generated instance)");
    }
    const std::uint64_t count = s.unsigned_int("halfspace_count");
    p.instance_seed = s.unsigned_or("instance_seed", 0);
    RandomQpData data = random_qp_data(p.dim, static_cast<std::size_t>(count), *p.instance_seed);
    p.halfspaces = std::move(data.halfspaces);
    p.q = std::move(data.q);
    p.c = std::move(data.c);
    return p;
  }
  if (s.has("instance_seed")) s.fail("instance_seed", "only meaningful with halfspace_count");
  p.q = read_q(s, p.dim);
  p.c = s.vector_of_size("c", p.dim);
  if (s.has("halfspace_normals") != s.has("halfspace_offsets")) {
    s.fail(s.has("halfspace_normals") ? "halfspace_offsets" : "halfspace_normals",
           "halfspace_normals and halfspace_offsets must be given together");
  }
  if (s.has("halfspace_normals")) {
    const std::vector<Vector> normals = s.vector_list("halfspace_normals");
    const Vector offsets = s.vector_of_size("halfspace_offsets", normals.size());
    for (std::size_t i = 0; i < normals.size(); ++i) {
      if (static_cast<std::size_t>(normals[i].size()) != p.dim) {
        s.fail("halfspace_normals", fmt::format("normal {} has {} entries, dim = {}", i,
                                                normals[i].size(), p.dim));
      }
      if (!(normals[i].squaredNorm() > 0.0)) {
        s.fail("halfspace_normals", fmt::format("normal {} is zero", i));
      }
      p.halfspaces.push_back(Halfspace{normals[i], offsets[static_cast<Eigen::Index>(i)]});
    }
  }
  return p;
}

ConsensusParams parse_consensus(const Section& s) {
  ConsensusParams p;
  p.agents = positive_size(s, "agents");
  if (p.agents < 2) s.fail("agents", "need at least 2 agents");
  p.local_dim = positive_size(s, "local_dim");
  p.targets = s.vector_list("targets");
  if (p.targets.size() != p.agents) {
    s.fail("targets", fmt::format("expected {} targets, got {}", p.agents, p.targets.size()));
  }
  for (std::size_t i = 0; i < p.targets.size(); ++i) {
    if (static_cast<std::size_t>(p.targets[i].size()) != p.local_dim) {
      s.fail("targets", fmt::format("target {} has {} entries, local_dim = {}", i,
                                    p.targets[i].size(), p.local_dim));
    }
  }

  if (s.has("topology") && s.has("edges")) s.fail("edges", "give either topology or edges");
  if (s.has("edges")) {
    for (const Vector& e : s.vector_list("edges")) {
      if (e.size() != 2 || e[0] < 0 || e[1] < 0 || e[0] != std::floor(e[0]) ||
          e[1] != std::floor(e[1])) {
        s.fail("edges", "each edge must be a pair of agent indices");
      }
      const auto i = static_cast<std::size_t>(e[0]);
      const auto j = static_cast<std::size_t>(e[1]);
      if (i >= p.agents || j >= p.agents || i == j) {
        s.fail("edges", fmt::format("edge ({}, {}) is not between two distinct agents", i, j));
      }
      p.edges.push_back(Edge{i, j});
    }
    if (p.edges.empty()) s.fail("edges", "no edges");
  } else {
    const std::string topology = s.identifier_or("topology", "ring");
    if (topology == "ring") {
      p.edges = ring_edges(p.agents);
    } else if (topology == "path") {
      p.edges = path_edges(p.agents);
    } else if (topology == "complete") {
      p.edges = complete_edges(p.agents);
    } else {
      s.fail("topology", fmt::format("'{}' is not one of ring, path, complete", topology));
    }
  }

  const std::string activation = s.identifier_or("activation", "single_edge");
  if (activation == "single_edge") {
    p.activation = Activation::single_edge;
    if (s.has("activation_probability")) {
      s.fail("activation_probability", "only meaningful with activation = bernoulli");
    }
  } else if (activation == "bernoulli") {
    p.activation = Activation::bernoulli;
    p.activation_probability = s.number_or("activation_probability", 0.5);
    if (!(p.activation_probability > 0.0 && p.activation_probability <= 1.0)) {
      s.fail("activation_probability", "must lie in (0, 1]");
    }
  } else {
    s.fail("activation", fmt::format("'{}' is not one of single_edge, bernoulli", activation));
  }
  p.mixing = s.number_or("mixing", 1.0);
  if (!(p.mixing > 0.0 && p.mixing <= 1.0)) s.fail("mixing", "must lie in (0, 1]");
  return p;
}

SublevelParams parse_sublevel(const Section& s) {
  SublevelParams p;
  p.dim = positive_size(s, "dim");
  p.constraint = s.identifier("constraint");
  if (p.constraint != "norm" && p.constraint != "max_coordinate" &&
      p.constraint != "squared_norm") {
    s.fail("constraint",
           fmt::format("'{}' is not one of norm, max_coordinate, squared_norm", p.constraint));
  }
  p.level = s.number("level");
  p.q = read_q(s, p.dim);
  p.c = s.vector_of_size("c", p.dim);
  return p;
}

std::size_t problem_dim(const ProblemConfig& problem) {
  return std::visit(
      [](const auto& p) -> std::size_t {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConsensusParams>) {
          return p.agents * p.local_dim;
        } else {
          return p.dim;
        }
      },
      problem.params);
}

void set_constants(ProblemConfig& problem) {
  if (const auto* c = std::get_if<ConsensusParams>(&problem.params)) {
    (void)c;
    problem.rho = 1.0;
    problem.lipschitz_k = 1.0;
    return;
  }
  const Matrix& q = std::holds_alternative<RandomProjectionQpParams>(problem.params)
                        ? std::get<RandomProjectionQpParams>(problem.params).q
                        : std::get<SublevelParams>(problem.params).q;
  const ObjectiveSpec objective = make_quadratic(q, Vector::Zero(q.rows()));
  problem.rho = objective.rho();
  problem.lipschitz_k = objective.lipschitz_k();
}

ProblemConfig parse_problem(const Section& s) {
  ProblemConfig problem;
  problem.family = s.identifier("family");
  const auto family = kFamilyKeys.find(problem.family);
  if (family == kFamilyKeys.end()) {
    s.fail("family", fmt::format("'{}' is not one of random_projection_qp, consensus, sublevel",
                                 problem.family));
  }
  std::set<std::string> allowed = kCommonProblemKeys;
  allowed.insert(family->second.begin(), family->second.end());
  s.reject_unknown(allowed);

  const std::string fault = s.identifier_or("inject_fault", "none");
  if (fault == "none") {
    problem.fault = FaultInjection::none;
  } else if (fault == "expanding_operator") {
    problem.fault = FaultInjection::expanding_operator;
  } else {
    s.fail("inject_fault", fmt::format("'{}' is not one of none, expanding_operator", fault));
  }

  if (problem.family == "random_projection_qp") {
    problem.params = parse_qp(s);
  } else if (problem.family == "consensus") {
    problem.params = parse_consensus(s);
  } else {
    problem.params = parse_sublevel(s);
  }
  set_constants(problem);
  return problem;
}

AlgorithmConfig parse_algorithm(const Section& s, const ProblemConfig& problem) {
  s.reject_unknown({"beta", "eta", "zeta", "step_sizes", "step_sizes_attested", "max_iters",
                    "seed", "record_every", "initial_point"});
  AlgorithmConfig config;
  const BetaInterval interval = beta_interval(problem.rho, problem.lipschitz_k);
  if (s.has("beta")) {
    const double beta = s.number("beta");
    if (!interval.contains(beta)) {
      throw AdmissibilityError(fmt::format(
          "[algorithm] beta: {} is outside the admissible interval {} = (0, 2 rho/K^2) with "
          "rho = {}, K = {}",
          beta, interval.to_string(), problem.rho, problem.lipschitz_k));
    }
    config.beta = beta;
  }

  config.eta = s.number_or("eta", 0.5);
  if (!(config.eta > 0.0 && config.eta < 1.0)) {
    s.fail("eta", fmt::format("{} must lie in the open interval (0, 1)", config.eta));
  }

  config.max_iters = static_cast<std::size_t>(s.unsigned_or("max_iters", 1000));
  if (config.max_iters == 0) s.fail("max_iters", "must be positive");
  config.seed = s.unsigned_or("seed", 0);
  config.record_every = static_cast<std::size_t>(s.unsigned_or("record_every", 0));

  if (s.has("step_sizes")) {
    if (s.has("zeta")) s.fail("zeta", "cannot be combined with step_sizes");
    const Vector values = s.vector("step_sizes");
    try {
      config.schedule = StepSchedule::custom(std::vector<double>(values.begin(), values.end()),
                                             s.boolean_or("step_sizes_attested", false));
    } catch (const ConfigError& e) {
      s.fail("step_sizes", e.what());
    }
    if (!config.schedule.attested()) {
      s.fail("step_sizes_attested",
             "custom step sizes must be attested (alpha_n -> 0, sum alpha_n = inf)");
    }
    if (config.schedule.length() < config.max_iters) {
      s.fail("step_sizes", fmt::format("{} values for max_iters = {}", config.schedule.length(),
                                       config.max_iters));
    }
  } else {
    if (s.has("step_sizes_attested")) s.fail("step_sizes_attested", "requires step_sizes");
    const double zeta = s.number_or("zeta", 1.0);
    if (!(zeta > 0.0 && zeta <= 1.0)) s.fail("zeta", fmt::format("{} must lie in (0, 1]", zeta));
    config.schedule = StepSchedule::power(zeta);
  }

  if (s.has("initial_point")) {
    config.initial_point = s.vector_of_size("initial_point", problem_dim(problem));
  }
  return config;
}

EnsembleConfig parse_ensemble(const Section& s) {
  s.reject_unknown({"realizations", "tol", "threads"});
  EnsembleConfig e;
  e.realizations = static_cast<std::size_t>(s.unsigned_or("realizations", 100));
  if (e.realizations == 0) s.fail("realizations", "must be positive");
  e.tol = s.number_or("tol", 1e-2);
  if (!(e.tol > 0.0)) s.fail("tol", "must be positive");
  e.threads = static_cast<std::size_t>(s.unsigned_or("threads", 0));
  return e;
}

OutputConfig parse_output(const Section& s) {
  s.reject_unknown({"csv_path", "summary_path"});
  OutputConfig o;
  if (s.has("csv_path")) o.csv_path = s.identifier("csv_path");
  if (s.has("summary_path")) o.summary_path = s.identifier("summary_path");
  return o;
}

ChecksConfig parse_checks(const Section& s) {
  s.reject_unknown({"suites", "samples"});
  ChecksConfig c;
  if (s.has("suites")) {
    c.suites = s.identifier_list("suites");
    for (const std::string& suite : c.suites) {
      if (std::find_if(std::begin(kCheckSuites), std::end(kCheckSuites),
                       [&](const char* known) { return suite == known; }) ==
          std::end(kCheckSuites)) {
        s.fail("suites", fmt::format("unknown suite '{}'", suite));
      }
    }
  }
  c.samples = static_cast<std::size_t>(s.unsigned_or("samples", 10000));
  if (c.samples == 0) s.fail("samples", "must be positive");
  return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("malformed config (line {}): {}", e.line(), e.message()));
  }

  const std::set<std::string> sections{"problem", "algorithm", "ensemble", "output", "checks"};
  for (const auto& [key, child] : tree) {
    if (child.empty() && !child.data().empty()) {
      throw ConfigError(fmt::format("{}: key outside of any section", key));
    }
    if (!sections.count(key)) throw ConfigError(fmt::format("[{}]: unknown section", key));
  }
  auto section = [&](const std::string& name) {
    const auto it = tree.find(name);
    return Section(name, it == tree.not_found() ? nullptr : &it->second);
  };

  if (tree.find("problem") == tree.not_found()) {
    throw ConfigError("[problem]: missing required section");
  }
  ExperimentConfig config;
  try {
    config.problem = parse_problem(section("problem"));
  } catch (const UsageError& e) {
    throw ConfigError(fmt::format("[problem]: {}", e.what()));
  }
  config.algorithm = parse_algorithm(section("algorithm"), config.problem);
  config.ensemble = parse_ensemble(section("ensemble"));
  config.output = parse_output(section("output"));
  config.checks = parse_checks(section("checks"));
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace fvpopt
