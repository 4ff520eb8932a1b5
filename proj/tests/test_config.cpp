#include <gtest/gtest.h>

#include <string>

#include "fvpopt/config.hpp"
#include "fvpopt/errors.hpp"
#include "support.hpp"

namespace fvpopt {
namespace {

using testing::vec;

// Q = diag(1, 4): rho = 1, K = 4, admissible beta in (0, 0.125).
const std::string kProblem = R"(
[problem]
family = random_projection_qp
dim = 2
halfspace_normals = [[1, 0]]
halfspace_offsets = [0]
q_diagonal = [1, 4]
c = [1, 1]
)";

ExperimentConfig parse_with_algorithm(const std::string& algorithm) {
  return parse_config(kProblem + "[algorithm]\n" + algorithm + "\n");
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

TEST(ParseConfig, MinimalConfigUsesDefaults) {
  const ExperimentConfig c = parse_config(kProblem);
  EXPECT_EQ(c.problem.family, "random_projection_qp");
  EXPECT_EQ(c.problem.rho, 1.0);
  EXPECT_EQ(c.problem.lipschitz_k, 4.0);
  EXPECT_FALSE(c.algorithm.beta.has_value());
  EXPECT_EQ(c.algorithm.eta, 0.5);
  EXPECT_EQ(c.algorithm.max_iters, 1000u);
  EXPECT_EQ(c.ensemble.realizations, 100u);
  EXPECT_TRUE(c.checks.suites.empty());

  const auto& p = std::get<RandomProjectionQpParams>(c.problem.params);
  ASSERT_EQ(p.halfspaces.size(), 1u);
  EXPECT_EQ(p.halfspaces[0].a, vec({1, 0}));
  EXPECT_EQ(p.q(1, 1), 4.0);

  const ObjectiveSpec f = make_quadratic(p.q, p.c);
  EXPECT_EQ(effective_beta(c.algorithm, f), 1.0 / 16.0);
}

TEST(ParseConfig, BetaInsideIntervalIsKept) {
  EXPECT_EQ(*parse_with_algorithm("beta = 0.1").algorithm.beta, 0.1);
}

TEST(ParseConfig, BetaAtUpperEndpointIsRejectedWithInterval) {
  try {
    parse_with_algorithm("beta = 0.125");
    FAIL() << "expected AdmissibilityError";
  } catch (const AdmissibilityError& e) {
    const std::string what = e.what();
    EXPECT_TRUE(contains(what, "beta")) << what;
    EXPECT_TRUE(contains(what, "(0, 0.125)")) << what;
  }
}

TEST(ParseConfig, NonPositiveBetaIsRejected) {
  EXPECT_THROW(parse_with_algorithm("beta = 0"), AdmissibilityError);
  EXPECT_THROW(parse_with_algorithm("beta = -0.01"), AdmissibilityError);
}

TEST(ParseConfig, EtaMustBeInsideOpenUnitInterval) {
  EXPECT_TRUE(contains(error_of(kProblem + "[algorithm]\neta = 0\n"), "eta"));
  EXPECT_TRUE(contains(error_of(kProblem + "[algorithm]\neta = 1\n"), "eta"));
  EXPECT_EQ(parse_with_algorithm("eta = 0.9").algorithm.eta, 0.9);
}

TEST(ParseConfig, ZetaRange) {
  EXPECT_EQ(parse_with_algorithm("zeta = 1").algorithm.schedule.zeta(), 1.0);
  EXPECT_EQ(parse_with_algorithm("zeta = 0.6").algorithm.schedule.zeta(), 0.6);
  EXPECT_TRUE(contains(error_of(kProblem + "[algorithm]\nzeta = 0\n"), "zeta"));
  EXPECT_TRUE(contains(error_of(kProblem + "[algorithm]\nzeta = 1.5\n"), "zeta"));
}

TEST(ParseConfig, UnknownKeyIsNamed) {
  const std::string what = error_of(kProblem + "[algorithm]\nbetta = 0.1\n");
  EXPECT_TRUE(contains(what, "[algorithm] betta: unknown key")) << what;
}

TEST(ParseConfig, MissingKeyIsNamed) {
  const std::string what = error_of("[problem]\nfamily = random_projection_qp\n");
  EXPECT_TRUE(contains(what, "dim")) << what;
  EXPECT_TRUE(contains(error_of("[algorithm]\neta = 0.5\n"), "problem"));
}

TEST(ParseConfig, UnknownSectionAndFamilyAreRejected) {
  EXPECT_TRUE(contains(error_of(kProblem + "[extras]\nx = 1\n"), "extras"));
  EXPECT_TRUE(contains(error_of("[problem]\nfamily = lasso\n"), "lasso"));
}

TEST(ParseConfig, UnknownSuiteIsRejected) {
  EXPECT_TRUE(contains(error_of(kProblem + "[checks]\nsuites = [gradient, bogus]\n"), "bogus"));
  const ExperimentConfig c = parse_config(kProblem + "[checks]\nsuites = [gradient, constants]\n");
  EXPECT_EQ(c.checks.suites, (std::vector<std::string>{"gradient", "constants"}));
}

TEST(ParseConfig, ConsensusFamily) {
  const ExperimentConfig c = parse_config(R"(
[problem]
family = consensus
agents = 3
local_dim = 1
targets = [[0], [1], [5]]
topology = path
activation = bernoulli
activation_probability = 0.3
mixing = 0.5
)");
  const auto& p = std::get<ConsensusParams>(c.problem.params);
  EXPECT_EQ(p.agents, 3u);
  EXPECT_EQ(p.edges.size(), 2u);
  EXPECT_EQ(p.activation, Activation::bernoulli);
  EXPECT_EQ(p.activation_probability, 0.3);
  EXPECT_EQ(p.mixing, 0.5);
  EXPECT_EQ(c.problem.rho, 1.0);
  EXPECT_EQ(c.problem.lipschitz_k, 1.0);
}

TEST(ParseConfig, SublevelFamilyAndFault) {
  const ExperimentConfig c = parse_config(R"(
[problem]
family = sublevel
dim = 2
constraint = norm
level = 1
q_diagonal = [1, 2]
c = [3, 0]
inject_fault = expanding_operator
)");
  const auto& p = std::get<SublevelParams>(c.problem.params);
  EXPECT_EQ(p.constraint, "norm");
  EXPECT_EQ(p.level, 1.0);
  EXPECT_EQ(c.problem.fault, FaultInjection::expanding_operator);
  EXPECT_EQ(c.problem.lipschitz_k, 2.0);
}

TEST(ParseConfig, ShippedExamplesParse) {
  for (const char* name : {"random_projection_qp.ini", "consensus.ini", "sublevel.ini"}) {
    EXPECT_NO_THROW(load_config(std::string(FVPOPT_CONFIG_DIR) + "/" + name)) << name;
  }
  EXPECT_THROW(load_config("/nonexistent/config.ini"), ConfigError);
}

}  // namespace
}  // namespace fvpopt
