#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fvpopt/errors.hpp"
#include "fvpopt/operators.hpp"
#include "fvpopt/verification.hpp"
#include "support.hpp"

namespace fvpopt {
namespace {

using testing::vec;

constexpr std::size_t kSamples = 10000;

RandomOperator identity_op() {
  return make_deterministic_operator(identity_piece(), {vec({0, 0}), vec({1, -2})});
}

RandomOperator ball_op() {
  return make_deterministic_operator(make_ball_projector(vec({0, 0}), 1.0),
                                     {vec({0, 0}), vec({0.6, 0.8})});
}

/// T_hat + 0.5 e_1: an averaging map that moves every point, so it disagrees
/// with its base on which points are fixed.
RandomOperator biased_average(const RandomOperator& base, double eta) {
  const AveragedOperator avg = average_relaxed(base, eta);
  return RandomOperator(
      "biased_average", base.dim(), base.space(),
      [avg](const OmegaStar& w, const Vector& x) -> Vector {
        Vector y = avg.apply(w, x);
        y[0] += 0.5;
        return y;
      },
      base.witnesses());
}

TEST(QuasiNonexpansive, IdentityHasNoViolation) {
  Rng rng(1);
  const PropertyReport r = check_quasi_nonexpansive(identity_op(), kSamples, rng);
  EXPECT_LE(r.worst_violation, 0.0);
  EXPECT_EQ(r.samples, kSamples);
}

TEST(QuasiNonexpansive, BallProjectorPasses) {
  Rng rng(2);
  EXPECT_TRUE(check_quasi_nonexpansive(ball_op(), kSamples, rng).passed());
}

TEST(QuasiNonexpansive, ExpandingOperatorFails) {
  Rng rng(3);
  const PropertyReport r = check_quasi_nonexpansive(make_scaling_operator(2, 2.0), kSamples, rng);
  EXPECT_FALSE(r.passed());
  EXPECT_GE(r.worst_violation, 0.1);
  EXPECT_FALSE(r.witness_input.empty());
}

TEST(QuasiNonexpansive, RequiresAWitness) {
  const RandomOperator none("none", 2, SampleSpace::finite({"a"}, {1.0}),
                            [](const OmegaStar&, const Vector& x) { return x; }, {});
  Rng rng(4);
  EXPECT_THROW(check_quasi_nonexpansive(none, 10, rng), UsageError);
}

TEST(AveragedDescent, HalfspaceHandExample) {
  // a = (1,0), b = 0, x = (2,3), z = (-1,0), eta = 0.5: T x = (0,3), T_hat x = (1,3).
  const OperatorPiece p = make_halfspace_projector(vec({1, 0}), 0.0);
  const Vector x = vec({2, 3});
  const Vector z = vec({-1, 0});
  const double eta = 0.5;
  const Vector tx = p(x);
  const Vector that_x = (1 - eta) * x + eta * tx;
  EXPECT_EQ(that_x, vec({1, 3}));
  EXPECT_EQ(inner(x - that_x, x - z), 3.0);
  EXPECT_EQ(0.5 * eta * (x - tx).squaredNorm(), 1.0);

  const RandomOperator op = make_deterministic_operator(p, {z});
  Rng rng(5);
  EXPECT_TRUE(check_averaged_descent(op, eta, kSamples, rng).passed());
}

TEST(AveragedDescent, IdentityHasBothSidesZero) {
  Rng rng(6);
  const PropertyReport r = check_averaged_descent(identity_op(), 0.5, kSamples, rng);
  EXPECT_EQ(r.worst_violation, 0.0);
}

TEST(AveragedDescent, SubgradientProjectorPasses) {
  const RandomOperator op =
      make_deterministic_operator(make_subgradient_projector(norm_function(), 1.0, 2),
                                  {vec({0, 0})});
  Rng rng(7);
  EXPECT_TRUE(check_averaged_descent(op, 0.9, kSamples, rng).passed());
}

TEST(AveragedDescent, ExpandingOperatorFails) {
  Rng rng(8);
  const PropertyReport r = check_averaged_descent(make_scaling_operator(2, 2.0), 0.5, kSamples, rng);
  EXPECT_GE(r.worst_violation, 0.1);
}

TEST(AveragedDescent, RejectsEtaOutsideRange) {
  Rng rng(9);
  EXPECT_THROW(check_averaged_descent(identity_op(), 0.0, 10, rng), UsageError);
  EXPECT_THROW(check_averaged_descent(identity_op(), 1.5, 10, rng), UsageError);
  EXPECT_NO_THROW(check_averaged_descent(identity_op(), 1.0, 10, rng));
}

TEST(AveragedQuasiNonexpansive, Examples) {
  Rng rng(10);
  EXPECT_LE(check_averaged_quasi_nonexpansive(identity_op(), 0.5, kSamples, rng).worst_violation,
            0.0);
  EXPECT_TRUE(check_averaged_quasi_nonexpansive(ball_op(), 0.5, kSamples, rng).passed());
  EXPECT_GE(
      check_averaged_quasi_nonexpansive(make_scaling_operator(2, 2.0), 0.5, kSamples, rng)
          .worst_violation,
      0.1);
}

TEST(FixedSetAgreement, WitnessesAreFixedByBoth) {
  Rng rng(11);
  const RandomOperator op = ball_op();
  const PropertyReport r = check_fixed_set_agreement(op, 0.5, op.witnesses(), rng);
  EXPECT_EQ(r.worst_violation, 0.0);
}

TEST(FixedSetAgreement, OutsidePointIsMovedByBoth) {
  const RandomOperator op = ball_op();
  const AveragedOperator avg = average(op, 0.5);
  const OmegaStar w{0, {}};
  EXPECT_EQ(op.apply(w, vec({2, 0})), vec({1, 0}));
  EXPECT_EQ(avg.apply(w, vec({2, 0})), vec({1.5, 0}));
  Rng rng(12);
  EXPECT_EQ(check_fixed_set_agreement(op, 0.5, {vec({2, 0})}, rng).worst_violation, 0.0);
}

TEST(FixedSetAgreement, IdentityFixesEveryCandidate) {
  Rng rng(13);
  std::vector<Vector> candidates;
  for (int k = 0; k < 50; ++k) candidates.push_back(gaussian_vector(2, 3.0, rng));
  EXPECT_EQ(check_fixed_set_agreement(identity_op(), 0.7, candidates, rng).worst_violation, 0.0);
}

TEST(FixedSetAgreement, BiasedAveragingFails) {
  const RandomOperator op = ball_op();
  Rng rng(14);
  const PropertyReport r =
      check_fixed_set_agreement(op, biased_average(op, 0.5), op.witnesses(), rng);
  EXPECT_GE(r.worst_violation, 0.1);
  EXPECT_THROW(check_fixed_set_agreement(op, 0.5, {}, rng), UsageError);
}

TEST(AsImpliesMs, DeterministicHarmonicErrors) {
  std::vector<double> e;
  for (int n = 0; n < 100; ++n) e.push_back(1.0 / (n + 1));
  const std::vector<std::vector<double>> runs(10, e);
  const MsConsistencyReport r = check_as_implies_ms(runs, 10.0);
  EXPECT_EQ(r.verdict, MsVerdict::pass);
  for (std::size_t n = 0; n < e.size(); ++n) {
    EXPECT_NEAR(r.mse[n], 1.0 / ((n + 1.0) * (n + 1.0)), 1e-15);
  }
}

TEST(AsImpliesMs, AllZeroPasses) {
  const std::vector<std::vector<double>> runs(5, std::vector<double>(20, 0.0));
  EXPECT_EQ(check_as_implies_ms(runs, 1.0).verdict, MsVerdict::pass);
}

TEST(AsImpliesMs, DivergentRealizationIsRejected) {
  std::vector<std::vector<double>> runs(20, std::vector<double>{1.0, 0.5, 0.1});
  runs[7] = {1.0, 1e6, std::nan("")};
  EXPECT_EQ(check_as_implies_ms(runs, 100.0).verdict, MsVerdict::rejected_input);
  EXPECT_THROW(check_as_implies_ms({}, 1.0), UsageError);
}

TEST(AsImpliesMs, NonDecreasingErrorsFail) {
  const std::vector<std::vector<double>> runs(3, std::vector<double>{0.1, 0.2, 0.3});
  EXPECT_EQ(check_as_implies_ms(runs, 1.0).verdict, MsVerdict::fail);
}

}  // namespace
}  // namespace fvpopt
