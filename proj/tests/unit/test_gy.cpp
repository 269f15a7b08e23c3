#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gylab/errors.hpp"
#include "gylab/gy.hpp"
#include "oracle.hpp"

using namespace gylab;

namespace {

ProblemSpec free_n3() { return oracle::scalar_spec(free_particle(1.0), 2.0, 1.0, 2.0, 0.0, 0.0); }

}  // namespace

TEST(CrossHessian, FreeParticleExact) {
  // det A~_3 = -3 and the boundary couplings are 1, so d2S/db1db2 = -1/3.
  const auto fp = free_n3();
  const Lattice lat(3, 2.0);
  const Matrix fd = action_cross_hessian_fd(fp, lat);
  const Matrix ch = action_cross_hessian_chain(fp, lat, solve_critical_path(fp, lat).path);
  EXPECT_NEAR(fd(0, 0), -1.0 / 3.0, 1e-8);
  EXPECT_NEAR(ch(0, 0), -1.0 / 3.0, 1e-14);
}

TEST(CrossHessian, HarmonicContinuumValue) {
  const auto ho = oracle::harmonic_instance(1.0, 0.5);
  const Lattice lat(401, ho.horizon);
  const Matrix fd = action_cross_hessian_fd(ho, lat);
  EXPECT_NEAR(fd(0, 0), -1.0, 10 * lat.epsilon());
  EXPECT_NEAR(critical_action(ho, lat), -0.5, 10 * lat.epsilon());
}

TEST(CrossHessian, ZeroCouplingGivesZero) {
  const ProblemSpec spec{harmonic(1.0, 1.0), quadratic_generator(0.5, 0.0),
                         quadratic_generator(-0.5, 0.0), 1.0, 1.0, Vector::Constant(1, 0.3),
                         Vector::Constant(1, 0.2)};
  const Lattice lat(21, 1.0);
  EXPECT_LT(action_cross_hessian_fd(spec, lat).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(action_cross_hessian_chain(spec, lat, solve_critical_path(spec, lat).path)(0, 0), 0.0);
}

TEST(CrossHessian, ChainMatchesFiniteDifference) {
  for (Index n = 1; n <= 3; ++n) {
    const auto spec = random_quadratic_problem(500 + n, n, 1.2, 1.0);
    const Lattice lat(15, 1.0);
    const Matrix fd = action_cross_hessian_fd(spec, lat);
    const Matrix ch = action_cross_hessian_chain(spec, lat, solve_critical_path(spec, lat).path);
    EXPECT_LT((fd - ch).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, ch.cwiseAbs().maxCoeff()));
  }
  const ProblemSpec cs{coupled(1.0, 1.0, 0.3, 0.2, 2), quadratic_generator(0.5, 1.0, 2),
                       quadratic_generator(-0.3, 1.0, 2), 1.0, 1.0, Vector::Constant(2, 0.2),
                       Vector::Constant(2, -0.1)};
  const Lattice lat(9, 1.0);
  const Matrix fd = action_cross_hessian_fd(cs, lat);
  const Matrix ch = action_cross_hessian_chain(cs, lat, solve_critical_path(cs, lat).path);
  EXPECT_LT((fd - ch).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(CrossHessian, DecoupledPairIsBlockDiagonal) {
  const auto one = oracle::scalar_spec(harmonic(1.0, 1.0), 0.5, -0.5, 1.0, 0.3, 0.2);
  const ProblemSpec two{harmonic(1.0, Vector::Ones(2)), quadratic_generator(0.5, 1.0, 2),
                        quadratic_generator(-0.5, 1.0, 2), 1.0, 1.0, Vector::Constant(2, 0.3),
                        Vector::Constant(2, 0.2)};
  const Lattice lat(11, 1.0);
  const double single =
      action_cross_hessian_chain(one, lat, solve_critical_path(one, lat).path)(0, 0);
  const Matrix pair = action_cross_hessian_chain(two, lat, solve_critical_path(two, lat).path);
  EXPECT_NEAR(pair(0, 0), single, 1e-13);
  EXPECT_NEAR(pair(1, 1), single, 1e-13);
  EXPECT_NEAR(pair(0, 1), 0.0, 1e-14);
  EXPECT_NEAR(pair(1, 0), 0.0, 1e-14);
}

TEST(VerifyGY, FreeParticleExactInstance) {
  const auto fp = free_n3();
  const Lattice lat(3, 2.0);
  const auto chain = verify_gy_discrete(fp, lat);
  EXPECT_LT(chain.relative_gap, 1e-8);
  EXPECT_NEAR(chain.rhs, -1.0 / 3.0, 1e-14);
  EXPECT_LT(verify_gy_discrete(fp, lat, CrossMethod::finite_difference).relative_gap, 1e-8);
  EXPECT_LT(verify_gy_an(fp, lat).relative_gap, 1e-8);
}

TEST(VerifyGY, HarmonicOddN) {
  const auto ho = oracle::harmonic_instance(1.0, 0.5);
  const Lattice lat(101, ho.horizon);
  const auto r = verify_gy_discrete(ho, lat);
  EXPECT_LT(r.relative_gap, 1e-6);
  EXPECT_TRUE(r.odd);
  EXPECT_LT(verify_gy_discrete(ho, lat, CrossMethod::finite_difference).relative_gap, 1e-6);
  EXPECT_LT(verify_gy_an(ho, lat).relative_gap, 1e-6);
  ASSERT_TRUE(r.literal_gap.has_value());
  EXPECT_LT(*r.literal_gap, 1e-6);
}

TEST(VerifyGY, EvenNNeedsParityFactor) {
  const auto spec = random_quadratic_problem(600, 1);
  const Lattice lat(10, 1.0);
  const auto r = verify_gy_discrete(spec, lat);
  EXPECT_LT(r.relative_gap, 1e-8);
  EXPECT_FALSE(r.odd);
  EXPECT_EQ(r.parity_factor, -1.0);
  ASSERT_TRUE(r.rhs_literal.has_value());
  EXPECT_NEAR(*r.rhs_literal, -r.rhs, 1e-12 * std::fabs(r.rhs));

  const auto s2 = random_quadratic_problem(601, 2);
  EXPECT_EQ(verify_gy_discrete(s2, lat).parity_factor, 1.0);
  EXPECT_LT(verify_gy_an(s2, lat).relative_gap, 1e-8);
}

TEST(VerifyGY, NeumannZeroModeIsConjugatePoint) {
  const auto spec = oracle::scalar_spec(free_particle(1.0), 0.0, 0.0, 1.0, 0.0, 0.0);
  EXPECT_THROW(verify_gy_an(spec, Lattice(11, 1.0)), ConjugatePointError);
}

TEST(VerifyGY, NonSeparableScope) {
  const ProblemSpec cs{coupled(1.0, 1.0, 0.3, 0.2), quadratic_generator(0.5),
                       quadratic_generator(-0.3), 1.0, 1.0, Vector::Constant(1, 0.2),
                       Vector::Constant(1, -0.1)};
  const Lattice lat(9, 1.0);
  EXPECT_THROW(verify_gy_an(cs, lat), ScopeError);
  const auto r = verify_gy_discrete(cs, lat);
  EXPECT_LT(r.relative_gap, 1e-8);
  EXPECT_FALSE(r.rhs_literal.has_value());
}

TEST(VerifyGY, DegenerateCouplingReported) {
  const ProblemSpec spec{harmonic(1.0, 1.0), quadratic_generator(0.5, 0.0),
                         quadratic_generator(-0.5, 1.0), 1.0, 1.0, Vector::Constant(1, 0.3),
                         Vector::Constant(1, 0.2)};
  const auto r = verify_gy_discrete(spec, Lattice(9, 1.0));
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.relative_gap, 0.0);
}

TEST(BoundaryDerivative, MatchesGenerator) {
  const auto spec = random_quadratic_problem(700, 2);
  EXPECT_LT(b1_derivative_gap(spec, Lattice(21, 1.0)), 1e-7);
  const auto an = oracle::scalar_spec(anharmonic(1.0, 1.0, 0.1), 1.0, -1.0, 1.0, 0.2, 0.1);
  EXPECT_LT(b1_derivative_gap(an, Lattice(21, 1.0)), 1e-7);
}
