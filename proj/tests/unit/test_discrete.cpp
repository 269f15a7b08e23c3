#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gylab/discrete.hpp"
#include "gylab/errors.hpp"
#include "oracle.hpp"

using namespace gylab;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

DiscretePath scalar_path(std::vector<double> p, std::vector<double> q) {
  DiscretePath path;
  for (double x : p) path.p.push_back(v1(x));
  for (double x : q) path.q.push_back(v1(x));
  return path;
}

std::vector<ProblemSpec> test_systems() {
  std::vector<ProblemSpec> out;
  out.push_back(oracle::scalar_spec(free_particle(1.0), 2.0, 1.0, 2.0, 0.3, -0.2));
  out.push_back(oracle::harmonic_instance(1.0, 0.5));
  out.push_back(oracle::scalar_spec(anharmonic(1.0, 1.0, 0.1), 1.0, -1.0, 1.0, 0.2, 0.1));
  out.push_back(ProblemSpec{coupled(1.0, 1.0, 0.2, 0.1, 2), quadratic_generator(0.5, 1.0, 2),
                            quadratic_generator(-0.3, 1.0, 2), 1.0, 1.0, Vector::Constant(2, 0.2),
                            Vector::Constant(2, -0.1)});
  for (Index n = 1; n <= 3; ++n) out.push_back(random_quadratic_problem(40 + n, n, 1.3, 1.0));
  return out;
}

}  // namespace

TEST(Lattice, Spacing) {
  Lattice lat(5, 2.0);
  EXPECT_DOUBLE_EQ(lat.epsilon(), 0.5);
  EXPECT_DOUBLE_EQ(lat.time(4), 2.0);
  EXPECT_EQ(lat.momenta(), 4);
  EXPECT_DOUBLE_EQ(Lattice::unit(7).epsilon(), 1.0);
  EXPECT_THROW(Lattice(1, 1.0), ParameterError);
  EXPECT_THROW(Lattice(5, -1.0), ParameterError);
}

TEST(DiscretePath, FlattenRoundTrip) {
  const auto path = oracle::random_path(6, 2, 3);
  const Vector x = path.flatten();
  ASSERT_EQ(x.size(), (2 * 6 - 1) * 2);
  EXPECT_EQ(x.head(2), path.p[0]);
  EXPECT_EQ(x.segment(5 * 2, 2), path.q[0]);
  const auto back = DiscretePath::unflatten(x, 6, 2);
  for (Index i = 0; i < 5; ++i) EXPECT_EQ(back.p[i], path.p[i]);
  for (Index i = 0; i < 6; ++i) EXPECT_EQ(back.q[i], path.q[i]);
}

TEST(DiscreteAction, HandEvaluatedExamples) {
  const auto fp = oracle::scalar_spec(free_particle(1.0), 0.0, 0.0, 2.0, 0.0, 0.0);
  const Lattice lat(3, 2.0);
  EXPECT_DOUBLE_EQ(discrete_action(fp, lat, scalar_path({0, 0}, {0, 0, 0})), 0.0);
  EXPECT_DOUBLE_EQ(discrete_action(fp, lat, scalar_path({1, 1}, {0, 1, 2})), 1.0);
  const auto ho = oracle::scalar_spec(harmonic(1.0, 1.0), 0.0, 0.0, 2.0, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(discrete_action(ho, lat, scalar_path({1, 0}, {0, 1, 1})), 0.0);
}

TEST(DiscreteAction, ShapeMismatchThrows) {
  const auto fp = oracle::free_instance();
  EXPECT_THROW(discrete_action(fp, Lattice(4, 1.0), scalar_path({0, 0}, {0, 0, 0})), ShapeError);
}

TEST(Residual, ConstantMomentumSolvesFreeFlow) {
  const double c = 0.7, eps = 0.25;
  const auto fp = oracle::scalar_spec(free_particle(1.0), 0.0, 0.0, 1.0, c, c);
  const Lattice lat(5, 1.0);
  DiscretePath path;
  for (int i = 0; i < 4; ++i) path.p.push_back(v1(c));
  for (int i = 0; i < 5; ++i) path.q.push_back(v1(0.3 + i * eps * c));
  EXPECT_LT(residual(fp, lat, path).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Residual, MatchesFiniteDifferenceGradient) {
  std::uint64_t seed = 1;
  for (const auto& spec : test_systems()) {
    for (Index points : {3, 4, 9}) {
      const Lattice lat(points, spec.horizon);
      const auto path = oracle::random_path(points, spec.dimension(), seed++);
      const Vector fd = oracle::fd_gradient(oracle::action_of(spec, lat), path.flatten(), 1e-5);
      const Vector res = residual(spec, lat, path);
      const Vector expected = gradient_to_residual(fd, points, spec.dimension());
      EXPECT_LT((res - expected).cwiseAbs().maxCoeff(), 1e-6) << spec.hamiltonian.name();
      EXPECT_LT((action_gradient(spec, lat, path) - fd).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(Newton, FreeParticleExactLinearPath) {
  const auto fp = oracle::scalar_spec(free_particle(1.0), 1.0, 0.0, 1.0, 1.0, 1.0);
  const Lattice lat(11, 1.0);
  const auto cp = solve_critical_path(fp, lat);
  EXPECT_LE(cp.iterations, 2);
  for (Index i = 0; i < 10; ++i) EXPECT_NEAR(cp.path.p[i][0], 1.0, 1e-13);
  for (Index i = 0; i < 11; ++i) EXPECT_NEAR(cp.path.q[i][0], lat.time(i), 1e-13);
}

TEST(Newton, HarmonicResidualAndContinuumLimit) {
  const auto ho = oracle::harmonic_instance(1.0, 0.0);
  std::vector<double> eps, err;
  for (Index n : {51, 101, 201, 401}) {
    const Lattice lat(n, ho.horizon);
    const auto cp = solve_critical_path(ho, lat);
    EXPECT_LE(cp.residual_norm, 1e-10);
    EXPECT_LE(residual(ho, lat, cp.path).cwiseAbs().maxCoeff(), 1e-10);
    double e = 0.0;
    for (Index i = 0; i < n; ++i) e = std::max(e, std::fabs(cp.path.q[i][0] - std::sin(lat.time(i))));
    eps.push_back(lat.epsilon());
    err.push_back(e);
    if (n == 101) EXPECT_LT(std::fabs(cp.path.q[0][0]), 2 * lat.epsilon());
  }
  EXPECT_GT(oracle::loglog_slope(eps, err), 0.9);
}

TEST(Newton, QuarticSmallAmplitude) {
  Potential quartic{[](const Vector& q) { return std::pow(q[0], 4); },
                    [](const Vector& q) { return v1(4 * std::pow(q[0], 3)); },
                    [](const Vector& q) { return Matrix::Constant(1, 1, 12 * q[0] * q[0]); }};
  const auto spec = oracle::scalar_spec(separable_model(1.0, 1, quartic), 1.0, -0.5, 1.0, 0.1, 0.05);
  const auto cp = solve_critical_path(spec, Lattice(41, 1.0), std::nullopt, {1e-12, 15, 30});
  EXPECT_LE(cp.residual_norm, 1e-12);
  EXPECT_LE(cp.iterations, 15);
}

TEST(Newton, ErrorsAreTyped) {
  // Neumann free particle: singular Jacobian, and no solution when b1 != b2.
  const auto neumann = oracle::scalar_spec(free_particle(1.0), 0.0, 0.0, 1.0, 0.5, 0.3);
  EXPECT_THROW(solve_critical_path(neumann, Lattice(9, 1.0)), ConjugatePointError);

  // H_pp = 0 violates admissibility.
  HamiltonianModel::Functions f;
  f.energy = [](const Vector& p, const Vector& q) { return p[0] * q[0]; };
  f.grad_p = [](const Vector&, const Vector& q) { return q; };
  f.grad_q = [](const Vector& p, const Vector&) { return p; };
  f.hess_pp = [](const Vector&, const Vector&) { return Matrix::Zero(1, 1); };
  f.hess_pq = [](const Vector&, const Vector&) { return Matrix::Identity(1, 1); };
  f.hess_qq = [](const Vector&, const Vector&) { return Matrix::Zero(1, 1); };
  const ProblemSpec bad{HamiltonianModel(1, f), quadratic_generator(1.0), quadratic_generator(0.0),
                        1.0, 1.0, v1(0.1), v1(0.0)};
  EXPECT_THROW(solve_critical_path(bad, Lattice(5, 1.0)), AdmissibilityError);

  const auto hard = oracle::scalar_spec(anharmonic(1.0, 1.0, 1.0), 1.0, -1.0, 1.0, 3.0, 2.0);
  EXPECT_THROW(solve_critical_path(hard, Lattice(21, 1.0), std::nullopt, {1e-14, 1, 30}),
               ConvergenceError);
}
