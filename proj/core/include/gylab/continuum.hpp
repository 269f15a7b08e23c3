#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gylab/discrete.hpp"
#include "gylab/gy.hpp"
#include "gylab/linalg.hpp"
#include "gylab/model.hpp"

namespace gylab {

// Fixed-step RK4 trajectory on a uniform grid of `steps` intervals over
// [0, T]. Both the state and its time derivative are stored at every node,
// which gives cubic Hermite dense output.
struct OdeSolution {
  std::vector<double> t;
  std::vector<Vector> state;
  std::vector<Vector> rate;
  double step = 0.0;
  static constexpr int interpolation_order = 3;

  std::size_t size() const { return t.size(); }
  double horizon() const { return t.back(); }
  Vector at(double time) const;
};

// Classical path: state = (q, p) stacked, 2n entries.
struct ClassicalPath {
  OdeSolution ode;
  Index dimension = 0;
  double residual_norm = 0.0;
  int iterations = 0;

  Vector q(std::size_t node) const { return ode.state[node].head(dimension); }
  Vector p(std::size_t node) const { return ode.state[node].tail(dimension); }
  Vector q_at(double time) const { return ode.at(time).head(dimension); }
};

struct ShootOptions {
  int steps = 4096;  // h_ode = T / steps
  double tol = 1e-11;
  int max_iter = 50;
  std::optional<Vector> initial_q;
  // Return a converged member of a degenerate family instead of throwing.
  bool accept_family = false;
};

/// Newton on q(0) for p(T) = df2/dq(q(T), b2), with p(0) = df1/dq(q(0), b1)
/// and the variational equations providing the Jacobian.
/// DegenerateFamilyError if the shooting Jacobian is singular (unless
/// accept_family is set and the residual has converged),
/// ConvergenceError if Newton stalls.
ClassicalPath shoot_classical_path(const ProblemSpec& spec, const ShootOptions& opts = {});

/// Forward Hamilton flow from q(0) with p(0) = df1/dq(q(0), b1).
OdeSolution hamilton_flow(const ProblemSpec& spec, const Vector& q0, int steps);

/// Continuum action int (p qdot - H) dt + f1(q(0), b1) - f2(q(T), b2) by
/// composite Simpson on the RK4 grid (steps must be even).
double continuum_action(const ProblemSpec& spec, const ClassicalPath& path);

struct ZetaResult {
  double lambda = 0.0;
  double value = 0.0;    // det_zeta(L - lambda I) = 2 (y1dot(T) - (a2/m) y1(T))
  double y1_T = 0.0;     // divided by exp(log_scale)
  double y1dot_T = 0.0;  // divided by exp(log_scale)
  double omega = 0.0;    // (a2/m) y1(T) - y1dot(T), same scaling
  double log_scale = 0.0;
  SignedLog log_value;  // value including the scale
  double kappa1 = 0.0;  // a1 / m
  double kappa2 = 0.0;  // a2 / m
};

/// Second-variation potential u(t) = -V''(q_c(t)) / m (scalar problems).
double jacobi_potential(const ProblemSpec& spec, const ClassicalPath& path, double time);

/// Integrates y'' = (u(t) - lambda) y, y(0) = 1, y'(0) = a1/m with RK4 on
/// `steps` intervals (0 = path grid). The state is renormalized when it
/// leaves [1e-100, 1e100]; the scale is carried in log_scale.
ZetaResult jacobi_field(const ProblemSpec& spec, const ClassicalPath& path, double lambda,
                        int steps = 0);

/// Samples of (y, ydot) of the Jacobi IVP at every node of the path grid.
std::vector<std::pair<double, double>> jacobi_trajectory(const ProblemSpec& spec,
                                                         const ClassicalPath& path, double lambda);

/// dq_c(t)/dq(0) and its rate by central differences of two forward flows.
std::vector<std::pair<double, double>> flow_sensitivity(const ProblemSpec& spec,
                                                        const ClassicalPath& path, double h);

ZetaResult zeta_det(const ProblemSpec& spec, double lambda, const ShootOptions& opts = {});
ZetaResult zeta_det(const ProblemSpec& spec, const ClassicalPath& path, double lambda);

/// 2 (dqdot_c(T)/dq - (a2/m) dq_c(T)/dq) from finite-difference flow sensitivities.
double zeta_det_from_sensitivity(const ProblemSpec& spec, const ClassicalPath& path, double h);

struct SpectralReport {
  std::vector<double> roots;             // zeros of omega(lambda)
  std::vector<double> fd_eigenvalues;    // FD operator on fd_intervals
  std::vector<double> fd_eigenvalues_2;  // FD operator on 2 * fd_intervals
  std::vector<double> fd_tolerance;      // allowed |root - fd| per root
  std::vector<double> observed_order;    // log2 of the error ratio; NaN if exact
  std::vector<double> weyl_ratio;        // root / (pi^2 n^2 / T^2), n >= 1
  int fd_intervals = 0;
  double scan_lo = 0.0;
  double scan_hi = 0.0;

  bool fd_agrees() const;
};

struct SpectralOptions {
  int fd_intervals = 2000;
  double bisection_tol = 1e-10;
  int max_scan_steps = 200000;
};

/// The k smallest eigenvalues of L with the mixed boundary conditions as
/// roots of omega, each cross-checked against a symmetric FD discretization.
SpectralReport eigen_crosscheck(const ProblemSpec& spec, int k, const SpectralOptions& sopts = {},
                                const ShootOptions& opts = {});

/// The k smallest eigenvalues of the ghost-point FD discretization of L.
std::vector<double> fd_eigenvalues(const ProblemSpec& spec, const ClassicalPath& path, int k,
                                   int intervals);

struct AsymptoticReport {
  std::vector<double> mu;
  std::vector<double> ratio;      // det_zeta(L + mu I) / (2 sqrt(mu) sinh(T sqrt(mu)))
  std::vector<double> deviation;  // |ratio - 1|
  bool monotone = false;
};

AsymptoticReport asymptotic_check(const ProblemSpec& spec, const std::vector<double>& mu_list,
                                  const ShootOptions& opts = {});

/// Continuum critical action cross-Hessian (scalar problems) by a four-point
/// stencil of shooting solves.
double continuum_cross_hessian_fd(const ProblemSpec& spec, double fd_step = 0.0,
                                  const ShootOptions& opts = {});

/// lhs: continuum FD cross-Hessian; rhs: 2 f1_qb f2_qb / (m det_zeta A).
GYReport verify_gy_zeta(const ProblemSpec& spec, double fd_step = 0.0,
                        const ShootOptions& opts = {});

// Smooth scalar test function with two analytic derivatives.
struct TestFunction {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

TestFunction zero_function();

/// Phase-space pair (x1, x2) with x2 = cos(pi t / T) + shift and
/// x1 = a1 x2(0) (1 - t/T) + a2 x2(T) t/T + sin(pi t / T).
std::pair<TestFunction, TestFunction> phase_test_pair(double a1, double a2, double horizon,
                                                      double shift);

/// x = 1 + k1 t + c t^2 + d t^3 with d chosen so x'(T) = k2 x(T).
TestFunction mixed_bc_polynomial(double k1, double k2, double horizon, double c);

enum class WeakTarget { tilde_a, a };
std::string to_string(WeakTarget t);

struct WeakConvergenceReport {
  WeakTarget target = WeakTarget::tilde_a;
  std::vector<Index> points;
  std::vector<double> epsilon;
  std::vector<double> discrete;
  double continuum = 0.0;
  std::vector<double> gap;
  double slope = 0.0;  // least-squares d log(gap) / d log(eps)
  bool exact = false;  // every gap is zero
  bool passes(double min_slope = 0.9) const { return exact || slope >= min_slope; }
};

/// Y_N^T A~_N X_N against int Y^T A~ X dt for phase-space pairs X = (x1, x2),
/// x1 the momentum component, subject to x1(0) = a1 x2(0), x1(T) = a2 x2(T).
WeakConvergenceReport weak_convergence_tilde_a(const ProblemSpec& spec, const TestFunction& x1,
                                               const TestFunction& x2, const TestFunction& y1,
                                               const TestFunction& y2,
                                               const std::vector<Index>& points,
                                               const ShootOptions& opts = {});

/// y_N^T A_N x_N against int y (-x'' + u x) dt, x'(0) = (a1/m) x(0),
/// x'(T) = (a2/m) x(T).
WeakConvergenceReport weak_convergence_a(const ProblemSpec& spec, const TestFunction& x,
                                         const TestFunction& y, const std::vector<Index>& points,
                                         const ShootOptions& opts = {});

}  // namespace gylab
