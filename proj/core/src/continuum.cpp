#include "gylab/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include <Eigen/Eigenvalues>

#include "gylab/errors.hpp"
#include "gylab/operators.hpp"
#include "gylab/parallel.hpp"

namespace gylab {

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
OdeSolution rk4(F&& f, const Vector& x0, double horizon, int steps) {
  if (steps < 1) throw ParameterError("rk4: steps must be positive");
  OdeSolution sol;
  sol.step = horizon / steps;
  const double h = sol.step;
  sol.t.resize(static_cast<std::size_t>(steps) + 1);
  sol.state.resize(sol.t.size());
  sol.rate.resize(sol.t.size());
  Vector x = x0;
  for (int k = 0; k <= steps; ++k) {
    const double t = k == steps ? horizon : k * h;
    const auto sk = static_cast<std::size_t>(k);
    sol.t[sk] = t;
    sol.state[sk] = x;
    sol.rate[sk] = f(t, x);
    if (k == steps) break;
    const Vector& k1 = sol.rate[sk];
    const Vector k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    const Vector k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    const Vector k4 = f(t + h, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return sol;
}

void require_scalar_separable(const ProblemSpec& spec, const char* op) {
  require_separable(spec, op);
  if (spec.dimension() != 1) {
    throw ScopeError(std::string(op) + " is implemented for one degree of freedom");
  }
}

Vector hamilton_rhs(const HamiltonianModel& H, const Vector& z, Index n) {
  const Vector q = z.head(n);
  const Vector p = z.tail(n);
  Vector out(2 * n);
  out.head(n) = H.grad_p(p, q);
  out.tail(n) = -H.grad_q(p, q);
  return out;
}

// Endpoint state and variational matrix d z(T) / d q(0) (2n x n).
std::pair<Vector, Matrix> flow_with_variation(const ProblemSpec& spec, const Vector& q0, int steps) {
  const Index n = spec.dimension();
  const auto& H = spec.hamiltonian;
  const double h = spec.horizon / steps;
  Vector z(2 * n);
  z << q0, spec.f1.d_q(q0, spec.b1);
  Matrix phi(2 * n, n);
  phi << Matrix::Identity(n, n), spec.f1.d_qq(q0, spec.b1);

  auto rhs = [&](const Vector& x, const Matrix& v, Vector& dx, Matrix& dv) {
    const Vector q = x.head(n);
    const Vector p = x.tail(n);
    dx.resize(2 * n);
    dx << H.grad_p(p, q), -H.grad_q(p, q);
    const Matrix pq = H.hess_pq(p, q);
    const Matrix pp = H.hess_pp(p, q);
    const Matrix qq = H.hess_qq(p, q);
    dv.resize(2 * n, n);
    dv.topRows(n) = pq * v.topRows(n) + pp * v.bottomRows(n);
    dv.bottomRows(n) = -qq * v.topRows(n) - pq.transpose() * v.bottomRows(n);
  };
  Vector k1, k2, k3, k4;
  Matrix v1, v2, v3, v4;
  for (int k = 0; k < steps; ++k) {
    rhs(z, phi, k1, v1);
    rhs(z + 0.5 * h * k1, phi + 0.5 * h * v1, k2, v2);
    rhs(z + 0.5 * h * k2, phi + 0.5 * h * v2, k3, v3);
    rhs(z + h * k3, phi + h * v3, k4, v4);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    phi += (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
  }
  return {z, phi};
}

struct ShootEval {
  Vector residual;
  Matrix jacobian;
};

ShootEval shoot_eval(const ProblemSpec& spec, const Vector& q0, int steps) {
  const Index n = spec.dimension();
  const auto [z, phi] = flow_with_variation(spec, q0, steps);
  const Vector qT = z.head(n);
  ShootEval e;
  e.residual = z.tail(n) - spec.f2.d_q(qT, spec.b2);
  e.jacobian = phi.bottomRows(n) - spec.f2.d_qq(qT, spec.b2) * phi.topRows(n);
  return e;
}

bool jacobian_singular(const Matrix& j) {
  const double scale = std::max(1.0, j.cwiseAbs().maxCoeff());
  return !(min_singular_value(j) > 1e-10 * scale);
}

double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

Vector OdeSolution::at(double time) const {
  if (t.size() < 2) throw ShapeError("OdeSolution::at: fewer than two nodes");
  const double tt = std::clamp(time, t.front(), t.back());
  const auto last = t.size() - 2;
  auto k = static_cast<std::size_t>(std::floor(tt / step));
  k = std::min(k, last);
  const double h = t[k + 1] - t[k];
  const double s = (tt - t[k]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * state[k] + (s3 - 2 * s2 + s) * h * rate[k] +
         (-2 * s3 + 3 * s2) * state[k + 1] + (s3 - s2) * h * rate[k + 1];
}

OdeSolution hamilton_flow(const ProblemSpec& spec, const Vector& q0, int steps) {
  const Index n = spec.dimension();
  Vector z0(2 * n);
  z0 << q0, spec.f1.d_q(q0, spec.b1);
  return rk4([&](double, const Vector& z) { return hamilton_rhs(spec.hamiltonian, z, n); }, z0,
             spec.horizon, steps);
}

ClassicalPath shoot_classical_path(const ProblemSpec& spec, const ShootOptions& opts) {
  spec.validate();
  if (!(opts.tol > 0.0)) throw ParameterError("shoot_classical_path: tol must be positive");
  if (opts.steps < 2) throw ParameterError("shoot_classical_path: need at least two ODE steps");
  const Index n = spec.dimension();
  Vector q0 = opts.initial_q ? *opts.initial_q : Vector::Zero(n);
  if (q0.size() != n) throw ShapeError("shoot_classical_path: initial q has wrong dimension");

  ShootEval e = shoot_eval(spec, q0, opts.steps);
  double norm = max_abs(e.residual);
  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    if (!std::isfinite(norm)) break;
    if (jacobian_singular(e.jacobian) && !(opts.accept_family && norm <= opts.tol)) {
      throw DegenerateFamilyError(
          "shooting Jacobian is singular: the boundary problem has a family of classical paths");
    }
    if (norm <= opts.tol) {
      ClassicalPath out;
      out.dimension = n;
      out.ode = hamilton_flow(spec, q0, opts.steps);
      out.residual_norm = norm;
      out.iterations = iter;
      return out;
    }
    if (iter == opts.max_iter) break;
    const Vector step = -e.jacobian.partialPivLu().solve(e.residual);
    double lambda = 1.0;
    Vector trial = q0 + step;
    ShootEval te = shoot_eval(spec, trial, opts.steps);
    for (int h = 0; h < 30 && !(max_abs(te.residual) < norm); ++h) {
      lambda *= 0.5;
      trial = q0 + lambda * step;
      te = shoot_eval(spec, trial, opts.steps);
    }
    q0 = trial;
    e = std::move(te);
    norm = max_abs(e.residual);
  }
  throw ConvergenceError("shooting Newton did not converge (residual " + std::to_string(norm) + ")",
                         norm);
}

double continuum_action(const ProblemSpec& spec, const ClassicalPath& path) {
  const auto& ode = path.ode;
  const std::size_t intervals = ode.size() - 1;
  if (intervals % 2 != 0) throw ParameterError("continuum_action: Simpson needs an even step count");
  const Index n = path.dimension;
  auto integrand = [&](std::size_t k) {
    const Vector q = path.q(k);
    const Vector p = path.p(k);
    const Vector qdot = ode.rate[k].head(n);
    return p.dot(qdot) - spec.hamiltonian.energy(p, q);
  };
  double sum = integrand(0) + integrand(intervals);
  for (std::size_t k = 1; k < intervals; ++k) sum += (k % 2 == 1 ? 4.0 : 2.0) * integrand(k);
  const double integral = sum * ode.step / 3.0;
  return integral + spec.f1.value(path.q(0), spec.b1) - spec.f2.value(path.q(intervals), spec.b2);
}

double jacobi_potential(const ProblemSpec& spec, const ClassicalPath& path, double time) {
  const Vector q = path.q_at(time);
  return -spec.hamiltonian.hess_qq(Vector::Zero(q.size()), q)(0, 0) / spec.mass;
}

namespace {

// u(t) at every half step of a uniform grid: u[j] = u(j * h / 2).
struct JacobiGrid {
  std::vector<double> u;
  double h = 0.0;
  int steps = 0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
};

JacobiGrid jacobi_grid(const ProblemSpec& spec, const ClassicalPath& path, int steps) {
  require_scalar_separable(spec, "jacobi_field");
  JacobiGrid g;
  g.steps = steps > 0 ? steps : static_cast<int>(path.ode.size() - 1);
  g.h = spec.horizon / g.steps;
  g.u.resize(static_cast<std::size_t>(2 * g.steps + 1));
  for (int j = 0; j <= 2 * g.steps; ++j) {
    const double t = j == 2 * g.steps ? spec.horizon : 0.5 * j * g.h;
    g.u[static_cast<std::size_t>(j)] = jacobi_potential(spec, path, t);
  }
  const std::size_t last = path.ode.size() - 1;
  g.kappa1 = spec.f1.d_qq(path.q(0), spec.b1)(0, 0) / spec.mass;
  g.kappa2 = spec.f2.d_qq(path.q(last), spec.b2)(0, 0) / spec.mass;
  return g;
}

ZetaResult integrate_jacobi(const JacobiGrid& g, double lambda,
                            std::vector<std::pair<double, double>>* trajectory = nullptr) {
  double y = 1.0;
  double v = g.kappa1;
  double log_scale = 0.0;
  const double h = g.h;
  if (trajectory) trajectory->emplace_back(y, v);
  for (int k = 0; k < g.steps; ++k) {
    const double u0 = g.u[static_cast<std::size_t>(2 * k)] - lambda;
    const double um = g.u[static_cast<std::size_t>(2 * k + 1)] - lambda;
    const double u1 = g.u[static_cast<std::size_t>(2 * k + 2)] - lambda;
    const double ky1 = v;
    const double kv1 = u0 * y;
    const double ky2 = v + 0.5 * h * kv1;
    const double kv2 = um * (y + 0.5 * h * ky1);
    const double ky3 = v + 0.5 * h * kv2;
    const double kv3 = um * (y + 0.5 * h * ky2);
    const double ky4 = v + h * kv3;
    const double kv4 = u1 * (y + h * ky3);
    y += (h / 6.0) * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4);
    v += (h / 6.0) * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4);
    if (trajectory) {
      trajectory->emplace_back(y, v);
      continue;
    }
    const double size = std::max(std::abs(y), std::abs(v));
    if (size > 1e100 || (size < 1e-100 && size > 0.0)) {
      y /= size;
      v /= size;
      log_scale += std::log(size);
    }
  }
  ZetaResult r;
  r.lambda = lambda;
  r.y1_T = y;
  r.y1dot_T = v;
  r.kappa1 = g.kappa1;
  r.kappa2 = g.kappa2;
  r.log_scale = log_scale;
  r.omega = g.kappa2 * y - v;
  r.log_value = SignedLog::from(-2.0 * r.omega);
  if (!r.log_value.is_zero()) r.log_value.scale_log(log_scale);
  r.value = r.log_value.value();
  return r;
}

}  // namespace

ZetaResult jacobi_field(const ProblemSpec& spec, const ClassicalPath& path, double lambda,
                        int steps) {
  return integrate_jacobi(jacobi_grid(spec, path, steps), lambda);
}

std::vector<std::pair<double, double>> jacobi_trajectory(const ProblemSpec& spec,
                                                         const ClassicalPath& path, double lambda) {
  std::vector<std::pair<double, double>> out;
  integrate_jacobi(jacobi_grid(spec, path, 0), lambda, &out);
  return out;
}

std::vector<std::pair<double, double>> flow_sensitivity(const ProblemSpec& spec,
                                                        const ClassicalPath& path, double h) {
  require_scalar_separable(spec, "flow_sensitivity");
  if (!(h > 0.0)) throw ParameterError("flow_sensitivity: step must be positive");
  const int steps = static_cast<int>(path.ode.size() - 1);
  const Vector q0 = path.q(0);
  const OdeSolution plus = hamilton_flow(spec, q0 + Vector::Constant(1, h), steps);
  const OdeSolution minus = hamilton_flow(spec, q0 - Vector::Constant(1, h), steps);
  std::vector<std::pair<double, double>> out(plus.size());
  for (std::size_t k = 0; k < plus.size(); ++k) {
    out[k] = {(plus.state[k][0] - minus.state[k][0]) / (2.0 * h),
              (plus.rate[k][0] - minus.rate[k][0]) / (2.0 * h)};
  }
  return out;
}

ZetaResult zeta_det(const ProblemSpec& spec, const ClassicalPath& path, double lambda) {
  return jacobi_field(spec, path, lambda);
}

ZetaResult zeta_det(const ProblemSpec& spec, double lambda, const ShootOptions& opts) {
  require_scalar_separable(spec, "zeta_det");
  return zeta_det(spec, shoot_classical_path(spec, opts), lambda);
}

double zeta_det_from_sensitivity(const ProblemSpec& spec, const ClassicalPath& path, double h) {
  const auto sens = flow_sensitivity(spec, path, h);
  const std::size_t last = path.ode.size() - 1;
  const double kappa2 = spec.f2.d_qq(path.q(last), spec.b2)(0, 0) / spec.mass;
  return 2.0 * (sens.back().second - kappa2 * sens.back().first);
}

std::vector<double> fd_eigenvalues(const ProblemSpec& spec, const ClassicalPath& path, int k,
                                   int intervals) {
  require_scalar_separable(spec, "fd_eigenvalues");
  if (intervals < 4 || k < 1 || k > intervals + 1) {
    throw ParameterError("fd_eigenvalues: need 1 <= k <= intervals + 1 and intervals >= 4");
  }
  const double T = spec.horizon;
  const double h = T / intervals;
  const double ih2 = 1.0 / (h * h);
  const std::size_t last = path.ode.size() - 1;
  const double kappa1 = spec.f1.d_qq(path.q(0), spec.b1)(0, 0) / spec.mass;
  const double kappa2 = spec.f2.d_qq(path.q(last), spec.b2)(0, 0) / spec.mass;

  // Ghost-point Robin rows, symmetrized by scaling the end unknowns by sqrt(2).
  Vector diag(intervals + 1);
  Vector sub(intervals);
  for (int j = 0; j <= intervals; ++j) {
    const double t = j == intervals ? T : j * h;
    diag[j] = 2.0 * ih2 + jacobi_potential(spec, path, t);
  }
  diag[0] += 2.0 * kappa1 / h;
  diag[intervals] -= 2.0 * kappa2 / h;
  sub.setConstant(-ih2);
  sub[0] = -std::sqrt(2.0) * ih2;
  sub[intervals - 1] = -std::sqrt(2.0) * ih2;

  Eigen::SelfAdjointEigenSolver<Matrix> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const Vector& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + k};
}

bool SpectralReport::fd_agrees() const {
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (!(std::abs(roots[i] - fd_eigenvalues[i]) <= fd_tolerance[i])) return false;
  }
  return !roots.empty();
}

SpectralReport eigen_crosscheck(const ProblemSpec& spec, int k, const SpectralOptions& sopts,
                                const ShootOptions& opts) {
  require_scalar_separable(spec, "eigen_crosscheck");
  if (k < 1) throw ParameterError("eigen_crosscheck: k must be at least 1");
  ShootOptions family = opts;
  family.accept_family = true;
  const ClassicalPath path = shoot_classical_path(spec, family);
  const JacobiGrid grid = jacobi_grid(spec, path, 0);
  const double T = spec.horizon;

  const double u_min = *std::min_element(grid.u.begin(), grid.u.end());
  const double u_max_abs =
      std::abs(*std::max_element(grid.u.begin(), grid.u.end(),
                                 [](double a, double b) { return std::abs(a) < std::abs(b); }));
  const double boundary = std::abs(grid.kappa1) + std::abs(grid.kappa2) + 1.0 / T;
  const double delta = kPi * kPi / (4.0 * T * T);
  // Offset by an irrational fraction of the step so that integer spectra do
  // not land on scan nodes.
  const double lo = u_min - 4.0 * boundary * boundary - 1.0 - 0.3819660112501051 * delta;

  auto omega = [&](double lambda) { return integrate_jacobi(grid, lambda).omega; };

  SpectralReport rep;
  rep.scan_lo = lo;
  double a = lo;
  double fa = omega(a);
  int scanned = 0;
  while (static_cast<int>(rep.roots.size()) < k) {
    if (++scanned > sopts.max_scan_steps) {
      throw SearchError("eigen_crosscheck: fewer than k roots of omega found", lo, a);
    }
    const double b = a + delta;
    const double fb = omega(b);
    if (fa == 0.0) {
      rep.roots.push_back(a);
    } else if (fa * fb < 0.0) {
      double l = a;
      double r = b;
      double fl = fa;
      while (r - l > sopts.bisection_tol) {
        const double mid = 0.5 * (l + r);
        const double fm = omega(mid);
        if (fm == 0.0) {
          l = r = mid;
          break;
        }
        if (fl * fm < 0.0) {
          r = mid;
        } else {
          l = mid;
          fl = fm;
        }
      }
      rep.roots.push_back(0.5 * (l + r));
    }
    a = b;
    fa = fb;
  }
  rep.roots.resize(static_cast<std::size_t>(k));
  rep.scan_hi = a;

  rep.fd_intervals = sopts.fd_intervals;
  rep.fd_eigenvalues = fd_eigenvalues(spec, path, k, sopts.fd_intervals);
  rep.fd_eigenvalues_2 = fd_eigenvalues(spec, path, k, 2 * sopts.fd_intervals);
  const double h = T / sopts.fd_intervals;
  for (int i = 0; i < k; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const double lam = rep.roots[si];
    const double scale = std::abs(lam) + u_max_abs + boundary * boundary;
    rep.fd_tolerance.push_back((1.0 + scale * scale) * h * h);
    const double e1 = std::abs(lam - rep.fd_eigenvalues[si]);
    const double e2 = std::abs(lam - rep.fd_eigenvalues_2[si]);
    rep.observed_order.push_back(e1 > 1e-12 && e2 > 1e-12 ? std::log2(e1 / e2) : std::nan(""));
    rep.weyl_ratio.push_back(i == 0 ? std::nan("") : lam / (kPi * kPi * i * i / (T * T)));
  }
  return rep;
}

AsymptoticReport asymptotic_check(const ProblemSpec& spec, const std::vector<double>& mu_list,
                                  const ShootOptions& opts) {
  require_scalar_separable(spec, "asymptotic_check");
  for (std::size_t i = 0; i < mu_list.size(); ++i) {
    if (!(mu_list[i] > 0.0)) throw ParameterError("asymptotic_check: mu values must be positive");
    if (i > 0 && !(mu_list[i] > mu_list[i - 1])) {
      throw ParameterError("asymptotic_check: mu values must increase");
    }
  }
  ShootOptions family = opts;
  family.accept_family = true;
  const ClassicalPath path = shoot_classical_path(spec, family);
  const JacobiGrid grid = jacobi_grid(spec, path, 0);
  const double T = spec.horizon;
  AsymptoticReport rep;
  rep.mu = mu_list;
  for (double mu : mu_list) {
    const ZetaResult z = integrate_jacobi(grid, -mu);
    const double x = T * std::sqrt(mu);
    const double log_ref = std::log(2.0 * std::sqrt(mu)) + x + std::log1p(-std::exp(-2.0 * x)) -
                           std::log(2.0);
    const double ratio = z.log_value.sign * std::exp(z.log_value.log_abs - log_ref);
    rep.ratio.push_back(ratio);
    rep.deviation.push_back(std::abs(ratio - 1.0));
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.deviation.size(); ++i) {
    if (!(rep.deviation[i] < rep.deviation[i - 1])) rep.monotone = false;
  }
  return rep;
}

double continuum_cross_hessian_fd(const ProblemSpec& spec, double fd_step,
                                  const ShootOptions& opts) {
  require_scalar_separable(spec, "continuum_cross_hessian_fd");
  const double h1 = fd_step > 0.0 ? fd_step : default_fd_step(spec.b1);
  const double h2 = fd_step > 0.0 ? fd_step : default_fd_step(spec.b2);
  const ClassicalPath base = shoot_classical_path(spec, opts);
  ShootOptions warm = opts;
  warm.initial_q = base.q(0);
  const std::vector<double> s = parallel_map<double>(4, [&](std::size_t k) {
    ProblemSpec shifted = spec;
    shifted.b1[0] += (k < 2 ? 1.0 : -1.0) * h1;
    shifted.b2[0] += (k % 2 == 0 ? 1.0 : -1.0) * h2;
    return continuum_action(shifted, shoot_classical_path(shifted, warm));
  });
  return (s[0] - s[1] - s[2] + s[3]) / (4.0 * h1 * h2);
}

GYReport verify_gy_zeta(const ProblemSpec& spec, double fd_step, const ShootOptions& opts) {
  require_scalar_separable(spec, "verify_gy_zeta");
  const ClassicalPath path = shoot_classical_path(spec, opts);
  const std::size_t last = path.ode.size() - 1;
  const double f1_qb = spec.f1.d_qb(path.q(0), spec.b1)(0, 0);
  const double f2_qb = spec.f2.d_qb(path.q(last), spec.b2)(0, 0);
  const ZetaResult z = zeta_det(spec, path, 0.0);

  GYReport r;
  r.identity = "gy-zeta";
  r.degenerate = f1_qb * f2_qb == 0.0;
  const double lhs = continuum_cross_hessian_fd(spec, fd_step, opts);
  r.lhs = Matrix::Constant(1, 1, lhs);
  r.lhs_value = lhs;
  if (z.value == 0.0 && !r.degenerate) {
    throw ConjugatePointError("det_zeta A vanishes: zero mode of the Jacobi operator");
  }
  r.rhs = r.degenerate ? 0.0 : 2.0 * f1_qb * f2_qb / (spec.mass * z.value);
  r.relative_gap = r.degenerate ? std::abs(lhs) : relative_gap(lhs, r.rhs);
  r.lhs_method = "finite_difference(shooting action)";
  r.rhs_method = "2 f1_qb f2_qb / (m det_zeta A)";
  r.points = static_cast<Index>(path.ode.size());
  r.epsilon = path.ode.step;
  return r;
}

TestFunction zero_function() {
  auto z = [](double) { return 0.0; };
  return {z, z, z};
}

std::pair<TestFunction, TestFunction> phase_test_pair(double a1, double a2, double horizon,
                                                      double shift) {
  const double w = kPi / horizon;
  const double T = horizon;
  const double x2_0 = 1.0 + shift;
  const double x2_T = -1.0 + shift;
  TestFunction x2{[=](double t) { return std::cos(w * t) + shift; },
                  [=](double t) { return -w * std::sin(w * t); },
                  [=](double t) { return -w * w * std::cos(w * t); }};
  const double l0 = a1 * x2_0;
  const double l1 = a2 * x2_T;
  TestFunction x1{[=](double t) { return l0 * (1.0 - t / T) + l1 * t / T + std::sin(w * t); },
                  [=](double t) { return (l1 - l0) / T + w * std::cos(w * t); },
                  [=](double t) { return -w * w * std::sin(w * t); }};
  return {x1, x2};
}

TestFunction mixed_bc_polynomial(double k1, double k2, double horizon, double c) {
  const double T = horizon;
  const double denom = 3.0 * T * T - k2 * T * T * T;
  if (std::abs(denom) < 1e-12) {
    throw ParameterError("mixed_bc_polynomial: boundary data leave the cubic undetermined");
  }
  const double d = (k2 * (1.0 + k1 * T + c * T * T) - k1 - 2.0 * c * T) / denom;
  return {[=](double t) { return 1.0 + k1 * t + c * t * t + d * t * t * t; },
          [=](double t) { return k1 + 2.0 * c * t + 3.0 * d * t * t; },
          [=](double t) { return 2.0 * c + 6.0 * d * t; }};
}

std::string to_string(WeakTarget t) { return t == WeakTarget::tilde_a ? "tildeA" : "A"; }

namespace {

void require_bc(double lhs, double rhs, const char* what) {
  const double scale = 1.0 + std::abs(lhs) + std::abs(rhs);
  if (std::abs(lhs - rhs) > 1e-9 * scale) {
    throw PreconditionError(std::string("weak convergence test function violates ") + what);
  }
}

double simpson(const std::vector<double>& f, double h) {
  const std::size_t m = f.size() - 1;
  double s = f.front() + f.back();
  for (std::size_t k = 1; k < m; ++k) s += (k % 2 == 1 ? 4.0 : 2.0) * f[k];
  return s * h / 3.0;
}

void finish(WeakConvergenceReport& rep) {
  rep.gap.clear();
  rep.exact = true;
  for (double d : rep.discrete) {
    rep.gap.push_back(std::abs(d - rep.continuum));
    if (rep.gap.back() != 0.0) rep.exact = false;
  }
  rep.slope = 0.0;
  if (rep.exact || rep.gap.size() < 2) return;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(rep.gap.size());
  for (std::size_t i = 0; i < rep.gap.size(); ++i) {
    const double x = std::log(rep.epsilon[i]);
    const double y = std::log(std::max(rep.gap[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

void check_points(const std::vector<Index>& points) {
  if (points.size() < 2) throw ParameterError("weak convergence: need at least two lattice sizes");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i] < 3) throw ParameterError("weak convergence: N must be at least 3");
    if (i > 0 && points[i] <= points[i - 1]) {
      throw ParameterError("weak convergence: N values must increase");
    }
  }
}

}  // namespace

WeakConvergenceReport weak_convergence_tilde_a(const ProblemSpec& spec, const TestFunction& x1,
                                               const TestFunction& x2, const TestFunction& y1,
                                               const TestFunction& y2,
                                               const std::vector<Index>& points,
                                               const ShootOptions& opts) {
  if (spec.dimension() != 1) throw ScopeError("weak convergence is implemented for n = 1");
  check_points(points);
  const double T = spec.horizon;
  const ClassicalPath path = shoot_classical_path(spec, opts);
  const std::size_t last = path.ode.size() - 1;
  const double a1 = spec.f1.d_qq(path.q(0), spec.b1)(0, 0);
  const double a2 = spec.f2.d_qq(path.q(last), spec.b2)(0, 0);
  require_bc(x1.value(0.0), a1 * x2.value(0.0), "x1(0) = a1 x2(0)");
  require_bc(x1.value(T), a2 * x2.value(T), "x1(T) = a2 x2(T)");
  require_bc(y1.value(0.0), a1 * y2.value(0.0), "y1(0) = a1 y2(0)");
  require_bc(y1.value(T), a2 * y2.value(T), "y1(T) = a2 y2(T)");

  WeakConvergenceReport rep;
  rep.target = WeakTarget::tilde_a;
  std::vector<double> f(path.ode.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double t = path.ode.t[k];
    const Vector p = path.p(k);
    const Vector q = path.q(k);
    const double hpp = spec.hamiltonian.hess_pp(p, q)(0, 0);
    const double hpq = spec.hamiltonian.hess_pq(p, q)(0, 0);
    const double hqq = spec.hamiltonian.hess_qq(p, q)(0, 0);
    f[k] = y1.value(t) * (-hpp * x1.value(t) + x2.d1(t) - hpq * x2.value(t)) +
           y2.value(t) * (-x1.d1(t) - hpq * x1.value(t) - hqq * x2.value(t));
  }
  rep.continuum = simpson(f, path.ode.step);

  rep.discrete = parallel_map<double>(points.size(), [&](std::size_t idx) {
    const Lattice lat(points[idx], T);
    const Index N = lat.points();
    const DiscretePath dp = solve_critical_path(spec, lat).path;
    const HJMatrix hj = assemble_hj(spec, lat, dp);
    double sum = 0.0;
    for (Index i = 0; i < N - 1; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const double ti = lat.time(i);
      const double ti1 = lat.time(i + 1);
      // Momentum row i and its transpose contribution to the q rows.
      sum += y1.value(ti) * (hj.d1[si](0, 0) * x1.value(ti) + hj.d2_diag[si](0, 0) * x2.value(ti) +
                             hj.d2_super[si](0, 0) * x2.value(ti1));
      sum += (y2.value(ti) * hj.d2_diag[si](0, 0) + y2.value(ti1) * hj.d2_super[si](0, 0)) *
             x1.value(ti);
    }
    for (Index j = 0; j < N; ++j) {
      const double tj = lat.time(j);
      sum += y2.value(tj) * hj.d4[static_cast<std::size_t>(j)](0, 0) * x2.value(tj);
    }
    return sum;
  });
  for (Index N : points) rep.epsilon.push_back(T / static_cast<double>(N - 1));
  rep.points = points;
  finish(rep);
  return rep;
}

WeakConvergenceReport weak_convergence_a(const ProblemSpec& spec, const TestFunction& x,
                                         const TestFunction& y, const std::vector<Index>& points,
                                         const ShootOptions& opts) {
  require_scalar_separable(spec, "weak_convergence_a");
  check_points(points);
  const double T = spec.horizon;
  const ClassicalPath path = shoot_classical_path(spec, opts);
  const std::size_t last = path.ode.size() - 1;
  const double k1 = spec.f1.d_qq(path.q(0), spec.b1)(0, 0) / spec.mass;
  const double k2 = spec.f2.d_qq(path.q(last), spec.b2)(0, 0) / spec.mass;
  require_bc(x.d1(0.0), k1 * x.value(0.0), "x'(0) = (a1/m) x(0)");
  require_bc(x.d1(T), k2 * x.value(T), "x'(T) = (a2/m) x(T)");
  require_bc(y.d1(0.0), k1 * y.value(0.0), "y'(0) = (a1/m) y(0)");
  require_bc(y.d1(T), k2 * y.value(T), "y'(T) = (a2/m) y(T)");

  WeakConvergenceReport rep;
  rep.target = WeakTarget::a;
  std::vector<double> f(path.ode.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double t = path.ode.t[k];
    const double u = -spec.hamiltonian.hess_qq(path.p(k), path.q(k))(0, 0) / spec.mass;
    f[k] = y.value(t) * (-x.d2(t) + u * x.value(t));
  }
  rep.continuum = simpson(f, path.ode.step);

  rep.discrete = parallel_map<double>(points.size(), [&](std::size_t idx) {
    const Lattice lat(points[idx], T);
    const Index N = lat.points();
    const DiscretePath dp = solve_critical_path(spec, lat).path;
    const BlockTridiagonal an = assemble_an(spec, lat, dp);
    double sum = 0.0;
    for (Index j = 0; j < N; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      double row = an.diag[sj](0, 0) * x.value(lat.time(j));
      if (j > 0) row += an.lower[sj - 1](0, 0) * x.value(lat.time(j - 1));
      if (j + 1 < N) row += an.upper[sj](0, 0) * x.value(lat.time(j + 1));
      sum += y.value(lat.time(j)) * row;
    }
    return sum;
  });
  for (Index N : points) rep.epsilon.push_back(T / static_cast<double>(N - 1));
  rep.points = points;
  finish(rep);
  return rep;
}

}  // namespace gylab
