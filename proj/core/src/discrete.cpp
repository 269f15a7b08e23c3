#include "gylab/discrete.hpp"

#include <cmath>
#include <string>

#include "gylab/errors.hpp"
#include "gylab/operators.hpp"

namespace gylab {

Lattice::Lattice(Index points, double horizon) : n_points_(points), horizon_(horizon) {
  if (points < 2) throw ParameterError("Lattice: need at least two position points");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ParameterError("Lattice: horizon must be positive");
  }
  epsilon_ = horizon / static_cast<double>(points - 1);
}

double Lattice::time(Index i) const {
  if (i == n_points_ - 1) return horizon_;
  return static_cast<double>(i) * epsilon_;
}

Vector DiscretePath::flatten() const {
  const Index n = dimension();
  const Index np = static_cast<Index>(p.size());
  const Index nq = static_cast<Index>(q.size());
  Vector x((np + nq) * n);
  for (Index i = 0; i < np; ++i) x.segment(i * n, n) = p[static_cast<std::size_t>(i)];
  for (Index i = 0; i < nq; ++i) x.segment((np + i) * n, n) = q[static_cast<std::size_t>(i)];
  return x;
}

DiscretePath DiscretePath::unflatten(const Vector& x, Index points, Index dimension) {
  if (x.size() != (2 * points - 1) * dimension) throw ShapeError("unflatten: size mismatch");
  DiscretePath out;
  out.p.resize(static_cast<std::size_t>(points - 1));
  out.q.resize(static_cast<std::size_t>(points));
  for (Index i = 0; i < points - 1; ++i) {
    out.p[static_cast<std::size_t>(i)] = x.segment(i * dimension, dimension);
  }
  for (Index i = 0; i < points; ++i) {
    out.q[static_cast<std::size_t>(i)] = x.segment((points - 1 + i) * dimension, dimension);
  }
  return out;
}

void check_shape(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path) {
  const Index n = spec.dimension();
  if (path.points() != lat.points() || static_cast<Index>(path.p.size()) != lat.momenta()) {
    throw ShapeError("path length does not match the lattice");
  }
  for (const auto& v : path.p) {
    if (v.size() != n) throw ShapeError("momentum dimension does not match the Hamiltonian");
  }
  for (const auto& v : path.q) {
    if (v.size() != n) throw ShapeError("position dimension does not match the Hamiltonian");
  }
}

namespace {

// Neumaier compensated sum; the action is a long alternating sum and the
// finite-difference cross Hessian divides its roundoff by h^2.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

double discrete_action(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path) {
  check_shape(spec, lat, path);
  const double eps = lat.epsilon();
  CompensatedSum s;
  for (std::size_t i = 0; i < path.p.size(); ++i) {
    const Vector& p = path.p[i];
    const Vector dq = path.q[i + 1] - path.q[i];
    for (Index k = 0; k < p.size(); ++k) s.add(p[k] * dq[k]);
    s.add(-eps * spec.hamiltonian.energy(p, path.q[i]));
  }
  s.add(-spec.f2.value(path.q.back(), spec.b2));
  s.add(spec.f1.value(path.q.front(), spec.b1));
  return s.value();
}

Vector action_gradient(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path) {
  check_shape(spec, lat, path);
  const Index n = spec.dimension();
  const Index N = lat.points();
  const double eps = lat.epsilon();
  const auto& H = spec.hamiltonian;
  Vector g = Vector::Zero((2 * N - 1) * n);
  const Index q_off = (N - 1) * n;
  for (Index i = 0; i < N - 1; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const Vector& p = path.p[si];
    const Vector& q = path.q[si];
    g.segment(i * n, n) = path.q[si + 1] - q - eps * H.grad_p(p, q);
    g.segment(q_off + i * n, n) += -p - eps * H.grad_q(p, q);
    g.segment(q_off + (i + 1) * n, n) += p;
  }
  g.segment(q_off, n) += spec.f1.d_q(path.q.front(), spec.b1);
  g.segment(q_off + (N - 1) * n, n) -= spec.f2.d_q(path.q.back(), spec.b2);
  return g;
}

Vector gradient_to_residual(const Vector& gradient, Index points, Index dimension) {
  const Index n = dimension;
  const Index N = points;
  const Index q_off = (N - 1) * n;
  Vector r(gradient.size());
  Index row = 0;
  // Momentum rows first (dS/dp_i is already q_{i+1} - q_i - dH_d/dp_i).
  r.segment(0, q_off) = gradient.segment(0, q_off);
  row = q_off;
  for (Index i = 1; i < N - 1; ++i) {
    r.segment(row, n) = -gradient.segment(q_off + i * n, n);
    row += n;
  }
  r.segment(row, n) = gradient.segment(q_off, n);
  row += n;
  r.segment(row, n) = -gradient.segment(q_off + (N - 1) * n, n);
  return r;
}

Vector residual(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path) {
  return gradient_to_residual(action_gradient(spec, lat, path), lat.points(), spec.dimension());
}

DiscretePath default_initial_path(const ProblemSpec& spec, const Lattice& lat) {
  const Index n = spec.dimension();
  const Vector zero = Vector::Zero(n);
  const Vector p0 = 0.5 * (spec.f1.d_q(zero, spec.b1) + spec.f2.d_q(zero, spec.b2));
  DiscretePath path;
  path.q.resize(static_cast<std::size_t>(lat.points()));
  path.p.resize(static_cast<std::size_t>(lat.momenta()));
  for (Index i = 0; i < lat.points(); ++i) {
    path.q[static_cast<std::size_t>(i)] = (lat.time(i) / spec.mass) * p0;
  }
  for (Index i = 0; i < lat.momenta(); ++i) {
    const auto si = static_cast<std::size_t>(i);
    path.p[si] = spec.mass * (path.q[si + 1] - path.q[si]) / lat.epsilon();
  }
  return path;
}

namespace {

// Interleaved position of flatten() entry `k`: q_i -> block 2i, p_i -> block 2i + 1.
Vector to_interleaved(const Vector& x, Index N, Index n) {
  Vector out(x.size());
  for (Index i = 0; i < N - 1; ++i) out.segment((2 * i + 1) * n, n) = x.segment(i * n, n);
  for (Index i = 0; i < N; ++i) out.segment(2 * i * n, n) = x.segment((N - 1 + i) * n, n);
  return out;
}

Vector from_interleaved(const Vector& y, Index N, Index n) {
  Vector out(y.size());
  for (Index i = 0; i < N - 1; ++i) out.segment(i * n, n) = y.segment((2 * i + 1) * n, n);
  for (Index i = 0; i < N; ++i) out.segment((N - 1 + i) * n, n) = y.segment(2 * i * n, n);
  return out;
}

double max_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

CriticalPath solve_critical_path(const ProblemSpec& spec, const Lattice& lat,
                                 const std::optional<DiscretePath>& init,
                                 const NewtonOptions& opts) {
  spec.validate();
  if (!(opts.tol > 0.0)) throw ParameterError("solve_critical_path: tol must be positive");
  if (opts.max_iter < 1) throw ParameterError("solve_critical_path: max_iter must be positive");
  const Index n = spec.dimension();
  const Index N = lat.points();

  DiscretePath path = init ? *init : default_initial_path(spec, lat);
  check_shape(spec, lat, path);

  Vector grad = action_gradient(spec, lat, path);
  double norm = max_norm(grad);
  CriticalPath out;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (!std::isfinite(norm)) break;
    if (norm <= opts.tol) {
      out.path = std::move(path);
      out.residual_norm = norm;
      out.iterations = iter;
      return out;
    }
    const HJMatrix hj = assemble_hj(spec, lat, path);
    const BandedLU lu(hj.to_banded_interleaved());
    if (lu.singular()) {
      throw ConjugatePointError("Newton Jacobian (Hamilton-Jacobi matrix) is singular; row " +
                                std::to_string(lu.singular_index()) + " of the interleaved system");
    }
    const Vector step = from_interleaved(lu.solve(to_interleaved(-grad, N, n)), N, n);
    if (!step.allFinite()) throw ConjugatePointError("Newton step is not finite");

    const Vector x = path.flatten();
    double lambda = 1.0;
    DiscretePath trial = DiscretePath::unflatten(x + step, N, n);
    Vector trial_grad = action_gradient(spec, lat, trial);
    double trial_norm = max_norm(trial_grad);
    for (int h = 0; h < opts.max_halvings && !(trial_norm < norm); ++h) {
      lambda *= 0.5;
      trial = DiscretePath::unflatten(x + lambda * step, N, n);
      trial_grad = action_gradient(spec, lat, trial);
      trial_norm = max_norm(trial_grad);
    }
    path = std::move(trial);
    grad = std::move(trial_grad);
    norm = trial_norm;
  }
  if (norm <= opts.tol) {
    out.path = std::move(path);
    out.residual_norm = norm;
    out.iterations = opts.max_iter;
    return out;
  }
  throw ConvergenceError("discrete critical path: Newton did not converge in " +
                             std::to_string(opts.max_iter) + " iterations (residual " +
                             std::to_string(norm) + ")",
                         norm);
}

}  // namespace gylab
