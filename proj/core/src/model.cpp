#include "gylab/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "gylab/errors.hpp"

namespace gylab {

HamiltonianModel::HamiltonianModel(Index dimension, Functions fns,
                                   std::optional<double> separable_mass, std::string name)
    : dim_(dimension), fns_(std::move(fns)), separable_mass_(separable_mass), name_(std::move(name)) {
  if (dim_ <= 0) throw ParameterError("HamiltonianModel: dimension must be positive");
  if (!fns_.energy || !fns_.grad_p || !fns_.grad_q || !fns_.hess_pp || !fns_.hess_pq ||
      !fns_.hess_qq) {
    throw ParameterError("HamiltonianModel: every callback must be provided");
  }
  if (separable_mass_ && !(*separable_mass_ > 0.0)) {
    throw ParameterError("HamiltonianModel: mass must be positive");
  }
}

HamiltonianModel separable_model(double mass, Index dimension, Potential potential,
                                 std::string name) {
  if (!(mass > 0.0)) throw ParameterError("separable_model: mass must be positive");
  if (dimension <= 0) throw ParameterError("separable_model: dimension must be positive");
  if (!potential.value || !potential.gradient || !potential.hessian) {
    throw ParameterError("separable_model: potential needs value, gradient and hessian");
  }
  const double inv_m = 1.0 / mass;
  HamiltonianModel::Functions fns;
  fns.energy = [inv_m, v = potential.value](const Vector& p, const Vector& q) {
    return 0.5 * inv_m * p.squaredNorm() + v(q);
  };
  fns.grad_p = [inv_m](const Vector& p, const Vector&) -> Vector { return inv_m * p; };
  fns.grad_q = [g = potential.gradient](const Vector&, const Vector& q) { return g(q); };
  fns.hess_pp = [inv_m, dimension](const Vector&, const Vector&) -> Matrix {
    return inv_m * Matrix::Identity(dimension, dimension);
  };
  fns.hess_pq = [dimension](const Vector&, const Vector&) -> Matrix {
    return Matrix::Zero(dimension, dimension);
  };
  fns.hess_qq = [h = potential.hessian](const Vector&, const Vector& q) { return h(q); };
  return HamiltonianModel(dimension, std::move(fns), mass, std::move(name));
}

HamiltonianModel free_particle(double mass, Index dimension) {
  if (!(mass > 0.0)) throw ParameterError("free_particle: mass must be positive");
  Potential v{
      [](const Vector&) { return 0.0; },
      [](const Vector& q) -> Vector { return Vector::Zero(q.size()); },
      [](const Vector& q) -> Matrix { return Matrix::Zero(q.size(), q.size()); },
  };
  return separable_model(mass, dimension, std::move(v), "free");
}

HamiltonianModel harmonic(double mass, double omega) {
  if (!(omega > 0.0)) throw ParameterError("harmonic: omega must be positive");
  return harmonic(mass, Vector::Constant(1, omega));
}

HamiltonianModel harmonic(double mass, const Vector& omegas) {
  if (!(mass > 0.0)) throw ParameterError("harmonic: mass must be positive");
  if (omegas.size() == 0 || !(omegas.minCoeff() > 0.0)) {
    throw ParameterError("harmonic: omega must be positive");
  }
  const Vector k = mass * omegas.array().square().matrix();
  Potential v{
      [k](const Vector& q) { return 0.5 * (k.array() * q.array().square()).sum(); },
      [k](const Vector& q) -> Vector { return (k.array() * q.array()).matrix(); },
      [k](const Vector&) -> Matrix { return k.asDiagonal(); },
  };
  return separable_model(mass, omegas.size(), std::move(v), "harmonic");
}

HamiltonianModel quadratic_potential(double mass, const Matrix& stiffness) {
  if (stiffness.rows() != stiffness.cols() || stiffness.rows() == 0) {
    throw ParameterError("quadratic_potential: stiffness must be square");
  }
  const Matrix k = 0.5 * (stiffness + stiffness.transpose());
  Potential v{
      [k](const Vector& q) { return 0.5 * q.dot(k * q); },
      [k](const Vector& q) -> Vector { return k * q; },
      [k](const Vector&) -> Matrix { return k; },
  };
  return separable_model(mass, k.rows(), std::move(v), "quadratic");
}

HamiltonianModel anharmonic(double mass, double omega, double lambda, Index dimension) {
  if (!(mass > 0.0)) throw ParameterError("anharmonic: mass must be positive");
  if (omega < 0.0) throw ParameterError("anharmonic: omega must be nonnegative");
  const double k = mass * omega * omega;
  Potential v{
      [k, lambda](const Vector& q) {
        return 0.5 * k * q.squaredNorm() + lambda * q.array().pow(4).sum();
      },
      [k, lambda](const Vector& q) -> Vector {
        return (k * q.array() + 4.0 * lambda * q.array().cube()).matrix();
      },
      [k, lambda](const Vector& q) -> Matrix {
        const Vector d = (k + 12.0 * lambda * q.array().square()).matrix();
        return d.asDiagonal();
      },
  };
  return separable_model(mass, dimension, std::move(v), "anharmonic");
}

HamiltonianModel coupled(double mass, double omega, double gamma, double delta, Index dimension) {
  if (!(mass > 0.0)) throw ParameterError("coupled: mass must be positive");
  if (dimension <= 0) throw ParameterError("coupled: dimension must be positive");
  const double k = mass * omega * omega;
  const double inv_m = 1.0 / mass;
  const Matrix id = Matrix::Identity(dimension, dimension);
  HamiltonianModel::Functions fns;
  fns.energy = [=](const Vector& p, const Vector& q) {
    const double pq = p.dot(q);
    return 0.5 * inv_m * p.squaredNorm() + 0.5 * k * q.squaredNorm() + gamma * pq +
           0.5 * delta * pq * pq;
  };
  fns.grad_p = [=](const Vector& p, const Vector& q) -> Vector {
    return inv_m * p + (gamma + delta * p.dot(q)) * q;
  };
  fns.grad_q = [=](const Vector& p, const Vector& q) -> Vector {
    return k * q + (gamma + delta * p.dot(q)) * p;
  };
  fns.hess_pp = [=](const Vector&, const Vector& q) -> Matrix {
    return inv_m * id + delta * q * q.transpose();
  };
  fns.hess_pq = [=](const Vector& p, const Vector& q) -> Matrix {
    return (gamma + delta * p.dot(q)) * id + delta * q * p.transpose();
  };
  fns.hess_qq = [=](const Vector& p, const Vector&) -> Matrix {
    return k * id + delta * p * p.transpose();
  };
  return HamiltonianModel(dimension, std::move(fns), std::nullopt, "coupled");
}

BoundaryGenerator::BoundaryGenerator(Index dimension, Functions fns, std::string name)
    : dim_(dimension), fns_(std::move(fns)), name_(std::move(name)) {
  if (dim_ <= 0) throw ParameterError("BoundaryGenerator: dimension must be positive");
  if (!fns_.value || !fns_.d_q || !fns_.d_b || !fns_.d_qq || !fns_.d_qb) {
    throw ParameterError("BoundaryGenerator: every callback must be provided");
  }
}

BoundaryGenerator quadratic_generator(double a, double coupling, Index dimension) {
  const Matrix id = Matrix::Identity(dimension, dimension);
  return quadratic_generator(a * id, coupling * id);
}

BoundaryGenerator quadratic_generator(const Matrix& a, const Matrix& coupling) {
  if (a.rows() != a.cols() || coupling.rows() != a.rows() || coupling.cols() != a.rows()) {
    throw ParameterError("quadratic_generator: a and coupling must be n x n");
  }
  const Matrix as = 0.5 * (a + a.transpose());
  const Matrix c = coupling;
  BoundaryGenerator::Functions fns;
  fns.value = [as, c](const Vector& q, const Vector& b) {
    return 0.5 * q.dot(as * q) + q.dot(c * b);
  };
  fns.d_q = [as, c](const Vector& q, const Vector& b) -> Vector { return as * q + c * b; };
  fns.d_b = [c](const Vector& q, const Vector&) -> Vector { return c.transpose() * q; };
  fns.d_qq = [as](const Vector&, const Vector&) -> Matrix { return as; };
  fns.d_qb = [c](const Vector&, const Vector&) -> Matrix { return c; };
  return BoundaryGenerator(as.rows(), std::move(fns), "quadratic");
}

void ProblemSpec::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw ParameterError("mass must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ParameterError("horizon T must be positive");
  }
  const Index n = dimension();
  if (f1.dimension() != n || f2.dimension() != n) {
    throw ParameterError("boundary generators must match the Hamiltonian dimension");
  }
  if (b1.size() != n || b2.size() != n) {
    throw ParameterError("Lagrangian parameters b1, b2 must have the Hamiltonian dimension");
  }
  if (auto m = hamiltonian.separable_mass(); m && std::abs(*m - mass) > 1e-14 * mass) {
    throw ParameterError("separable model mass differs from problem mass");
  }
}

ProblemSpec random_quadratic_problem(std::uint64_t seed, Index dimension, double mass,
                                     double horizon) {
  if (dimension <= 0) throw ParameterError("random_quadratic_problem: dimension must be positive");
  std::mt19937_64 rng(seed);
  // Explicit mapping keeps the stream identical across standard libraries.
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  auto sym = [&](double lo, double hi) {
    Matrix m(dimension, dimension);
    for (Index i = 0; i < dimension; ++i) {
      for (Index j = 0; j < dimension; ++j) m(i, j) = uniform(lo, hi);
    }
    return Matrix(0.5 * (m + m.transpose()));
  };
  auto coupling = [&]() {
    Matrix c = Matrix::Identity(dimension, dimension);
    for (Index i = 0; i < dimension; ++i) {
      for (Index j = 0; j < dimension; ++j) c(i, j) += uniform(-0.3, 0.3);
    }
    return c;
  };
  const Matrix stiffness = sym(-1.0, 1.0);
  const Matrix a1 = sym(-1.0, 1.0);
  const Matrix a2 = sym(-1.0, 1.0);
  const Matrix c1 = coupling();
  const Matrix c2 = coupling();
  Vector b1(dimension);
  Vector b2(dimension);
  for (Index i = 0; i < dimension; ++i) b1[i] = uniform(-1.0, 1.0);
  for (Index i = 0; i < dimension; ++i) b2[i] = uniform(-1.0, 1.0);
  return ProblemSpec{quadratic_potential(mass, stiffness), quadratic_generator(a1, c1),
                     quadratic_generator(a2, c2), mass, horizon, b1, b2};
}

void require_separable(const ProblemSpec& spec, const char* operation) {
  if (!spec.hamiltonian.is_separable()) {
    throw ScopeError(std::string(operation) +
                     " requires a separable Hamiltonian |p|^2/(2m) + V(q)");
  }
}

namespace {

double block_error(const Matrix& fd, const Matrix& exact) {
  double worst = 0.0;
  for (Index i = 0; i < fd.rows(); ++i) {
    for (Index j = 0; j < fd.cols(); ++j) {
      worst = std::max(worst, std::abs(fd(i, j) - exact(i, j)) / std::max(1.0, std::abs(exact(i, j))));
    }
  }
  return worst;
}

double symmetry_error(const Matrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

// Column j of the result is the central difference of g along unit vector j.
template <typename F>
Matrix fd_jacobian(F&& g, const Vector& x, double h) {
  const Index n = x.size();
  Matrix out;
  for (Index j = 0; j < n; ++j) {
    Vector xp = x;
    Vector xm = x;
    xp[j] += h;
    xm[j] -= h;
    Vector col = (g(xp) - g(xm)) / (2.0 * h);
    if (out.size() == 0) out.resize(col.size(), n);
    out.col(j) = col;
  }
  return out;
}

template <typename F>
Vector fd_gradient(F&& f, const Vector& x, double h) {
  Vector out(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    Vector xp = x;
    Vector xm = x;
    xp[j] += h;
    xm[j] -= h;
    out[j] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return out;
}

}  // namespace

double DerivativeReport::max() const {
  return std::max({grad_p, grad_q, hess_pp, hess_pq, hess_qq});
}

double GeneratorDerivativeReport::max() const { return std::max({d_q, d_b, d_qq, d_qb}); }

DerivativeReport check_derivatives(const HamiltonianModel& model, const Vector& p,
                                   const Vector& q, double fd_step) {
  if (!(fd_step > 0.0)) throw ParameterError("check_derivatives: fd_step must be positive");
  if (p.size() != model.dimension() || q.size() != model.dimension()) {
    throw ShapeError("check_derivatives: point dimension mismatch");
  }
  DerivativeReport r;
  auto e_p = [&](const Vector& x) { return model.energy(x, q); };
  auto e_q = [&](const Vector& x) { return model.energy(p, x); };
  r.grad_p = block_error(fd_gradient(e_p, p, fd_step), model.grad_p(p, q));
  r.grad_q = block_error(fd_gradient(e_q, q, fd_step), model.grad_q(p, q));

  auto gp_p = [&](const Vector& x) { return model.grad_p(x, q); };
  auto gp_q = [&](const Vector& x) { return model.grad_p(p, x); };
  auto gq_q = [&](const Vector& x) { return model.grad_q(p, x); };
  const Matrix hpp = model.hess_pp(p, q);
  const Matrix hqq = model.hess_qq(p, q);
  r.hess_pp = block_error(fd_jacobian(gp_p, p, fd_step), hpp);
  r.hess_pq = block_error(fd_jacobian(gp_q, q, fd_step), model.hess_pq(p, q));
  r.hess_qq = block_error(fd_jacobian(gq_q, q, fd_step), hqq);
  r.symmetry = std::max(symmetry_error(hpp), symmetry_error(hqq));
  return r;
}

GeneratorDerivativeReport check_derivatives(const BoundaryGenerator& f, const Vector& q,
                                            const Vector& b, double fd_step) {
  if (!(fd_step > 0.0)) throw ParameterError("check_derivatives: fd_step must be positive");
  if (q.size() != f.dimension() || b.size() != f.dimension()) {
    throw ShapeError("check_derivatives: point dimension mismatch");
  }
  GeneratorDerivativeReport r;
  auto v_q = [&](const Vector& x) { return f.value(x, b); };
  auto v_b = [&](const Vector& x) { return f.value(q, x); };
  r.d_q = block_error(fd_gradient(v_q, q, fd_step), f.d_q(q, b));
  r.d_b = block_error(fd_gradient(v_b, b, fd_step), f.d_b(q, b));
  auto dq_q = [&](const Vector& x) { return f.d_q(x, b); };
  auto dq_b = [&](const Vector& x) { return f.d_q(q, x); };
  const Matrix fqq = f.d_qq(q, b);
  r.d_qq = block_error(fd_jacobian(dq_q, q, fd_step), fqq);
  r.d_qb = block_error(fd_jacobian(dq_b, b, fd_step), f.d_qb(q, b));
  r.symmetry = symmetry_error(fqq);
  return r;
}

}  // namespace gylab
