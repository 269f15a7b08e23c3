#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "gylab/linalg.hpp"

namespace gylab {

// A twice-differentiable Hamiltonian H(p, q) on R^n x R^n, supplied as
// analytic callbacks. hess_pq(p, q)(a, b) is d2H / dp^a dq^b.
class HamiltonianModel {
 public:
  struct Functions {
    std::function<double(const Vector& p, const Vector& q)> energy;
    std::function<Vector(const Vector& p, const Vector& q)> grad_p;
    std::function<Vector(const Vector& p, const Vector& q)> grad_q;
    std::function<Matrix(const Vector& p, const Vector& q)> hess_pp;
    std::function<Matrix(const Vector& p, const Vector& q)> hess_pq;
    std::function<Matrix(const Vector& p, const Vector& q)> hess_qq;
  };

  /// separable_mass is set only for H = |p|^2 / (2m) + V(q).
  HamiltonianModel(Index dimension, Functions fns, std::optional<double> separable_mass = {},
                   std::string name = "custom");

  Index dimension() const { return dim_; }
  const std::string& name() const { return name_; }
  bool is_separable() const { return separable_mass_.has_value(); }
  std::optional<double> separable_mass() const { return separable_mass_; }

  double energy(const Vector& p, const Vector& q) const { return fns_.energy(p, q); }
  Vector grad_p(const Vector& p, const Vector& q) const { return fns_.grad_p(p, q); }
  Vector grad_q(const Vector& p, const Vector& q) const { return fns_.grad_q(p, q); }
  Matrix hess_pp(const Vector& p, const Vector& q) const { return fns_.hess_pp(p, q); }
  Matrix hess_pq(const Vector& p, const Vector& q) const { return fns_.hess_pq(p, q); }
  Matrix hess_qq(const Vector& p, const Vector& q) const { return fns_.hess_qq(p, q); }

 private:
  Index dim_;
  Functions fns_;
  std::optional<double> separable_mass_;
  std::string name_;
};

// Potential V(q) with analytic gradient and Hessian.
struct Potential {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
};

HamiltonianModel separable_model(double mass, Index dimension, Potential potential,
                                 std::string name = "separable");
HamiltonianModel free_particle(double mass, Index dimension = 1);
HamiltonianModel harmonic(double mass, double omega);
/// Uncoupled oscillators, one frequency per coordinate.
HamiltonianModel harmonic(double mass, const Vector& omegas);
/// V(q) = 1/2 q^T K q with K symmetric.
HamiltonianModel quadratic_potential(double mass, const Matrix& stiffness);
/// V(q) = 1/2 m omega^2 |q|^2 + lambda * sum q_k^4.
HamiltonianModel anharmonic(double mass, double omega, double lambda, Index dimension = 1);
/// Non-separable: |p|^2/(2m) + 1/2 m omega^2 |q|^2 + gamma p.q + 1/2 delta (p.q)^2.
HamiltonianModel coupled(double mass, double omega, double gamma, double delta,
                         Index dimension = 1);

// Lagrangian boundary generator f(q, b). d_qb(q, b)(i, j) is d2f / dq^i db^j.
class BoundaryGenerator {
 public:
  struct Functions {
    std::function<double(const Vector& q, const Vector& b)> value;
    std::function<Vector(const Vector& q, const Vector& b)> d_q;
    std::function<Vector(const Vector& q, const Vector& b)> d_b;
    std::function<Matrix(const Vector& q, const Vector& b)> d_qq;
    std::function<Matrix(const Vector& q, const Vector& b)> d_qb;
  };

  BoundaryGenerator(Index dimension, Functions fns, std::string name = "custom");

  Index dimension() const { return dim_; }
  const std::string& name() const { return name_; }

  double value(const Vector& q, const Vector& b) const { return fns_.value(q, b); }
  Vector d_q(const Vector& q, const Vector& b) const { return fns_.d_q(q, b); }
  Vector d_b(const Vector& q, const Vector& b) const { return fns_.d_b(q, b); }
  Matrix d_qq(const Vector& q, const Vector& b) const { return fns_.d_qq(q, b); }
  Matrix d_qb(const Vector& q, const Vector& b) const { return fns_.d_qb(q, b); }

 private:
  Index dim_;
  Functions fns_;
  std::string name_;
};

/// f(q, b) = 1/2 a |q|^2 + coupling * b.q
BoundaryGenerator quadratic_generator(double a, double coupling = 1.0, Index dimension = 1);
/// f(q, b) = 1/2 q^T A q + q^T C b, A symmetric.
BoundaryGenerator quadratic_generator(const Matrix& a, const Matrix& coupling);

struct ProblemSpec {
  HamiltonianModel hamiltonian;
  BoundaryGenerator f1;
  BoundaryGenerator f2;
  double mass = 1.0;
  double horizon = 1.0;
  Vector b1;
  Vector b2;

  Index dimension() const { return hamiltonian.dimension(); }
  /// Throws ParameterError on nonpositive m or T, mismatched dimensions, or a
  /// separable model whose mass disagrees with `mass`.
  void validate() const;
};

/// Separable quadratic system with seeded random stiffness, boundary
/// curvatures and couplings. Entries are kept small enough that the lattice
/// operators stay well conditioned for moderate N.
ProblemSpec random_quadratic_problem(std::uint64_t seed, Index dimension, double mass = 1.0,
                                     double horizon = 1.0);

/// Throws ScopeError unless the Hamiltonian is of the separable family.
void require_separable(const ProblemSpec& spec, const char* operation);

// Central-difference audit of analytic derivatives. Errors are
// max_ij |fd - analytic| / max(1, |analytic|) per block.
struct DerivativeReport {
  double grad_p = 0.0;
  double grad_q = 0.0;
  double hess_pp = 0.0;
  double hess_pq = 0.0;
  double hess_qq = 0.0;
  double symmetry = 0.0;  // of hess_pp and hess_qq
  double max() const;
};

struct GeneratorDerivativeReport {
  double d_q = 0.0;
  double d_b = 0.0;
  double d_qq = 0.0;
  double d_qb = 0.0;
  double symmetry = 0.0;
  double max() const;
};

DerivativeReport check_derivatives(const HamiltonianModel& model, const Vector& p, const Vector& q,
                                   double fd_step);
GeneratorDerivativeReport check_derivatives(const BoundaryGenerator& f, const Vector& q,
                                            const Vector& b, double fd_step);

}  // namespace gylab
