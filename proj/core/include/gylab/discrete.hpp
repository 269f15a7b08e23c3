#pragma once

#include <optional>
#include <vector>

#include "gylab/linalg.hpp"
#include "gylab/model.hpp"

namespace gylab {

// N position points on [0, T] with spacing epsilon = T / (N - 1), so that
// the last point sits exactly at T. Indices are zero-based throughout:
// q[0..N-1], p[0..N-2], t_i = i * epsilon.
class Lattice {
 public:
  Lattice(Index points, double horizon);

  /// The epsilon = 1 convention: horizon N - 1.
  static Lattice unit(Index points) { return Lattice(points, static_cast<double>(points - 1)); }

  Index points() const { return n_points_; }
  Index momenta() const { return n_points_ - 1; }
  double horizon() const { return horizon_; }
  double epsilon() const { return epsilon_; }
  double time(Index i) const;

 private:
  Index n_points_;
  double horizon_;
  double epsilon_;
};

struct DiscretePath {
  std::vector<Vector> p;  // N - 1 momenta
  std::vector<Vector> q;  // N positions

  Index points() const { return static_cast<Index>(q.size()); }
  Index dimension() const { return q.empty() ? 0 : q.front().size(); }

  /// Stacked (p_0, ..., p_{N-2}, q_0, ..., q_{N-1}), the row order of the
  /// Hamilton-Jacobi matrix.
  Vector flatten() const;
  static DiscretePath unflatten(const Vector& x, Index points, Index dimension);
};

void check_shape(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path);

/// Sum p_i (q_{i+1} - q_i) - sum eps H(p_i, q_i) - f2(q_N, b2) + f1(q_1, b1).
double discrete_action(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path);

/// Gradient of discrete_action in the flatten() ordering.
Vector action_gradient(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path);

/// The discrete Hamilton equations and boundary conditions, stacked as
///   q_{i+1} - q_i - dH_d/dp_i                 i = 1..N-1
///   p_i - p_{i-1} + dH_d/dq_i                 i = 2..N-1
///   df1/dq_1 - p_1 - dH_d/dq_1
///   df2/dq_N - p_{N-1}
/// (one-based indices as in the equations). Entries coincide with the action
/// gradient up to sign: the interior q rows and the last row are negated.
Vector residual(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path);

/// Maps action_gradient to residual ordering and sign.
Vector gradient_to_residual(const Vector& gradient, Index points, Index dimension);

struct NewtonOptions {
  double tol = 1e-10;  // max-norm of the residual
  int max_iter = 50;
  int max_halvings = 30;
};

struct CriticalPath {
  DiscretePath path;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Free-flow starting guess: q_1 = 0, constant momentum equal to the mean of
/// df1/dq(0, b1) and df2/dq(0, b2), positions advanced by eps * p / m.
DiscretePath default_initial_path(const ProblemSpec& spec, const Lattice& lat);

/// Damped Newton on the action gradient with the Hamilton-Jacobi matrix as
/// Jacobian. Throws AdmissibilityError if a lattice site violates the
/// admissibility conditions, ConjugatePointError if the Jacobian is singular
/// and ConvergenceError after max_iter iterations.
CriticalPath solve_critical_path(const ProblemSpec& spec, const Lattice& lat,
                                 const std::optional<DiscretePath>& init = std::nullopt,
                                 const NewtonOptions& opts = {});

}  // namespace gylab
