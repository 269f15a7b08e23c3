#pragma once

#include <optional>
#include <string>

#include "gylab/discrete.hpp"
#include "gylab/linalg.hpp"
#include "gylab/model.hpp"
#include "gylab/operators.hpp"

namespace gylab {

struct GYReport {
  std::string identity;
  Matrix lhs;              // cross-Hessian d2S/db1db2 (n x n); 1 x 1 for scalar identities
  double lhs_value = 0.0;  // det(lhs) or the scalar compared
  double rhs = 0.0;
  double relative_gap = 0.0;
  std::string lhs_method;
  std::string rhs_method;
  Index points = 0;
  double epsilon = 0.0;
  bool odd = false;
  double parity_factor = 1.0;  // (-1)^{n(N-1)}
  bool degenerate = false;     // a boundary coupling d_qb is singular

  /// Paper-literal odd-N simplified right side (no parity factor); only set
  /// for separable systems.
  std::optional<double> rhs_literal;
  std::optional<double> literal_gap;
};

enum class CrossMethod { chain, finite_difference };
std::string to_string(CrossMethod m);

/// Default finite-difference step for Lagrangian parameters: 1e-4 max(1, |b|).
double default_fd_step(const Vector& b);

/// Critical value of the discrete action for the given spec (re-solves Newton).
double critical_action(const ProblemSpec& spec, const Lattice& lat,
                       const std::optional<DiscretePath>& init = std::nullopt,
                       const NewtonOptions& opts = {});

/// Four-point central stencil in (b1, b2), each point a fresh Newton solve
/// warm-started from the base critical path. fd_step <= 0 picks the default
/// per parameter block.
Matrix action_cross_hessian_fd(const ProblemSpec& spec, const Lattice& lat, double fd_step = 0.0,
                               const NewtonOptions& opts = {});

/// (d_qb f1)^T (W2^T U..W1)^{-1} (d_qb f2); ConjugatePointError if the chain
/// matrix is singular.
Matrix action_cross_hessian_chain(const ProblemSpec& spec, const Lattice& lat,
                                  const DiscretePath& path);

/// max |dS/db1 (finite difference) - df1/db1(q_1, b1)| at the critical point.
double b1_derivative_gap(const ProblemSpec& spec, const Lattice& lat, double fd_step = 0.0,
                         const NewtonOptions& opts = {});

/// det(cross) against prod det(-I - eps H_pq) det(f1_qb) det(f2_qb) / det A~_N.
GYReport verify_gy_discrete(const ProblemSpec& spec, const Lattice& lat,
                            CrossMethod lhs = CrossMethod::chain, const NewtonOptions& opts = {},
                            double fd_step = 0.0);

/// det(cross) against det(f1_qb) det(f2_qb) / (m^n eps^{n(N-1)} det A_N).
/// Separable systems only.
GYReport verify_gy_an(const ProblemSpec& spec, const Lattice& lat,
                      CrossMethod lhs = CrossMethod::chain, const NewtonOptions& opts = {},
                      double fd_step = 0.0);

}  // namespace gylab
