#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gylab/continuum.hpp"
#include "gylab/discrete.hpp"
#include "gylab/gy.hpp"
#include "gylab/model.hpp"
#include "gylab/operators.hpp"

namespace gylab {

/// Odd sweep sizes N = 100 * 2^k + 1, k = 0..levels-1 (101 .. 6401 by default).
std::vector<Index> default_n_list(int levels = 7);

/// eps^{n(N-1)} det A_N at the discrete critical path. Separable systems only.
DetResult det_prime_an(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path);
DetResult det_prime_an(const ProblemSpec& spec, const Lattice& lat, const NewtonOptions& opts = {});

enum class LimitTarget { a, tilde_a };
std::string to_string(LimitTarget t);

struct ConvergenceRow {
  Index points = 0;
  double epsilon = 0.0;
  SignedLog det_tilde_a;           // transfer engine
  double det_prime_a = 0.0;        // NaN for non-separable systems
  double row_identity_gap = 0.0;   // det A~_N vs (-1)^{n(N-1)} m^n det' A_N; NaN if n/a
  double value = 0.0;              // the swept quantity for the chosen target
  double gap_to_reference = 0.0;   // NaN without a reference
  double est_order = 0.0;          // from successive differences; NaN when undefined
};

struct Extrapolation {
  double limit = 0.0;
  double error_bar = 0.0;
};

/// Polynomial elimination of the eps and eps^2 error terms from the last
/// three rows; the error bar is the change against the previous triple.
Extrapolation richardson(const std::vector<double>& eps, const std::vector<double>& values);

struct ConvergenceTable {
  LimitTarget target = LimitTarget::a;
  std::vector<ConvergenceRow> rows;
  Extrapolation extrapolated;
  double order_estimate = 0.0;  // NaN when the sweep is exact
  std::optional<double> reference;
  double max_row_identity_gap = 0.0;
  /// det_reg A~ against m^n det_reg A, both extrapolated; NaN if n/a.
  double tautology_gap = 0.0;
  std::vector<std::string> warnings;
};

/// N-sweep of det A~_N (transfer engine) and eps^{n(N-1)} det A_N, rows
/// computed concurrently and ordered by N. N_list must hold at least four
/// odd, increasing sizes.
ConvergenceTable lattice_limit(const ProblemSpec& spec, const std::vector<Index>& n_list,
                               LimitTarget target, std::optional<double> reference = std::nullopt,
                               const NewtonOptions& opts = {});

struct RegularizationComparison {
  ConvergenceTable table;
  ZetaResult zeta;
  std::vector<double> ratio;  // det' A_N / det_zeta A per row
  double ratio_final = 0.0;
  double ratio_extrapolated = 0.0;
  double ratio_error_bar = 0.0;

  bool passes(double final_tol = 1e-3, double extrapolated_tol = 1e-4) const;
};

/// det_reg A against det_zeta A / 2 (scalar separable systems).
RegularizationComparison compare_regularizations(const ProblemSpec& spec,
                                                 const std::vector<Index>& n_list,
                                                 const NewtonOptions& opts = {},
                                                 const ShootOptions& shoot = {});

/// det_reg A against f1_qb f2_qb / (m d2S/db1db2) with the continuum
/// cross-Hessian.
GYReport verify_lattice_gy(const ProblemSpec& spec, const std::vector<Index>& n_list,
                           const NewtonOptions& opts = {}, const ShootOptions& shoot = {});

}  // namespace gylab
