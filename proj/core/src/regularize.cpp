#include "gylab/regularize.hpp"

#include <cmath>
#include <limits>

#include "gylab/errors.hpp"
#include "gylab/parallel.hpp"

namespace gylab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::vector<Index> default_n_list(int levels) {
  if (levels < 1) throw ParameterError("default_n_list: levels must be positive");
  std::vector<Index> out;
  for (int k = 0; k < levels; ++k) out.push_back((Index{100} << k) + 1);
  return out;
}

DetResult det_prime_an(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path) {
  require_separable(spec, "det_prime_an");
  site_hessians(spec, lat, path);  // admissibility
  return det_prime_assembled(spec, lat, path);
}

DetResult det_prime_an(const ProblemSpec& spec, const Lattice& lat, const NewtonOptions& opts) {
  require_separable(spec, "det_prime_an");
  return det_prime_an(spec, lat, solve_critical_path(spec, lat, std::nullopt, opts).path);
}

std::string to_string(LimitTarget t) { return t == LimitTarget::a ? "A" : "tildeA"; }

namespace {

double neville_at_zero(const double* eps, const double* v, int count) {
  double sum = 0.0;
  for (int i = 0; i < count; ++i) {
    double w = 1.0;
    for (int j = 0; j < count; ++j) {
      if (j != i) w *= -eps[j] / (eps[i] - eps[j]);
    }
    sum += w * v[i];
  }
  return sum;
}

}  // namespace

Extrapolation richardson(const std::vector<double>& eps, const std::vector<double>& values) {
  if (eps.size() != values.size() || eps.size() < 4) {
    throw ParameterError("richardson: need at least four matching rows");
  }
  const std::size_t m = eps.size();
  Extrapolation out;
  out.limit = neville_at_zero(&eps[m - 3], &values[m - 3], 3);
  const double previous = neville_at_zero(&eps[m - 4], &values[m - 4], 3);
  out.error_bar = std::abs(out.limit - previous);
  return out;
}

ConvergenceTable lattice_limit(const ProblemSpec& spec, const std::vector<Index>& n_list,
                               LimitTarget target, std::optional<double> reference,
                               const NewtonOptions& opts) {
  spec.validate();
  if (n_list.size() < 4) throw ParameterError("lattice_limit: N_list needs at least four sizes");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 3 || n_list[i] % 2 == 0) {
      throw ParameterError("lattice_limit: N values must be odd and at least 3");
    }
    if (i > 0 && n_list[i] <= n_list[i - 1]) {
      throw ParameterError("lattice_limit: N values must increase");
    }
  }
  const bool separable = spec.hamiltonian.is_separable();
  if (target == LimitTarget::a) require_separable(spec, "lattice_limit(A)");
  const Index n = spec.dimension();

  ConvergenceTable table;
  table.target = target;
  table.reference = reference;
  table.rows = parallel_map<ConvergenceRow>(n_list.size(), [&](std::size_t i) {
    const Lattice lat(n_list[i], spec.horizon);
    const DiscretePath path = solve_critical_path(spec, lat, std::nullopt, opts).path;
    ConvergenceRow row;
    row.points = lat.points();
    row.epsilon = lat.epsilon();
    row.det_tilde_a = det_transfer_hj(spec, lat, path).det;
    row.det_prime_a = kNaN;
    row.row_identity_gap = kNaN;
    if (separable) {
      const DetResult dp = det_prime_an(spec, lat, path);
      row.det_prime_a = dp.value();
      SignedLog predicted = dp.det;
      predicted.scale_log(static_cast<double>(n) * std::log(spec.mass));
      predicted.negate_if((n * (lat.points() - 1)) % 2 != 0);
      row.row_identity_gap = relative_gap(row.det_tilde_a, predicted);
    }
    row.value = target == LimitTarget::a ? row.det_prime_a : row.det_tilde_a.value();
    row.gap_to_reference = reference ? std::abs(row.value - *reference) : kNaN;
    return row;
  });

  std::vector<double> eps;
  std::vector<double> values;
  for (const auto& r : table.rows) {
    eps.push_back(r.epsilon);
    values.push_back(r.value);
    if (!std::isnan(r.row_identity_gap)) {
      table.max_row_identity_gap = std::max(table.max_row_identity_gap, r.row_identity_gap);
    }
  }
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    double order = kNaN;
    if (k >= 2) {
      const double d0 = std::abs(values[k - 1] - values[k - 2]);
      const double d1 = std::abs(values[k] - values[k - 1]);
      const double floor = 1e-14 * std::max(1.0, std::abs(values[k]));
      if (d0 > floor && d1 > floor) order = std::log(d0 / d1) / std::log(eps[k - 1] / eps[k]);
    }
    table.rows[k].est_order = order;
  }
  table.order_estimate = table.rows.back().est_order;
  table.extrapolated = richardson(eps, values);

  for (std::size_t k = 2; k < values.size(); ++k) {
    const double d0 = std::abs(values[k - 1] - values[k - 2]);
    const double d1 = std::abs(values[k] - values[k - 1]);
    const double noise = 1e-12 * std::max(1.0, std::abs(values[k]));
    if (d1 > d0 + noise) {
      table.warnings.push_back("successive differences grow at N = " +
                               std::to_string(table.rows[k].points));
    }
  }
  if (!separable) {
    table.warnings.push_back("non-separable Hamiltonian: lattice limit reported, not asserted");
  }

  table.tautology_gap = kNaN;
  if (!separable) table.max_row_identity_gap = kNaN;
  if (separable) {
    std::vector<double> other;
    for (const auto& r : table.rows) {
      other.push_back(target == LimitTarget::a ? r.det_tilde_a.value() : r.det_prime_a);
    }
    const double other_limit = richardson(eps, other).limit;
    const double mass_n = std::pow(spec.mass, static_cast<double>(n));
    const double tilde = target == LimitTarget::a ? other_limit : table.extrapolated.limit;
    const double prime = target == LimitTarget::a ? table.extrapolated.limit : other_limit;
    table.tautology_gap = relative_gap(tilde, mass_n * prime);
  }
  return table;
}

bool RegularizationComparison::passes(double final_tol, double extrapolated_tol) const {
  return std::abs(ratio_final - 0.5) < final_tol &&
         std::abs(ratio_extrapolated - 0.5) < extrapolated_tol;
}

RegularizationComparison compare_regularizations(const ProblemSpec& spec,
                                                 const std::vector<Index>& n_list,
                                                 const NewtonOptions& opts,
                                                 const ShootOptions& shoot) {
  RegularizationComparison c;
  c.zeta = zeta_det(spec, 0.0, shoot);
  if (c.zeta.value == 0.0) throw ConjugatePointError("det_zeta A vanishes");
  c.table = lattice_limit(spec, n_list, LimitTarget::a, 0.5 * c.zeta.value, opts);
  for (const auto& r : c.table.rows) c.ratio.push_back(r.det_prime_a / c.zeta.value);
  c.ratio_final = c.ratio.back();
  c.ratio_extrapolated = c.table.extrapolated.limit / c.zeta.value;
  c.ratio_error_bar = c.table.extrapolated.error_bar / std::abs(c.zeta.value);
  return c;
}

GYReport verify_lattice_gy(const ProblemSpec& spec, const std::vector<Index>& n_list,
                           const NewtonOptions& opts, const ShootOptions& shoot) {
  if (spec.dimension() != 1) throw ScopeError("verify_lattice_gy is implemented for n = 1");
  const ConvergenceTable table = lattice_limit(spec, n_list, LimitTarget::a, std::nullopt, opts);
  const ClassicalPath path = shoot_classical_path(spec, shoot);
  const std::size_t last = path.ode.size() - 1;
  const double f1_qb = spec.f1.d_qb(path.q(0), spec.b1)(0, 0);
  const double f2_qb = spec.f2.d_qb(path.q(last), spec.b2)(0, 0);
  const double cross = continuum_cross_hessian_fd(spec, 0.0, shoot);
  if (cross == 0.0) throw DegenerateFamilyError("continuum cross-Hessian vanishes");

  GYReport r;
  r.identity = "lattice-gy";
  r.lhs = Matrix::Constant(1, 1, table.extrapolated.limit);
  r.lhs_value = table.extrapolated.limit;
  r.rhs = f1_qb * f2_qb / (spec.mass * cross);
  r.relative_gap = relative_gap(r.lhs_value, r.rhs);
  r.lhs_method = "richardson(det' A_N)";
  r.rhs_method = "f1_qb f2_qb / (m d2S/db1db2) [continuum]";
  r.points = table.rows.back().points;
  r.epsilon = table.rows.back().epsilon;
  r.odd = true;
  r.degenerate = f1_qb * f2_qb == 0.0;
  return r;
}

}  // namespace gylab
