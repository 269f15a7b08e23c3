#include "gylab/gy.hpp"

#include <cmath>
#include <utility>

#include "gylab/errors.hpp"
#include "gylab/parallel.hpp"

namespace gylab {

std::string to_string(CrossMethod m) {
  return m == CrossMethod::chain ? "sensitivity_chain" : "finite_difference";
}

double default_fd_step(const Vector& b) {
  const double scale = b.size() == 0 ? 0.0 : b.cwiseAbs().maxCoeff();
  return 1e-4 * std::max(1.0, scale);
}

double critical_action(const ProblemSpec& spec, const Lattice& lat,
                       const std::optional<DiscretePath>& init, const NewtonOptions& opts) {
  const CriticalPath cp = solve_critical_path(spec, lat, init, opts);
  return discrete_action(spec, lat, cp.path);
}

Matrix action_cross_hessian_fd(const ProblemSpec& spec, const Lattice& lat, double fd_step,
                               const NewtonOptions& opts) {
  const Index n = spec.dimension();
  const double h1 = fd_step > 0.0 ? fd_step : default_fd_step(spec.b1);
  const double h2 = fd_step > 0.0 ? fd_step : default_fd_step(spec.b2);
  const DiscretePath base = solve_critical_path(spec, lat, std::nullopt, opts).path;

  // Stencil point k = ((a * n + c) * 4 + s), s encoding the sign pair.
  const std::size_t count = static_cast<std::size_t>(4 * n * n);
  const std::vector<double> values = parallel_map<double>(count, [&](std::size_t k) {
    const Index s = static_cast<Index>(k % 4);
    const Index c = static_cast<Index>(k / 4) % n;
    const Index a = static_cast<Index>(k / 4) / n;
    ProblemSpec shifted = spec;
    shifted.b1[a] += (s < 2 ? 1.0 : -1.0) * h1;
    shifted.b2[c] += (s % 2 == 0 ? 1.0 : -1.0) * h2;
    return critical_action(shifted, lat, base, opts);
  });

  Matrix out(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index c = 0; c < n; ++c) {
      const std::size_t k = static_cast<std::size_t>((a * n + c) * 4);
      out(a, c) = (values[k] - values[k + 1] - values[k + 2] + values[k + 3]) / (4.0 * h1 * h2);
    }
  }
  return out;
}

Matrix action_cross_hessian_chain(const ProblemSpec& spec, const Lattice& lat,
                                  const DiscretePath& path) {
  const ChainProduct chain = chain_product(spec, lat, path);
  if (chain.singular()) {
    throw ConjugatePointError("sensitivity chain W2^T U..W1 is singular (conjugate point)");
  }
  const Matrix f1_qb = spec.f1.d_qb(path.q.front(), spec.b1);
  const Matrix f2_qb = spec.f2.d_qb(path.q.back(), spec.b2);
  // chain = exp(log_scale) * chain.chain
  const Matrix dq1_db2 = std::exp(-chain.log_scale) * chain.chain.partialPivLu().solve(f2_qb);
  return f1_qb.transpose() * dq1_db2;
}

double b1_derivative_gap(const ProblemSpec& spec, const Lattice& lat, double fd_step,
                         const NewtonOptions& opts) {
  const Index n = spec.dimension();
  const double h = fd_step > 0.0 ? fd_step : default_fd_step(spec.b1);
  const DiscretePath base = solve_critical_path(spec, lat, std::nullopt, opts).path;
  const Vector exact = spec.f1.d_b(base.q.front(), spec.b1);
  const std::vector<double> values =
      parallel_map<double>(static_cast<std::size_t>(2 * n), [&](std::size_t k) {
        ProblemSpec shifted = spec;
        shifted.b1[static_cast<Index>(k / 2)] += (k % 2 == 0 ? 1.0 : -1.0) * h;
        return critical_action(shifted, lat, base, opts);
      });
  double gap = 0.0;
  for (Index a = 0; a < n; ++a) {
    const std::size_t k = static_cast<std::size_t>(2 * a);
    const double fd = (values[k] - values[k + 1]) / (2.0 * h);
    gap = std::max(gap, std::abs(fd - exact[a]));
  }
  return gap;
}

namespace {

struct CrossSide {
  Matrix cross;
  SignedLog f_dets;  // det(f1_qb) det(f2_qb)
  bool degenerate = false;
};

CrossSide cross_side(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path,
                     CrossMethod method, const NewtonOptions& opts, double fd_step) {
  CrossSide s;
  s.f_dets = log_det(spec.f1.d_qb(path.q.front(), spec.b1)) *
             log_det(spec.f2.d_qb(path.q.back(), spec.b2));
  s.degenerate = s.f_dets.is_zero();
  s.cross = method == CrossMethod::chain ? action_cross_hessian_chain(spec, lat, path)
                                         : action_cross_hessian_fd(spec, lat, fd_step, opts);
  return s;
}

void fill_common(GYReport& r, const Lattice& lat, Index n) {
  r.points = lat.points();
  r.epsilon = lat.epsilon();
  r.odd = lat.points() % 2 == 1;
  r.parity_factor = (n * (lat.points() - 1)) % 2 == 0 ? 1.0 : -1.0;
}

}  // namespace

GYReport verify_gy_discrete(const ProblemSpec& spec, const Lattice& lat, CrossMethod lhs,
                            const NewtonOptions& opts, double fd_step) {
  spec.validate();
  const Index n = spec.dimension();
  const DiscretePath path = solve_critical_path(spec, lat, std::nullopt, opts).path;

  const DetResult det_a = det_transfer_hj(spec, lat, path);
  if (det_a.singular) throw ConjugatePointError("det A~_N vanishes (conjugate point)");
  const CrossSide side = cross_side(spec, lat, path, lhs, opts, fd_step);

  SignedLog mixed;
  for (const auto& h : site_hessians(spec, lat, path)) {
    mixed *= log_det(Matrix(-Matrix::Identity(n, n) - h.pq));
  }

  GYReport r;
  r.identity = "gy-discrete";
  fill_common(r, lat, n);
  r.lhs = side.cross;
  r.lhs_value = log_det(side.cross).value();
  r.rhs = (mixed * side.f_dets / det_a.det).value();
  r.relative_gap = relative_gap(r.lhs_value, r.rhs);
  r.lhs_method = to_string(lhs);
  r.rhs_method = "prod det(-I - eps H_pq) det(f1_qb) det(f2_qb) / det A~_N [" +
                 to_string(det_a.method) + "]";
  r.degenerate = side.degenerate;
  if (spec.hamiltonian.is_separable()) {
    r.rhs_literal = (side.f_dets / det_a.det).value();
    r.literal_gap = relative_gap(r.lhs_value, *r.rhs_literal);
  }
  return r;
}

GYReport verify_gy_an(const ProblemSpec& spec, const Lattice& lat, CrossMethod lhs,
                      const NewtonOptions& opts, double fd_step) {
  spec.validate();
  require_separable(spec, "verify_gy_an");
  const Index n = spec.dimension();
  const DiscretePath path = solve_critical_path(spec, lat, std::nullopt, opts).path;

  const DetResult det_prime = det_prime_assembled(spec, lat, path);
  if (det_prime.singular) throw ConjugatePointError("A_N is singular (zero mode)");
  const CrossSide side = cross_side(spec, lat, path, lhs, opts, fd_step);

  SignedLog mass_power = SignedLog::from(spec.mass);
  mass_power.log_abs *= static_cast<double>(n);

  GYReport r;
  r.identity = "gy-an";
  fill_common(r, lat, n);
  r.lhs = side.cross;
  r.lhs_value = log_det(side.cross).value();
  r.rhs = (side.f_dets / (mass_power * det_prime.det)).value();
  r.relative_gap = relative_gap(r.lhs_value, r.rhs);
  r.lhs_method = to_string(lhs);
  r.rhs_method = "det(f1_qb) det(f2_qb) / (m^n eps^{n(N-1)} det A_N) [tridiagonal]";
  r.degenerate = side.degenerate;
  r.rhs_literal = r.rhs;
  r.literal_gap = r.relative_gap;
  return r;
}

}  // namespace gylab
