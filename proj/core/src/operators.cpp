#include "gylab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "gylab/errors.hpp"

namespace gylab {

namespace {

constexpr double kRenormHigh = 1e150;
constexpr double kRenormLow = 1e-150;

bool invertible(const Matrix& m, double rel_tol = 1e-13) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !std::isfinite(scale)) return false;
  return min_singular_value(m) > rel_tol * scale;
}

Matrix identity(Index n) { return Matrix::Identity(n, n); }

}  // namespace

BlockTridiagonal::BlockTridiagonal(Index block_size, Index count) : n_(block_size), count_(count) {
  if (block_size <= 0 || count <= 0) throw ShapeError("BlockTridiagonal: bad dimensions");
  diag.assign(static_cast<std::size_t>(count), Matrix::Zero(n_, n_));
  lower.assign(static_cast<std::size_t>(count - 1), Matrix::Zero(n_, n_));
  upper.assign(static_cast<std::size_t>(count - 1), Matrix::Zero(n_, n_));
}

Matrix BlockTridiagonal::to_dense() const {
  Matrix out = Matrix::Zero(dimension(), dimension());
  for (Index k = 0; k < count_; ++k) {
    const auto sk = static_cast<std::size_t>(k);
    out.block(k * n_, k * n_, n_, n_) = diag[sk];
    if (k + 1 < count_) {
      out.block((k + 1) * n_, k * n_, n_, n_) = lower[sk];
      out.block(k * n_, (k + 1) * n_, n_, n_) = upper[sk];
    }
  }
  return out;
}

BlockTridiagonal BlockTridiagonal::from_dense(const Matrix& dense, Index block_size) {
  if (dense.rows() != dense.cols() || dense.rows() % block_size != 0) {
    throw ShapeError("from_dense: matrix is not a square multiple of the block size");
  }
  const Index count = dense.rows() / block_size;
  BlockTridiagonal out(block_size, count);
  for (Index r = 0; r < count; ++r) {
    for (Index c = 0; c < count; ++c) {
      const Matrix blk = dense.block(r * block_size, c * block_size, block_size, block_size);
      const auto sr = static_cast<std::size_t>(r);
      const auto sc = static_cast<std::size_t>(c);
      if (r == c) {
        out.diag[sr] = blk;
      } else if (r == c + 1) {
        out.lower[sc] = blk;
      } else if (c == r + 1) {
        out.upper[sr] = blk;
      } else if (blk.cwiseAbs().maxCoeff() != 0.0) {
        throw ShapeError("from_dense: entries outside the three block diagonals");
      }
    }
  }
  return out;
}

BandedMatrix BlockTridiagonal::to_banded() const {
  const Index w = 2 * n_ - 1;
  BandedMatrix out(dimension(), w, w);
  for (Index k = 0; k < count_; ++k) {
    const auto sk = static_cast<std::size_t>(k);
    for (Index i = 0; i < n_; ++i) {
      for (Index j = 0; j < n_; ++j) {
        out.at(k * n_ + i, k * n_ + j) = diag[sk](i, j);
        if (k + 1 < count_) {
          out.at((k + 1) * n_ + i, k * n_ + j) = lower[sk](i, j);
          out.at(k * n_ + i, (k + 1) * n_ + j) = upper[sk](i, j);
        }
      }
    }
  }
  return out;
}

namespace {

// Block LU on L-valued blocks; nullopt when an interior pivot block is singular.
std::optional<SignedLog> block_lu_log_det(const std::vector<LMatrix>& diag,
                                          const std::vector<LMatrix>& lower,
                                          const std::vector<LMatrix>& upper) {
  SignedLog out;
  LMatrix lambda = diag.front();
  for (std::size_t k = 0; k < diag.size(); ++k) {
    if (!invertible(lambda.cast<double>(), 1e-14)) {
      // Last pivot block: its determinant is the remaining factor.
      if (k + 1 == diag.size()) return out * log_det(lambda);
      return std::nullopt;
    }
    out *= log_det(lambda);
    if (k + 1 < diag.size()) {
      const Eigen::PartialPivLU<LMatrix> lu(lambda);
      lambda = diag[k + 1] - lower[k] * lu.solve(upper[k]);
    }
  }
  return out;
}

}  // namespace

SignedLog BlockTridiagonal::log_det(double scale) const {
  const auto sc = static_cast<long double>(scale);
  std::vector<LMatrix> d, l, u;
  for (const auto& m : diag) d.push_back(sc * m.cast<long double>());
  for (const auto& m : lower) l.push_back(sc * m.cast<long double>());
  for (const auto& m : upper) u.push_back(sc * m.cast<long double>());
  if (auto r = block_lu_log_det(d, l, u)) return *r;
  SignedLog banded = BandedLU(to_banded()).log_det();
  if (!banded.is_zero() && scale != 1.0) {
    banded.scale_log(static_cast<double>(n_ * count_) * std::log(std::abs(scale)));
    banded.negate_if(scale < 0.0 && (n_ * count_) % 2 != 0);
  }
  return banded;
}

Matrix HJMatrix::d2_dense() const {
  Matrix out = Matrix::Zero((points - 1) * n, points * n);
  for (Index i = 0; i < points - 1; ++i) {
    const auto si = static_cast<std::size_t>(i);
    out.block(i * n, i * n, n, n) = d2_diag[si];
    out.block(i * n, (i + 1) * n, n, n) = d2_super[si];
  }
  return out;
}

Matrix HJMatrix::to_dense() const {
  const Index np = (points - 1) * n;
  Matrix out = Matrix::Zero(dimension(), dimension());
  for (Index i = 0; i < points - 1; ++i) {
    out.block(i * n, i * n, n, n) = d1[static_cast<std::size_t>(i)];
  }
  const Matrix d2 = d2_dense();
  out.block(0, np, np, points * n) = d2;
  out.block(np, 0, points * n, np) = d2.transpose();
  for (Index j = 0; j < points; ++j) {
    out.block(np + j * n, np + j * n, n, n) = d4[static_cast<std::size_t>(j)];
  }
  return out;
}

BandedMatrix HJMatrix::to_banded_interleaved() const {
  const Index w = 2 * n - 1;
  BandedMatrix out(dimension(), w, w);
  auto put = [&](Index br, Index bc, const Matrix& m) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) out.at(br * n + i, bc * n + j) += m(i, j);
    }
  };
  for (Index i = 0; i < points - 1; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const Index bp = 2 * i + 1;
    put(bp, bp, d1[si]);
    put(bp, 2 * i, d2_diag[si]);
    put(2 * i, bp, d2_diag[si].transpose());
    put(bp, 2 * i + 2, d2_super[si]);
    put(2 * i + 2, bp, d2_super[si].transpose());
  }
  for (Index j = 0; j < points; ++j) put(2 * j, 2 * j, d4[static_cast<std::size_t>(j)]);
  return out;
}

std::string to_string(DetMethod m) {
  switch (m) {
    case DetMethod::dense_lu:
      return "dense_lu";
    case DetMethod::schur_blocktri:
      return "schur_blocktri";
    case DetMethod::transfer_product:
      return "transfer_product";
    case DetMethod::tridiagonal:
      return "tridiagonal";
  }
  return "unknown";
}

std::vector<SiteHessians> site_hessians(const ProblemSpec& spec, const Lattice& lat,
                                        const DiscretePath& path) {
  check_shape(spec, lat, path);
  const double eps = lat.epsilon();
  const Index n = spec.dimension();
  std::vector<SiteHessians> out;
  out.reserve(path.p.size());
  for (std::size_t i = 0; i < path.p.size(); ++i) {
    SiteHessians s;
    s.pp = eps * spec.hamiltonian.hess_pp(path.p[i], path.q[i]);
    s.pq = eps * spec.hamiltonian.hess_pq(path.p[i], path.q[i]);
    s.qq = eps * spec.hamiltonian.hess_qq(path.p[i], path.q[i]);
    const auto site = static_cast<std::ptrdiff_t>(i);
    if (!invertible(s.pp)) {
      throw AdmissibilityError("det(d2H/dp2) vanishes at momentum site " + std::to_string(i + 1),
                               site);
    }
    if (!invertible(identity(n) + s.pq)) {
      throw AdmissibilityError(
          "det(I + d2H/dpdq) vanishes at momentum site " + std::to_string(i + 1), site);
    }
    out.push_back(std::move(s));
  }
  return out;
}

HJMatrix assemble_hj(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path) {
  const auto sites = site_hessians(spec, lat, path);
  const Index n = spec.dimension();
  const Index N = lat.points();
  HJMatrix hj;
  hj.n = n;
  hj.points = N;
  for (const auto& s : sites) {
    hj.d1.push_back(-s.pp);
    hj.d2_diag.push_back(-identity(n) - s.pq);
    hj.d2_super.push_back(identity(n));
  }
  hj.d4.assign(static_cast<std::size_t>(N), Matrix::Zero(n, n));
  for (Index j = 0; j < N - 1; ++j) {
    hj.d4[static_cast<std::size_t>(j)] = -sites[static_cast<std::size_t>(j)].qq;
  }
  hj.d4.front() += spec.f1.d_qq(path.q.front(), spec.b1);
  hj.d4.back() -= spec.f2.d_qq(path.q.back(), spec.b2);
  return hj;
}

BlockTridiagonal assemble_an(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path) {
  require_separable(spec, "assemble_an");
  check_shape(spec, lat, path);
  const Index n = spec.dimension();
  const Index N = lat.points();
  const double eps = lat.epsilon();
  const double m = spec.mass;
  const Matrix id = identity(n);
  const Vector p0 = Vector::Zero(n);

  BlockTridiagonal an(n, N);
  for (Index j = 0; j < N; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    const bool first = j == 0;
    const bool last = j == N - 1;
    Matrix d = ((first || last) ? 1.0 : 2.0) / eps * id;
    if (!last) d -= (eps / m) * spec.hamiltonian.hess_qq(p0, path.q[sj]);
    if (first) d += spec.f1.d_qq(path.q.front(), spec.b1) / m;
    if (last) d -= spec.f2.d_qq(path.q.back(), spec.b2) / m;
    an.diag[sj] = d;
    if (!last) {
      an.lower[sj] = -id / eps;
      an.upper[sj] = -id / eps;
    }
  }
  return an;
}

BlockTridiagonal schur_complement(const HJMatrix& hj) {
  const Index n = hj.n;
  const Index N = hj.points;
  BlockTridiagonal s(n, N);
  for (Index j = 0; j < N; ++j) s.diag[static_cast<std::size_t>(j)] = hj.d4[static_cast<std::size_t>(j)];
  for (Index i = 0; i < N - 1; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const Eigen::PartialPivLU<Matrix> d1_lu(hj.d1[si]);
    const Matrix& x = hj.d2_diag[si];   // couples p_i to q_i
    const Matrix& y = hj.d2_super[si];  // couples p_i to q_{i+1}
    const Matrix inv_x = d1_lu.solve(x);
    const Matrix inv_y = d1_lu.solve(y);
    s.diag[si] -= x.transpose() * inv_x;
    s.upper[si] -= x.transpose() * inv_y;
    s.lower[si] -= y.transpose() * inv_x;
    s.diag[si + 1] -= y.transpose() * inv_y;
  }
  return s;
}

DetResult det_dense(const Matrix& m) {
  DetResult r;
  r.method = DetMethod::dense_lu;
  r.det = log_det(m);
  r.singular = r.det.is_zero();
  return r;
}

DetResult det_schur_hj(const HJMatrix& hj) {
  DetResult r;
  r.method = DetMethod::schur_blocktri;
  SignedLog d1;
  for (std::size_t i = 0; i < hj.d1.size(); ++i) {
    if (!invertible(hj.d1[i])) {
      throw AdmissibilityError("D1 block is singular at momentum site " + std::to_string(i + 1),
                               static_cast<std::ptrdiff_t>(i));
    }
    d1 *= log_det(hj.d1[i]);
  }
  // The Schur blocks subtract O(1/eps) terms, so they are formed in
  // extended precision before factorization.
  const std::size_t N = static_cast<std::size_t>(hj.points);
  std::vector<LMatrix> diag, lower(N - 1), upper(N - 1);
  for (const auto& m : hj.d4) diag.push_back(m.cast<long double>());
  for (std::size_t i = 0; i + 1 < N; ++i) {
    const Eigen::PartialPivLU<LMatrix> d1_lu(hj.d1[i].cast<long double>());
    const LMatrix x = hj.d2_diag[i].cast<long double>();
    const LMatrix y = hj.d2_super[i].cast<long double>();
    const LMatrix inv_x = d1_lu.solve(x);
    const LMatrix inv_y = d1_lu.solve(y);
    diag[i] -= x.transpose() * inv_x;
    upper[i] = -x.transpose() * inv_y;
    lower[i] = -y.transpose() * inv_x;
    diag[i + 1] -= y.transpose() * inv_y;
  }
  const auto blocks = block_lu_log_det(diag, lower, upper);
  r.det = d1 * (blocks ? *blocks : schur_complement(hj).log_det());
  r.singular = r.det.is_zero();
  return r;
}

DetResult det_prime_tridiagonal(const BlockTridiagonal& an, double epsilon) {
  DetResult r;
  r.method = DetMethod::tridiagonal;
  const Index n = an.block_size();
  const Index N = an.count();
  r.eps_power_removed = static_cast<int>(n * (N - 1));
  // det(eps A_N) = eps^{nN} det A_N; one factor eps^n is divided back out.
  r.det = an.log_det(epsilon);
  if (!r.det.is_zero()) r.det.scale_log(-static_cast<double>(n) * std::log(epsilon));
  r.singular = r.det.is_zero();
  r.sign_convention = "eps^{n(N-1)} det A_N";
  return r;
}

DetResult det_prime_assembled(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path) {
  require_separable(spec, "det_prime_assembled");
  check_shape(spec, lat, path);
  using L = long double;
  const Index n = spec.dimension();
  const Index N = lat.points();
  const L eps = lat.epsilon();
  const L m = spec.mass;
  const LMatrix id = LMatrix::Identity(n, n);
  const Vector p0 = Vector::Zero(n);

  // eps A_N block by block.
  std::vector<LMatrix> d, off;
  for (Index j = 0; j < N; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    const bool first = j == 0;
    const bool last = j == N - 1;
    LMatrix b = ((first || last) ? L{1} : L{2}) * id;
    if (!last) b -= (eps * eps / m) * spec.hamiltonian.hess_qq(p0, path.q[sj]).cast<L>();
    if (first) b += (eps / m) * spec.f1.d_qq(path.q.front(), spec.b1).cast<L>();
    if (last) b -= (eps / m) * spec.f2.d_qq(path.q.back(), spec.b2).cast<L>();
    d.push_back(b);
    if (!last) off.push_back(-id);
  }
  DetResult r;
  r.method = DetMethod::tridiagonal;
  r.eps_power_removed = static_cast<int>(n * (N - 1));
  if (auto det = block_lu_log_det(d, off, off)) {
    r.det = *det;
    if (!r.det.is_zero()) r.det.scale_log(-static_cast<double>(n) * std::log(lat.epsilon()));
  } else {
    r = det_prime_tridiagonal(assemble_an(spec, lat, path), lat.epsilon());
  }
  r.singular = r.det.is_zero();
  r.sign_convention = "eps^{n(N-1)} det A_N";
  return r;
}

namespace {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <class S>
struct SiteBlocks {
  std::vector<Mat<S>> pp, pq, qq;
  std::vector<Mat<S>> k;       // I + eps H_pq
  std::vector<Mat<S>> pp_inv;  // (eps H_pp)^{-1}
  Mat<S> f1_qq;
  Mat<S> f2_qq;
};

template <class S>
SiteBlocks<S> site_blocks(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path) {
  SiteBlocks<S> s;
  const Index n = spec.dimension();
  for (const auto& h : site_hessians(spec, lat, path)) {
    s.pp.push_back(h.pp.cast<S>());
    s.pq.push_back(h.pq.cast<S>());
    s.qq.push_back(h.qq.cast<S>());
    s.k.push_back(Mat<S>::Identity(n, n) + s.pq.back());
    s.pp_inv.push_back(s.pp.back().inverse());
  }
  s.f1_qq = spec.f1.d_qq(path.q.front(), spec.b1).cast<S>();
  s.f2_qq = spec.f2.d_qq(path.q.back(), spec.b2).cast<S>();
  return s;
}

template <class S>
Mat<S> stack(const Mat<S>& top, const Mat<S>& bottom) {
  Mat<S> out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

template <class S>
Mat<S> block2(const Mat<S>& a, const Mat<S>& b, const Mat<S>& c, const Mat<S>& d) {
  Mat<S> out(a.rows() + c.rows(), a.cols() + b.cols());
  out << a, b, c, d;
  return out;
}

template <class S>
struct Transfer {
  std::vector<Mat<S>> u;
  Mat<S> w1;
  Mat<S> w2;
};

template <class S>
Transfer<S> build_transfer(const SiteBlocks<S>& s) {
  const Index n = s.f1_qq.rows();
  const std::size_t last = s.pp.size() - 1;
  const Mat<S> id = Mat<S>::Identity(n, n);
  const Mat<S> zero = Mat<S>::Zero(n, n);
  Transfer<S> f;
  for (std::size_t i = 1; i < s.pp.size(); ++i) {
    const Mat<S> kt_inv = s.k[i].transpose().inverse();
    const Mat<S> alpha = s.k[i] - s.pp[i] * kt_inv * s.qq[i] + s.pp[i] * kt_inv * s.pp_inv[i - 1];
    const Mat<S> beta = -s.pp[i] * kt_inv * s.pp_inv[i - 1] * s.k[i - 1];
    f.u.push_back(block2<S>(alpha, beta, id, zero));
  }
  const Mat<S> w1_top = s.k[0] + s.pp[0] * s.k[0].transpose().inverse() * (s.f1_qq - s.qq[0]);
  f.w1 = stack<S>(w1_top, id);
  const Mat<S> e_last = -s.f2_qq + s.pp_inv[last];
  const Mat<S> c_last = s.pp_inv[last] * s.k[last];
  f.w2 = stack<S>(e_last.transpose(), -c_last.transpose());
  return f;
}

template <class S>
struct Lemma {
  std::vector<Mat<S>> t, b, c, e;
  Mat<S> v1;
  Mat<S> v2;
};

template <class S>
Lemma<S> build_lemma(const SiteBlocks<S>& s) {
  const Index n = s.f1_qq.rows();
  const std::size_t sites = s.pp.size();
  const Mat<S> id = Mat<S>::Identity(n, n);
  const Mat<S> zero = Mat<S>::Zero(n, n);
  Lemma<S> f;
  for (std::size_t i = 0; i < sites; ++i) {
    f.b.push_back(s.k[i].transpose() * s.pp_inv[i]);
    f.c.push_back(s.pp_inv[i] * s.k[i]);
  }
  // E_1 carries (eps H_pp(1))^{-1}, matching the interior pattern and the
  // first diagonal block of the Schur complement.
  f.e.push_back(s.f1_qq - s.qq[0] + s.k[0].transpose() * s.pp_inv[0] * s.k[0]);
  for (std::size_t i = 1; i < sites; ++i) {
    f.e.push_back(-s.qq[i] + s.pp_inv[i - 1] + s.k[i].transpose() * s.pp_inv[i] * s.k[i]);
  }
  f.e.push_back(-s.f2_qq + s.pp_inv[sites - 1]);
  for (std::size_t i = 1; i < sites; ++i) {
    const Eigen::PartialPivLU<Mat<S>> b_lu(f.b[i]);
    f.t.push_back(block2<S>(-b_lu.solve(f.e[i]), -b_lu.solve(f.c[i - 1]), id, zero));
  }
  f.v1 = stack<S>(-Eigen::PartialPivLU<Mat<S>>(f.b[0]).solve(f.e[0]), id);
  f.v2 = stack<S>(-f.e[sites].transpose(), -f.c[sites - 1].transpose());
  return f;
}

// Right-to-left product of `factors` applied to `start`, renormalized.
template <class S>
Mat<S> propagate(const std::vector<Mat<S>>& factors, const Mat<S>& start, double& log_scale) {
  Mat<S> panel = start;
  log_scale = 0.0;
  for (const auto& f : factors) {
    panel = f * panel;
    const double norm = static_cast<double>(panel.norm());
    if (norm > kRenormHigh || (norm < kRenormLow && norm > 0.0)) {
      panel /= static_cast<S>(norm);
      log_scale += std::log(norm);
    }
  }
  return panel;
}

template <class S>
std::vector<Matrix> to_double(const std::vector<Mat<S>>& v) {
  std::vector<Matrix> out;
  out.reserve(v.size());
  for (const auto& m : v) out.push_back(m.template cast<double>());
  return out;
}

template <class S>
ChainProduct make_chain(const Transfer<S>& f) {
  ChainProduct c;
  const Mat<S> panel = propagate<S>(f.u, f.w1, c.log_scale);
  c.panel = panel.template cast<double>();
  c.chain = (f.w2.transpose() * panel).template cast<double>();
  c.w2_norm = static_cast<double>(f.w2.norm());
  return c;
}

}  // namespace

TransferFactors transfer_factors(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path) {
  const auto f = build_transfer(site_blocks<long double>(spec, lat, path));
  return {to_double(f.u), f.w1.cast<double>(), f.w2.cast<double>()};
}

LemmaFactors lemma_factors(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path) {
  const auto f = build_lemma(site_blocks<long double>(spec, lat, path));
  LemmaFactors out;
  out.t = to_double(f.t);
  out.v1 = f.v1.cast<double>();
  out.v2 = f.v2.cast<double>();
  out.b = to_double(f.b);
  out.c = to_double(f.c);
  out.e = to_double(f.e);
  return out;
}

ChainProduct chain_product(const TransferFactors& f) {
  Transfer<long double> t;
  for (const auto& u : f.u) t.u.push_back(u.cast<long double>());
  t.w1 = f.w1.cast<long double>();
  t.w2 = f.w2.cast<long double>();
  return make_chain(t);
}

ChainProduct chain_product(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path) {
  return make_chain(build_transfer(site_blocks<long double>(spec, lat, path)));
}

bool ChainProduct::singular(double rel_tol) const {
  const double scale = w2_norm * panel.norm();
  if (!(scale > 0.0)) return true;
  return min_singular_value(chain) <= rel_tol * scale;
}

SignedLog ChainProduct::log_det() const {
  SignedLog d = gylab::log_det(chain);
  if (!d.is_zero()) d.scale_log(static_cast<double>(chain.rows()) * log_scale);
  return d;
}

TransferDeterminant transfer_determinant(const ProblemSpec& spec, const Lattice& lat,
                                         const DiscretePath& path) {
  using L = long double;
  const SiteBlocks<L> s = site_blocks<L>(spec, lat, path);
  const Index n = spec.dimension();
  const Index N = lat.points();
  const Transfer<L> tf = build_transfer(s);
  const Lemma<L> lf = build_lemma(s);

  SignedLog minus_pp;
  SignedLog b_prod;
  for (std::size_t i = 0; i < s.pp.size(); ++i) {
    minus_pp *= log_det(Mat<L>(-s.pp[i]));
    b_prod *= log_det(lf.b[i]);
  }

  TransferDeterminant out;
  const ChainProduct chain = make_chain(tf);
  out.wu_form.method = DetMethod::transfer_product;
  out.wu_form.det = minus_pp * b_prod * chain.log_det();
  out.wu_form.singular = out.wu_form.det.is_zero();
  out.wu_form.sign_convention = "[prod det(-H_pp) det B] det(W2^T U..W1)";

  double t_scale = 0.0;
  const Mat<L> t_panel = propagate<L>(lf.t, lf.v1, t_scale);
  SignedLog core = log_det(Mat<L>(lf.v2.transpose() * t_panel));
  if (!core.is_zero()) core.scale_log(static_cast<double>(n) * t_scale);
  out.lemma_form.method = DetMethod::transfer_product;
  out.lemma_form.det = (minus_pp * core * b_prod).negate_if((N * n) % 2 != 0);
  out.lemma_form.singular = out.lemma_form.det.is_zero();
  out.lemma_form.sign_convention = "(-1)^{Nn} [prod det(-H_pp)] det(V2^T T..V1) det(B..B)";

  out.form_gap = relative_gap(out.wu_form.det, out.lemma_form.det);
  return out;
}

DetResult det_transfer_hj(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path) {
  const TransferDeterminant td = transfer_determinant(spec, lat, path);
  if (td.form_gap > 1e-10) {
    throw NumericalError("transfer determinant: W/U and T/V forms disagree (relative gap " +
                         std::to_string(td.form_gap) + ")");
  }
  return td.wu_form;
}

}  // namespace gylab
