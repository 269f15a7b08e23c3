#include "gylab/linalg.hpp"

#include <algorithm>
#include <limits>
#include <utility>

#include "gylab/errors.hpp"

namespace gylab {

SignedLog SignedLog::from(double x) {
  if (x == 0.0) return zero();
  return {x > 0.0 ? 1 : -1, std::log(std::abs(x))};
}

double SignedLog::value() const {
  if (sign == 0) return 0.0;
  return sign * std::exp(log_abs);
}

SignedLog& SignedLog::operator*=(const SignedLog& other) {
  if (sign == 0 || other.sign == 0) {
    *this = zero();
    return *this;
  }
  sign *= other.sign;
  log_abs += other.log_abs;
  return *this;
}

SignedLog& SignedLog::operator/=(const SignedLog& other) {
  if (other.sign == 0) {
    sign = sign == 0 ? 0 : sign;
    log_abs = INFINITY;
    return *this;
  }
  if (sign == 0) return *this;
  sign *= other.sign;
  log_abs -= other.log_abs;
  return *this;
}

SignedLog operator*(SignedLog a, const SignedLog& b) { return a *= b; }
SignedLog operator/(SignedLog a, const SignedLog& b) { return a /= b; }

double relative_gap(const SignedLog& a, const SignedLog& b, double floor) {
  if (a.sign == 0 && b.sign == 0) return 0.0;
  if (a.sign == 0 || b.sign == 0) {
    const double other = a.sign == 0 ? b.log_abs : a.log_abs;
    return std::exp(other) / std::max(std::exp(other), floor);
  }
  const double top = std::max(a.log_abs, b.log_abs);
  if (top < std::log(floor)) {
    return std::abs(a.value() - b.value()) / floor;
  }
  // Both scaled by exp(-top) so the larger lands at magnitude one.
  const double sa = a.sign * std::exp(a.log_abs - top);
  const double sb = b.sign * std::exp(b.log_abs - top);
  return std::abs(sa - sb);
}

double relative_gap(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

SignedLog log_det(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("log_det: matrix is not square");
  if (m.rows() == 0) return {};
  Eigen::PartialPivLU<Matrix> lu(m);
  const Matrix& packed = lu.matrixLU();
  SignedLog out;
  out.sign = static_cast<int>(lu.permutationP().determinant());
  for (Index k = 0; k < packed.rows(); ++k) {
    out *= SignedLog::from(packed(k, k));
  }
  return out;
}

SignedLog log_det(const LMatrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("log_det: matrix is not square");
  if (m.rows() == 0) return {};
  Eigen::PartialPivLU<LMatrix> lu(m);
  const LMatrix& packed = lu.matrixLU();
  SignedLog out;
  out.sign = static_cast<int>(lu.permutationP().determinant());
  for (Index k = 0; k < packed.rows(); ++k) {
    const long double d = packed(k, k);
    if (d == 0.0L) return SignedLog::zero();
    out.sign *= d > 0.0L ? 1 : -1;
    out.log_abs += static_cast<double>(std::log(std::abs(d)));
  }
  return out;
}

double min_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().minCoeff();
}

BandedMatrix::BandedMatrix(Index size, Index kl, Index ku)
    : n_(size), kl_(kl), ku_(ku), width_(2 * kl + ku + 1) {
  if (size <= 0 || kl < 0 || ku < 0) throw ShapeError("BandedMatrix: bad dimensions");
  data_.assign(static_cast<std::size_t>(n_ * width_), 0.0);
}

double BandedMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Matrix BandedMatrix::to_dense() const {
  Matrix out = Matrix::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i) {
    for (Index j = std::max<Index>(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) {
      out(i, j) = at(i, j);
    }
  }
  return out;
}

BandedLU::BandedLU(BandedMatrix a, double singular_tol) : lu_(std::move(a)) {
  const Index n = lu_.n_;
  const Index kl = lu_.kl_;
  const Index ku_fill = lu_.ku_ + kl;
  const double threshold = singular_tol * lu_.max_abs();
  multipliers_.assign(static_cast<std::size_t>(n * std::max<Index>(kl, 1)), 0.0);
  pivots_.assign(static_cast<std::size_t>(n), 0);

  for (Index k = 0; k < n; ++k) {
    const Index last_row = std::min(n - 1, k + kl);
    Index piv = k;
    double best = std::abs(lu_.at(k, k));
    for (Index r = k + 1; r <= last_row; ++r) {
      const double v = std::abs(lu_.at(r, k));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    pivots_[static_cast<std::size_t>(k)] = piv;
    const Index last_col = std::min(n - 1, k + ku_fill);
    if (piv != k) {
      for (Index j = k; j <= last_col; ++j) std::swap(lu_.at(k, j), lu_.at(piv, j));
    }
    const double pivot = lu_.at(k, k);
    if (std::abs(pivot) <= threshold || !std::isfinite(pivot)) {
      if (!singular_) {
        singular_ = true;
        singular_index_ = k;
      }
      continue;
    }
    for (Index r = k + 1; r <= last_row; ++r) {
      const double l = lu_.at(r, k) / pivot;
      multipliers_[static_cast<std::size_t>(k * kl + (r - k - 1))] = l;
      lu_.at(r, k) = 0.0;
      if (l == 0.0) continue;
      for (Index j = k + 1; j <= last_col; ++j) lu_.at(r, j) -= l * lu_.at(k, j);
    }
  }
}

SignedLog BandedLU::log_det() const {
  if (singular_) return SignedLog::zero();
  SignedLog out;
  for (Index k = 0; k < lu_.n_; ++k) {
    out *= SignedLog::from(lu_.at(k, k));
    if (pivots_[static_cast<std::size_t>(k)] != k) out.sign = -out.sign;
  }
  return out;
}

Vector BandedLU::solve(const Vector& rhs) const {
  if (singular_) throw NumericalError("BandedLU::solve: matrix is singular");
  const Index n = lu_.n_;
  const Index kl = lu_.kl_;
  const Index ku_fill = lu_.ku_ + kl;
  if (rhs.size() != n) throw ShapeError("BandedLU::solve: size mismatch");
  Vector x = rhs;
  for (Index k = 0; k < n; ++k) {
    const Index piv = pivots_[static_cast<std::size_t>(k)];
    if (piv != k) std::swap(x[k], x[piv]);
    const Index last_row = std::min(n - 1, k + kl);
    for (Index r = k + 1; r <= last_row; ++r) {
      x[r] -= multipliers_[static_cast<std::size_t>(k * kl + (r - k - 1))] * x[k];
    }
  }
  for (Index k = n - 1; k >= 0; --k) {
    double s = x[k];
    const Index last_col = std::min(n - 1, k + ku_fill);
    for (Index j = k + 1; j <= last_col; ++j) s -= lu_.at(k, j) * x[j];
    x[k] = s / lu_.at(k, k);
  }
  return x;
}

}  // namespace gylab
