#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

namespace gylab {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Extended precision for long recurrences whose roundoff grows like N^2.
using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// A real number held as sign * exp(log_abs). Determinants of lattice
// operators over- or underflow doubles long before they become meaningless,
// so every determinant engine accumulates in this form.
struct SignedLog {
  int sign = 1;  // -1, 0 or +1
  double log_abs = 0.0;

  static SignedLog from(double x);
  static SignedLog zero() { return {0, -INFINITY}; }

  double value() const;
  bool is_zero() const { return sign == 0; }

  SignedLog& operator*=(const SignedLog& other);
  SignedLog& operator/=(const SignedLog& other);
  SignedLog& scale_log(double delta_log) {
    log_abs += delta_log;
    return *this;
  }
  SignedLog& negate_if(bool flip) {
    if (flip) sign = -sign;
    return *this;
  }
};

SignedLog operator*(SignedLog a, const SignedLog& b);
SignedLog operator/(SignedLog a, const SignedLog& b);

/// |a - b| / max(|a|, |b|, floor), evaluated without leaving log space when
/// both operands are huge or tiny.
double relative_gap(const SignedLog& a, const SignedLog& b, double floor = 1e-300);
double relative_gap(double a, double b, double floor = 1e-300);

/// Determinant of a small dense matrix by partial-pivot LU.
SignedLog log_det(const Matrix& m);

SignedLog log_det(const LMatrix& m);

/// Smallest singular value of a small dense matrix.
double min_singular_value(const Matrix& m);

// Banded matrix with kl sub- and ku super-diagonals, factorized by Gaussian
// elimination with partial pivoting (the LAPACK gbtrf scheme). Fill-in from
// row swaps widens the upper band to ku + kl, which the storage reserves.
class BandedMatrix {
 public:
  BandedMatrix(Index size, Index kl, Index ku);

  Index size() const { return n_; }
  Index lower() const { return kl_; }
  Index upper() const { return ku_; }

  bool in_band(Index i, Index j) const { return j - i >= -kl_ && j - i <= ku_; }
  double& at(Index i, Index j) { return data_[slot(i, j)]; }
  double at(Index i, Index j) const { return data_[slot(i, j)]; }
  double max_abs() const;

  Matrix to_dense() const;

 private:
  friend class BandedLU;
  std::size_t slot(Index i, Index j) const {
    return static_cast<std::size_t>(i * width_ + (j - i + kl_));
  }

  Index n_;
  Index kl_;
  Index ku_;
  Index width_;  // kl + (ku + kl) + 1
  std::vector<double> data_;
};

class BandedLU {
 public:
  /// Pivots with |u_kk| <= singular_tol * max|a_ij| mark the matrix singular.
  explicit BandedLU(BandedMatrix a, double singular_tol = 1e-13);

  bool singular() const { return singular_; }
  Index singular_index() const { return singular_index_; }
  SignedLog log_det() const;
  Vector solve(const Vector& rhs) const;

 private:
  BandedMatrix lu_;
  std::vector<double> multipliers_;  // kl per column
  std::vector<Index> pivots_;
  bool singular_ = false;
  Index singular_index_ = -1;
};

}  // namespace gylab
