#pragma once

#include <string>
#include <vector>

#include "gylab/discrete.hpp"
#include "gylab/linalg.hpp"
#include "gylab/model.hpp"

namespace gylab {

// Square block-tridiagonal matrix of `count` blocks, each n x n.
// lower[k] sits at block (k + 1, k), upper[k] at (k, k + 1).
class BlockTridiagonal {
 public:
  BlockTridiagonal(Index block_size, Index count);

  Index block_size() const { return n_; }
  Index count() const { return count_; }
  Index dimension() const { return n_ * count_; }

  std::vector<Matrix> diag;
  std::vector<Matrix> lower;
  std::vector<Matrix> upper;

  Matrix to_dense() const;
  /// Re-extracts the three block diagonals; throws ShapeError if the dense
  /// matrix has entries outside them.
  static BlockTridiagonal from_dense(const Matrix& dense, Index block_size);
  BandedMatrix to_banded() const;

  /// Block LU without inter-block pivoting; falls back to a banded pivoted LU
  /// when a leading block becomes singular.
  /// log det(scale * M) by block LU in extended precision.
  SignedLog log_det(double scale = 1.0) const;

 private:
  Index n_;
  Index count_;
};

// The Hamilton-Jacobi matrix in its D-block form, rows and columns ordered
// (p_1..p_{N-1}, q_1..q_N).
//   D1 = diag(-eps H_pp(i))
//   D2 = block bidiagonal: (-I - eps H_pq(i)) at (i, i), I at (i, i + 1)
//   D3 = D2^T
//   D4 = diag(f1_qq - eps H_qq(1), -eps H_qq(i), -f2_qq)
struct HJMatrix {
  Index n = 0;
  Index points = 0;
  std::vector<Matrix> d1;
  std::vector<Matrix> d2_diag;
  std::vector<Matrix> d2_super;
  std::vector<Matrix> d4;

  Index dimension() const { return (2 * points - 1) * n; }
  Matrix d2_dense() const;
  Matrix d3_dense() const { return d2_dense().transpose(); }
  Matrix to_dense() const;
  /// Interleaved (q_1, p_1, q_2, ..., p_{N-1}, q_N) banded form used by the
  /// Newton solver; kl = ku = 2n - 1.
  BandedMatrix to_banded_interleaved() const;
};

enum class DetMethod { dense_lu, schur_blocktri, transfer_product, tridiagonal };

std::string to_string(DetMethod m);

struct DetResult {
  SignedLog det;
  DetMethod method = DetMethod::dense_lu;
  int eps_power_removed = 0;
  std::string sign_convention = "none";
  bool singular = false;

  double value() const { return det.value(); }
};

/// Hessians of H_d = eps * H at each momentum site; also checks the
/// admissibility conditions.
struct SiteHessians {
  Matrix pp;
  Matrix pq;
  Matrix qq;
};
std::vector<SiteHessians> site_hessians(const ProblemSpec& spec, const Lattice& lat,
                                        const DiscretePath& path);

HJMatrix assemble_hj(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path);

/// Second-order lattice operator with epsilons reinserted; epsilon = 1
/// reproduces the unit-spacing definition. Separable Hamiltonians only.
BlockTridiagonal assemble_an(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path);

/// D4 - D3 D1^{-1} D2, assembled block by block.
BlockTridiagonal schur_complement(const HJMatrix& hj);

DetResult det_dense(const Matrix& m);
DetResult det_schur_hj(const HJMatrix& hj);
/// eps^{n(N-1)} det A_N, each pivot scaled by eps before multiplying.
DetResult det_prime_tridiagonal(const BlockTridiagonal& an, double epsilon);
/// Same quantity with eps A_N assembled directly in extended precision.
DetResult det_prime_assembled(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path);

struct TransferFactors {
  std::vector<Matrix> u;  // U_2 .. U_{N-1}, each 2n x 2n
  Matrix w1;              // 2n x n
  Matrix w2;              // 2n x n
};

struct LemmaFactors {
  std::vector<Matrix> t;  // T_2 .. T_{N-1}
  Matrix v1;
  Matrix v2;
  std::vector<Matrix> b;  // B_1 .. B_{N-1}
  std::vector<Matrix> c;  // C_1 .. C_{N-1}
  std::vector<Matrix> e;  // E_1 .. E_N
};

TransferFactors transfer_factors(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path);
LemmaFactors lemma_factors(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path);

// Factors are assembled in extended precision and rounded on return.
// W2^T U_{N-1} ... U_2 W1 as scale * matrix, with the propagated panel
// (dq_N, dq_{N-1}) kept alongside. Products run right to left on a 2n x n
// panel that is renormalized whenever its norm leaves [1e-150, 1e150].
struct ChainProduct {
  Matrix panel;        // U_{N-1} ... U_2 W1, divided by exp(log_scale)
  Matrix chain;        // W2^T * panel
  double log_scale = 0.0;
  double w2_norm = 0.0;

  /// chain is numerically singular relative to |W2| |panel|.
  bool singular(double rel_tol = 1e-12) const;
  SignedLog log_det() const;
};

ChainProduct chain_product(const TransferFactors& f);
/// Same product, assembled and propagated in extended precision.
ChainProduct chain_product(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path);

struct TransferDeterminant {
  DetResult wu_form;     // [prod det(-H_pp) det B] det(W2^T U..W1)
  DetResult lemma_form;  // (-1)^{Nn} [prod det(-H_pp)] det(V2^T T..V1) det(B..B)
  double form_gap = 0.0;
};

TransferDeterminant transfer_determinant(const ProblemSpec& spec, const Lattice& lat,
                                         const DiscretePath& path);
/// The W/U form; throws NumericalError if the two transfer forms disagree by
/// more than 1e-10 relative.
DetResult det_transfer_hj(const ProblemSpec& spec, const Lattice& lat, const DiscretePath& path);

}  // namespace gylab
