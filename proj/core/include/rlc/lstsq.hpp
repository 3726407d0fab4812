#pragma once

#include <span>

#include "rlc/matrix.hpp"

namespace rlc {

/// Householder QR of a tall matrix A (rows >= cols), factored once and
/// reused for many right-hand sides. Solves min ||A x - b||_2.
class LeastSquaresSolver {
 public:
  /// Throws RankDeficientError when some |R_jj| < rank_tolerance * max |R_ii|.
  explicit LeastSquaresSolver(const Matrix& A, double rank_tolerance = 1e-10);

  Vector solve(std::span<const double> b) const;

  std::size_t rows() const { return qr_.rows(); }
  std::size_t cols() const { return qr_.cols(); }
  /// Diagonal of R, sign included.
  Vector r_diagonal() const;

 private:
  Matrix qr_;         // R on and above the diagonal, reflector tails below
  Vector tau_;
};

}  // namespace rlc
