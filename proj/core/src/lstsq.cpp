#include "rlc/lstsq.hpp"

#include <cmath>

#include "rlc/error.hpp"

namespace rlc {

LeastSquaresSolver::LeastSquaresSolver(const Matrix& A, double rank_tolerance)
    : qr_(A), tau_(A.cols(), 0.0) {
  const std::size_t m = qr_.rows();
  const std::size_t n = qr_.cols();
  if (n == 0) throw DimensionError("least squares: matrix has no columns");
  if (m < n)
    throw RankDeficientError("least squares: " + std::to_string(m) + "x" + std::to_string(n) +
                             " system is underdetermined");

  for (std::size_t j = 0; j < n; ++j) {
    double norm = 0.0;
    for (std::size_t i = j; i < m; ++i) norm = std::hypot(norm, qr_(i, j));
    if (norm == 0.0) continue;  // zero column; caught by the rank check below
    const double alpha = qr_(j, j);
    const double beta = alpha > 0.0 ? -norm : norm;
    const double scale = 1.0 / (alpha - beta);
    for (std::size_t i = j + 1; i < m; ++i) qr_(i, j) *= scale;
    tau_[j] = (beta - alpha) / beta;
    qr_(j, j) = beta;

    // Apply H_j = I - tau v v^T (v_0 = 1) to the trailing columns.
    for (std::size_t c = j + 1; c < n; ++c) {
      double w = qr_(j, c);
      for (std::size_t i = j + 1; i < m; ++i) w += qr_(i, j) * qr_(i, c);
      w *= tau_[j];
      qr_(j, c) -= w;
      for (std::size_t i = j + 1; i < m; ++i) qr_(i, c) -= w * qr_(i, j);
    }
  }

  double largest = 0.0;
  for (std::size_t j = 0; j < n; ++j) largest = std::max(largest, std::abs(qr_(j, j)));
  for (std::size_t j = 0; j < n; ++j)
    if (largest == 0.0 || std::abs(qr_(j, j)) < rank_tolerance * largest)
      throw RankDeficientError("least squares: matrix is numerically rank deficient (column " +
                               std::to_string(j) + ")");
}

Vector LeastSquaresSolver::solve(std::span<const double> b) const {
  const std::size_t m = qr_.rows();
  const std::size_t n = qr_.cols();
  if (b.size() != m) throw DimensionError("least squares: right-hand side length mismatch");
  Vector y(b.begin(), b.end());
  for (std::size_t j = 0; j < n; ++j) {
    if (tau_[j] == 0.0) continue;
    double w = y[j];
    for (std::size_t i = j + 1; i < m; ++i) w += qr_(i, j) * y[i];
    w *= tau_[j];
    y[j] -= w;
    for (std::size_t i = j + 1; i < m; ++i) y[i] -= w * qr_(i, j);
  }
  Vector x(n);
  for (std::size_t jj = n; jj-- > 0;) {
    double s = y[jj];
    for (std::size_t c = jj + 1; c < n; ++c) s -= qr_(jj, c) * x[c];
    x[jj] = s / qr_(jj, jj);
  }
  return x;
}

Vector LeastSquaresSolver::r_diagonal() const {
  Vector d(qr_.cols());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = qr_(j, j);
  return d;
}

}  // namespace rlc
