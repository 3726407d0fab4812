#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "rlc/lstsq.hpp"
#include "rlc/matrix.hpp"

namespace rlc {

/// q x r matrix whose columns are the random linear target combinations.
/// Each column has exactly k non-zero coefficients in (0, 1].
class CoefficientMatrix {
 public:
  CoefficientMatrix() = default;
  /// Wraps an existing matrix (e.g. loaded from CSV) after checking it is
  /// k-sparse per column with coefficients in (0, 1].
  CoefficientMatrix(Matrix C, std::size_t k, std::uint64_t seed);

  const Matrix& matrix() const { return C_; }
  std::size_t targets() const { return C_.rows(); }
  std::size_t combinations() const { return C_.cols(); }
  std::size_t k() const { return k_; }
  std::uint64_t seed() const { return seed_; }

  /// Number of combinations each target takes part in.
  std::vector<std::size_t> participation() const;
  /// The first `r` columns.
  CoefficientMatrix prefix(std::size_t r) const;

  friend bool operator==(const CoefficientMatrix&, const CoefficientMatrix&) = default;

 private:
  Matrix C_;
  std::size_t k_ = 0;
  std::uint64_t seed_ = 0;
};

/// Column j draws from its own stream derive_seed(seed, j): the k targets with
/// the lowest participation so far are chosen (ties broken at random) and each
/// gets a uniform coefficient in (0, 1]. Requires 2 <= k <= q <= r.
CoefficientMatrix build_coefficient_matrix(std::size_t q, std::size_t r, std::size_t k,
                                           std::uint64_t seed);

/// Z = Y_norm * C.
Matrix encode(const Matrix& Y_norm, const Matrix& C);
Matrix encode(const Matrix& Y_norm, const CoefficientMatrix& C);

/// Least-squares solution of C^T y = z, with C^T factored once.
class Decoder {
 public:
  explicit Decoder(const Matrix& C);
  Vector decode(std::span<const double> z) const;
  std::size_t targets() const { return solver_.cols(); }
  std::size_t combinations() const { return solver_.rows(); }

 private:
  LeastSquaresSolver solver_;
};

/// One-shot decode; throws RankDeficientError when C^T lacks full column rank.
Vector decode(const Matrix& C, std::span<const double> z);

/// CSV with q rows and r columns, no header; reals round-trip exactly.
void write_coefficients_csv(std::ostream& out, const Matrix& C);
Matrix read_coefficients_csv(std::istream& in);

}  // namespace rlc
