#include "rlc/coding.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "rlc/error.hpp"
#include "rlc/random.hpp"

namespace rlc {

CoefficientMatrix::CoefficientMatrix(Matrix C, std::size_t k, std::uint64_t seed)
    : C_(std::move(C)), k_(k), seed_(seed) {
  for (std::size_t c = 0; c < C_.cols(); ++c) {
    std::size_t nonzero = 0;
    for (std::size_t t = 0; t < C_.rows(); ++t) {
      const double v = C_(t, c);
      if (v == 0.0) continue;
      if (!(v > 0.0 && v <= 1.0))
        throw ParameterError("coefficient outside (0, 1] in column " + std::to_string(c));
      ++nonzero;
    }
    if (nonzero != k_)
      throw ParameterError("column " + std::to_string(c) + " has " + std::to_string(nonzero) +
                           " non-zero coefficients, expected " + std::to_string(k_));
  }
}

std::vector<std::size_t> CoefficientMatrix::participation() const {
  std::vector<std::size_t> counts(C_.rows(), 0);
  for (std::size_t t = 0; t < C_.rows(); ++t)
    for (std::size_t c = 0; c < C_.cols(); ++c)
      if (C_(t, c) != 0.0) ++counts[t];
  return counts;
}

CoefficientMatrix CoefficientMatrix::prefix(std::size_t r) const {
  if (r > combinations()) throw ParameterError("prefix longer than the coefficient matrix");
  CoefficientMatrix out;
  out.C_ = C_.leading_columns(r);
  out.k_ = k_;
  out.seed_ = seed_;
  return out;
}

CoefficientMatrix build_coefficient_matrix(std::size_t q, std::size_t r, std::size_t k,
                                           std::uint64_t seed) {
  if (k < 2) throw ParameterError("combination size k must be at least 2");
  if (k > q) throw ParameterError("combination size k=" + std::to_string(k) + " exceeds q=" + std::to_string(q));
  if (r < q) throw ParameterError("r=" + std::to_string(r) + " combinations cannot cover q=" + std::to_string(q) + " targets");

  Matrix C(q, r, 0.0);
  std::vector<std::size_t> counts(q, 0);
  std::vector<std::size_t> order(q);
  std::vector<std::size_t> chosen;
  for (std::size_t col = 0; col < r; ++col) {
    Rng rng(derive_seed(seed, col));
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return counts[a] < counts[b]; });
    chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(chosen.begin(), chosen.end());
    for (auto t : chosen) {
      C(t, col) = rng.uniform_open_closed();
      ++counts[t];
    }
  }
  return CoefficientMatrix(std::move(C), k, seed);
}

Matrix encode(const Matrix& Y_norm, const Matrix& C) {
  if (Y_norm.cols() != C.rows())
    throw DimensionError("encode: targets have " + std::to_string(Y_norm.cols()) +
                         " columns but the coefficient matrix has " + std::to_string(C.rows()) + " rows");
  return multiply(Y_norm, C);
}

Matrix encode(const Matrix& Y_norm, const CoefficientMatrix& C) { return encode(Y_norm, C.matrix()); }

Decoder::Decoder(const Matrix& C) try : solver_(C.transpose()) {
} catch (const RankDeficientError& e) {
  throw RankDeficientError(std::string("coefficient matrix C^T: ") + e.what());
}

Vector Decoder::decode(std::span<const double> z) const {
  if (z.size() != combinations())
    throw DimensionError("decode: expected " + std::to_string(combinations()) + " model outputs, got " +
                         std::to_string(z.size()));
  return solver_.solve(z);
}

Vector decode(const Matrix& C, std::span<const double> z) { return Decoder(C).decode(z); }

void write_coefficients_csv(std::ostream& out, const Matrix& C) {
  char buf[40];
  for (std::size_t t = 0; t < C.rows(); ++t) {
    for (std::size_t c = 0; c < C.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", C(t, c));
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

Matrix read_coefficients_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || std::string_view(end).find_first_not_of(" \t\r") != std::string_view::npos)
        throw ParseError("bad coefficient '" + cell + "'", line_no);
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("coefficient row length differs from the first row", line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty coefficient matrix", line_no);
  Matrix C(rows.size(), rows.front().size());
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t c = 0; c < rows[t].size(); ++c) C(t, c) = rows[t][c];
  return C;
}

}  // namespace rlc
