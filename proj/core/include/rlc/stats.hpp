#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rlc/matrix.hpp"

namespace rlc {

/// Scores of several methods over several datasets; lower is better.
struct ResultTable {
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  Matrix scores;  // methods x datasets, NaN marks a missing cell

  /// "method/dataset" for every NaN cell.
  std::vector<std::string> missing_cells() const;
  /// Throws ConfigError naming the missing cells, ParameterError on non-finite scores.
  void require_complete() const;
  /// The rows of the named methods, in the given order.
  ResultTable select(const std::vector<std::string>& method_names) const;
};

/// CSV: header "method,<dataset>,...", then one row per method. Empty, "?" or
/// "NA" cells are missing.
ResultTable read_result_table(std::istream& in);
void write_result_table(std::ostream& out, const ResultTable& table);

struct WinLoss {
  std::size_t wins = 0;
  std::size_t losses = 0;
  friend bool operator==(const WinLoss&, const WinLoss&) = default;
};

/// result[a][b]: datasets where method a scores strictly lower / higher than b.
std::vector<std::vector<WinLoss>> wins_losses(const ResultTable& table);

struct RankSummary {
  Matrix ranks;      // datasets x methods, ties get the average rank
  Vector mean_ranks;
};

RankSummary rank_methods(const ResultTable& table);

struct FriedmanResult {
  Vector mean_ranks;
  std::size_t methods = 0;
  std::size_t datasets = 0;
  double chi_square = 0.0;
  double chi_square_p = 1.0;     // chi-square with k-1 dof
  double iman_davenport_f = 0.0;
  double p_value = 1.0;          // F with (k-1, (k-1)(N-1)) dof
  bool degenerate = false;       // chi_square == N(k-1): F undefined, p reported as 0
};

FriedmanResult friedman(const ResultTable& table);
FriedmanResult friedman_from_ranks(std::span<const double> mean_ranks, std::size_t datasets);

/// Two-tailed Nemenyi critical value q_alpha for k = 2..10, alpha in {0.05, 0.10}.
double nemenyi_q(std::size_t methods, double alpha);
/// q_alpha * sqrt(k (k + 1) / (6 N)).
double nemenyi_cd(std::size_t methods, std::size_t datasets, double alpha);

struct WilcoxonResult {
  double t_minus = 0.0;  // rank sum of negative differences a - b
  double t_plus = 0.0;
  double p_two_sided = 1.0;
  std::size_t n_used = 0;  // non-zero differences
  bool exact = true;
};

/// Zero differences are dropped; tied magnitudes get average ranks. Exact
/// enumeration of sign patterns for n_used <= 20, otherwise a normal
/// approximation with tie and continuity corrections.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kWilcoxonExactLimit = 20;

/// Upper tail P(F > x) of the F(d1, d2) distribution.
double f_distribution_sf(double x, double d1, double d2);
/// Upper tail P(X > x) of the chi-square distribution with `dof` degrees of freedom.
double chi_square_sf(double x, double dof);

}  // namespace rlc
