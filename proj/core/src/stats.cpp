#include "rlc/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "rlc/error.hpp"
#include "rlc/io.hpp"

namespace rlc {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Average ranks (1-based) of `values`, ascending.
Vector average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  Vector ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

// Studentized range statistic divided by sqrt(2), two-tailed Nemenyi test,
// k = 2..10 (Demsar 2006, Table 5).
constexpr double kNemenyi05[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164};
constexpr double kNemenyi10[] = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920};

}  // namespace

std::vector<std::string> ResultTable::missing_cells() const {
  std::vector<std::string> out;
  for (std::size_t m = 0; m < scores.rows(); ++m)
    for (std::size_t d = 0; d < scores.cols(); ++d)
      if (std::isnan(scores(m, d))) out.push_back(methods[m] + "/" + datasets[d]);
  return out;
}

void ResultTable::require_complete() const {
  if (scores.rows() != methods.size() || scores.cols() != datasets.size())
    throw DimensionError("result table shape disagrees with its labels");
  const auto missing = missing_cells();
  if (!missing.empty()) {
    std::string msg = "result table has missing cells:";
    for (const auto& c : missing) msg += " " + c;
    throw ConfigError(msg);
  }
  for (double v : scores.data())
    if (!std::isfinite(v)) throw ParameterError("result table contains a non-finite score");
}

ResultTable ResultTable::select(const std::vector<std::string>& method_names) const {
  ResultTable out;
  out.datasets = datasets;
  out.scores = Matrix(method_names.size(), datasets.size());
  for (std::size_t i = 0; i < method_names.size(); ++i) {
    auto it = std::find(methods.begin(), methods.end(), method_names[i]);
    if (it == methods.end()) throw ConfigError("method '" + method_names[i] + "' not in result table");
    const auto row = scores.row(static_cast<std::size_t>(it - methods.begin()));
    std::copy(row.begin(), row.end(), out.scores.row(i).begin());
    out.methods.push_back(method_names[i]);
  }
  return out;
}

ResultTable read_result_table(std::istream& in) {
  ResultTable t;
  std::vector<Vector> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (header) {
      if (cells.size() < 2) throw ParseError("result table header needs at least one dataset", line_no);
      t.datasets.assign(cells.begin() + 1, cells.end());
      header = false;
      continue;
    }
    if (cells.size() != t.datasets.size() + 1)
      throw ParseError("row has " + std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(t.datasets.size() + 1),
                       line_no);
    t.methods.push_back(cells[0]);
    Vector row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto& cell = cells[c];
      if (cell.empty() || cell == "?" || cell == "NA") {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (*end != '\0') throw ParseError("non-numeric score '" + cell + "'", line_no);
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (header) throw ParseError("empty result table", line_no);
  t.scores = Matrix(rows.size(), t.datasets.size());
  for (std::size_t m = 0; m < rows.size(); ++m)
    std::copy(rows[m].begin(), rows[m].end(), t.scores.row(m).begin());
  return t;
}

void write_result_table(std::ostream& out, const ResultTable& table) {
  out << "method";
  for (const auto& d : table.datasets) out << ',' << d;
  out << '\n';
  for (std::size_t m = 0; m < table.methods.size(); ++m) {
    out << table.methods[m];
    for (std::size_t d = 0; d < table.datasets.size(); ++d) {
      out << ',';
      if (!std::isnan(table.scores(m, d))) out << format_real(table.scores(m, d));
    }
    out << '\n';
  }
}

std::vector<std::vector<WinLoss>> wins_losses(const ResultTable& table) {
  const std::size_t k = table.methods.size();
  if (k < 2) throw ParameterError("wins/losses need at least two methods");
  std::vector<std::vector<WinLoss>> out(k, std::vector<WinLoss>(k));
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      for (std::size_t d = 0; d < table.datasets.size(); ++d) {
        const double sa = table.scores(a, d), sb = table.scores(b, d);
        if (sa < sb) ++out[a][b].wins;
        else if (sa > sb) ++out[a][b].losses;
      }
    }
  return out;
}

RankSummary rank_methods(const ResultTable& table) {
  table.require_complete();
  const std::size_t k = table.methods.size(), n = table.datasets.size();
  RankSummary s;
  s.ranks = Matrix(n, k);
  s.mean_ranks.assign(k, 0.0);
  for (std::size_t d = 0; d < n; ++d) {
    const Vector col = table.scores.column(d);
    const Vector r = average_ranks(col);
    for (std::size_t m = 0; m < k; ++m) {
      s.ranks(d, m) = r[m];
      s.mean_ranks[m] += r[m] / static_cast<double>(n);
    }
  }
  return s;
}

FriedmanResult friedman(const ResultTable& table) {
  if (table.methods.size() < 2) throw ParameterError("Friedman test needs at least two methods");
  if (table.datasets.size() < 2) throw ParameterError("Friedman test needs at least two datasets");
  return friedman_from_ranks(rank_methods(table).mean_ranks, table.datasets.size());
}

FriedmanResult friedman_from_ranks(std::span<const double> mean_ranks, std::size_t datasets) {
  const auto k = static_cast<double>(mean_ranks.size());
  const auto n = static_cast<double>(datasets);
  if (mean_ranks.size() < 2 || datasets < 2) throw ParameterError("Friedman test needs k >= 2 and N >= 2");
  FriedmanResult r;
  r.mean_ranks.assign(mean_ranks.begin(), mean_ranks.end());
  r.methods = mean_ranks.size();
  r.datasets = datasets;
  double sum_sq = 0.0;
  for (double v : mean_ranks) sum_sq += v * v;
  r.chi_square = 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
  if (r.chi_square < 0.0 && r.chi_square > -1e-12) r.chi_square = 0.0;
  r.chi_square_p = chi_square_sf(r.chi_square, k - 1.0);
  const double denom = n * (k - 1.0) - r.chi_square;
  if (denom <= 1e-12 * n * (k - 1.0)) {
    r.degenerate = true;
    r.iman_davenport_f = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
  } else {
    r.iman_davenport_f = (n - 1.0) * r.chi_square / denom;
    r.p_value = f_distribution_sf(r.iman_davenport_f, k - 1.0, (k - 1.0) * (n - 1.0));
  }
  return r;
}

double nemenyi_q(std::size_t methods, double alpha) {
  if (methods < 2 || methods > 10)
    throw ParameterError("Nemenyi critical values are tabulated for 2..10 methods, got " + std::to_string(methods));
  if (std::abs(alpha - 0.05) < 1e-12) return kNemenyi05[methods - 2];
  if (std::abs(alpha - 0.10) < 1e-12) return kNemenyi10[methods - 2];
  throw ParameterError("Nemenyi critical values are tabulated for alpha 0.05 and 0.1 only");
}

double nemenyi_cd(std::size_t methods, std::size_t datasets, double alpha) {
  if (datasets < 1) throw ParameterError("Nemenyi test needs at least one dataset");
  const auto k = static_cast<double>(methods);
  return nemenyi_q(methods, alpha) * std::sqrt(k * (k + 1.0) / (6.0 * static_cast<double>(datasets)));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("Wilcoxon: samples differ in length");
  Vector diffs;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) diffs.push_back(a[i] - b[i]);
  if (diffs.empty()) throw ParameterError("Wilcoxon: every difference is zero");

  Vector magnitudes(diffs.size());
  std::transform(diffs.begin(), diffs.end(), magnitudes.begin(), [](double d) { return std::abs(d); });
  const Vector ranks = average_ranks(magnitudes);

  WilcoxonResult r;
  r.n_used = diffs.size();
  for (std::size_t i = 0; i < diffs.size(); ++i) (diffs[i] > 0 ? r.t_plus : r.t_minus) += ranks[i];
  const double t = std::min(r.t_plus, r.t_minus);
  const std::size_t n = diffs.size();

  if (n <= kWilcoxonExactLimit) {
    // Average ranks are multiples of 1/2, so doubled ranks are integers and the
    // null distribution of 2T is a subset-sum count over sign patterns.
    std::vector<std::size_t> doubled(n);
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      doubled[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
      total += doubled[i];
    }
    std::vector<std::uint64_t> ways(total + 1, 0);
    ways[0] = 1;
    for (auto w : doubled)
      for (std::size_t s = total; s >= w; --s) {
        ways[s] += ways[s - w];
        if (s == w) break;
      }
    const auto limit = static_cast<std::size_t>(std::llround(2.0 * t));
    std::uint64_t at_most = 0;
    for (std::size_t s = 0; s <= limit && s <= total; ++s) at_most += ways[s];
    const double patterns = std::ldexp(1.0, static_cast<int>(n));
    r.p_two_sided = std::min(1.0, 2.0 * static_cast<double>(at_most) / patterns);
    r.exact = true;
    return r;
  }

  const auto nd = static_cast<double>(n);
  const double mean = nd * (nd + 1.0) / 4.0;
  double tie_term = 0.0;
  Vector sorted = magnitudes;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const auto g = static_cast<double>(j - i + 1);
    tie_term += g * g * g - g;
    i = j + 1;
  }
  const double sd = std::sqrt(nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0);
  const double z = std::max(0.0, mean - t - 0.5) / sd;
  r.p_two_sided = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  r.exact = false;
  return r;
}

double f_distribution_sf(double x, double d1, double d2) {
  if (!(d1 > 0.0 && d2 > 0.0)) throw ParameterError("F distribution needs positive degrees of freedom");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::ibeta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x));
}

double chi_square_sf(double x, double dof) {
  if (!(dof > 0.0)) throw ParameterError("chi-square needs positive degrees of freedom");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

}  // namespace rlc
