#include "rlc/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>

#include "rlc/error.hpp"
#include "rlc/random.hpp"

namespace rlc {
namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool starts_with_keyword(std::string_view line, std::string_view keyword) {
  if (line.size() < keyword.size()) return false;
  if (lower(line.substr(0, keyword.size())) != keyword) return false;
  return line.size() == keyword.size() || std::isspace(static_cast<unsigned char>(line[keyword.size()]));
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front())
    return std::string(s.substr(1, s.size() - 2));
  return std::string(s);
}

// Splits an @attribute line body into (name, type).
std::pair<std::string, std::string> split_attribute(std::string_view body, std::size_t line_no) {
  body = trim(body);
  if (body.empty()) throw ParseError("@attribute without a name", line_no);
  std::size_t end;
  if (body.front() == '\'' || body.front() == '"') {
    end = body.find(body.front(), 1);
    if (end == std::string_view::npos) throw ParseError("unterminated quoted attribute name", line_no);
    ++end;
  } else {
    end = body.find_first_of(" \t");
    if (end == std::string_view::npos) throw ParseError("@attribute without a type", line_no);
  }
  auto name = unquote(body.substr(0, end));
  auto type = std::string(trim(body.substr(end)));
  if (type.empty()) throw ParseError("@attribute '" + name + "' without a type", line_no);
  return {name, type};
}

double parse_cell(std::string_view cell, std::size_t line_no) {
  cell = trim(cell);
  if (cell == "?") return kMissing;
  if (cell.size() >= 2 && (cell.front() == '\'' || cell.front() == '"') && cell.back() == cell.front())
    cell = cell.substr(1, cell.size() - 2);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto* begin = cell.data();
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end)
    throw ParseError("non-numeric value '" + std::string(cell) + "'", line_no);
  return value;
}

std::vector<double> parse_row(std::string_view line, std::size_t expected, std::size_t line_no) {
  std::vector<double> row;
  row.reserve(expected);
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    row.push_back(parse_cell(line.substr(start, comma - start), line_no));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (row.size() != expected)
    throw ParseError("data row has " + std::to_string(row.size()) + " fields, expected " +
                         std::to_string(expected),
                     line_no);
  return row;
}

Dataset assemble(const std::vector<std::string>& names, const std::vector<std::vector<double>>& rows,
                 const TargetSpec& spec) {
  const std::size_t total = names.size();
  std::vector<std::size_t> target_cols;
  if (!spec.names.empty()) {
    for (const auto& name : spec.names) {
      auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw ConfigError("target attribute '" + name + "' not found");
      const auto col = static_cast<std::size_t>(it - names.begin());
      if (std::find(target_cols.begin(), target_cols.end(), col) != target_cols.end())
        throw ConfigError("target attribute '" + name + "' listed twice");
      target_cols.push_back(col);
    }
  } else if (spec.count) {
    if (*spec.count == 0) throw ConfigError("target count must be at least 1");
    if (*spec.count >= total)
      throw ConfigError("target count " + std::to_string(*spec.count) + " leaves no input among " +
                        std::to_string(total) + " attributes");
    for (std::size_t c = total - *spec.count; c < total; ++c) target_cols.push_back(c);
  } else {
    throw ConfigError("neither a target count nor target names were given");
  }
  if (target_cols.size() >= total) throw ConfigError("every attribute is a target; no inputs left");

  std::vector<bool> is_target(total, false);
  for (auto c : target_cols) is_target[c] = true;
  std::vector<std::size_t> input_cols;
  for (std::size_t c = 0; c < total; ++c)
    if (!is_target[c]) input_cols.push_back(c);

  Dataset d;
  d.X = Matrix(rows.size(), input_cols.size());
  d.Y = Matrix(rows.size(), target_cols.size());
  for (auto c : input_cols) d.input_names.push_back(names[c]);
  for (auto c : target_cols) d.target_names.push_back(names[c]);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < input_cols.size(); ++j) d.X(i, j) = rows[i][input_cols[j]];
    for (std::size_t j = 0; j < target_cols.size(); ++j) d.Y(i, j) = rows[i][target_cols[j]];
  }
  return d;
}

void impute_matrix(Matrix& m, const std::vector<std::string>& names) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < m.rows(); ++r)
      if (!std::isnan(m(r, c))) {
        sum += m(r, c);
        ++n;
      }
    if (n == m.rows()) continue;
    if (n == 0) throw ConfigError("attribute '" + names[c] + "' has no observed values");
    const double mean = sum / static_cast<double>(n);
    for (std::size_t r = 0; r < m.rows(); ++r)
      if (std::isnan(m(r, c))) m(r, c) = mean;
  }
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  return Dataset{X.select_rows(rows), Y.select_rows(rows), input_names, target_names};
}

bool Dataset::has_missing() const {
  auto nan = [](double v) { return std::isnan(v); };
  return std::any_of(X.data().begin(), X.data().end(), nan) ||
         std::any_of(Y.data().begin(), Y.data().end(), nan);
}

Dataset parse_arff(std::istream& in, const TargetSpec& targets) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  bool in_data = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '%') continue;
    if (in_data) {
      if (line.front() == '{') throw ParseError("sparse data rows are not supported", line_no);
      rows.push_back(parse_row(line, names.size(), line_no));
      continue;
    }
    if (line.front() != '@') throw ParseError("expected a header declaration", line_no);
    if (starts_with_keyword(line, "@relation")) continue;
    if (starts_with_keyword(line, "@attribute")) {
      auto [name, type] = split_attribute(line.substr(10), line_no);
      const auto t = lower(type);
      if (t == "numeric" || t == "real" || t == "integer") {
        names.push_back(std::move(name));
      } else if (t.front() == '{' || t == "string" || t.starts_with("date") ||
                 t.starts_with("relational")) {
        throw UnsupportedAttributeError("line " + std::to_string(line_no) + ": attribute '" + name +
                                        "' has unsupported type " + type);
      } else {
        throw ParseError("unknown attribute type '" + type + "'", line_no);
      }
      continue;
    }
    if (starts_with_keyword(line, "@data")) {
      if (names.empty()) throw ParseError("@data before any @attribute", line_no);
      in_data = true;
      continue;
    }
    throw ParseError("unknown declaration '" + std::string(line) + "'", line_no);
  }
  if (!in_data) throw ParseError("missing @data section", line_no);
  if (rows.empty()) throw ParseError("no data rows", line_no);
  return assemble(names, rows, targets);
}

Dataset parse_csv(std::istream& in, const TargetSpec& targets) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;
    if (names.empty()) {
      std::size_t start = 0;
      while (true) {
        const auto comma = line.find(',', start);
        auto name = unquote(line.substr(start, comma - start));
        if (name.empty()) throw ParseError("empty column name in header", line_no);
        names.push_back(std::move(name));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      continue;
    }
    rows.push_back(parse_row(line, names.size(), line_no));
  }
  if (names.empty()) throw ParseError("missing header row", line_no);
  if (rows.empty()) throw ParseError("no data rows", line_no);
  return assemble(names, rows, targets);
}

Dataset load_dataset(const std::filesystem::path& path, const TargetSpec& targets, bool impute) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset " + path.string());
  auto ext = lower(path.extension().string());
  Dataset d = ext == ".arff" ? parse_arff(in, targets) : parse_csv(in, targets);
  return impute ? impute_mean(std::move(d)) : d;
}

Dataset impute_mean(Dataset data) {
  impute_matrix(data.X, data.input_names);
  impute_matrix(data.Y, data.target_names);
  return data;
}

Normalizer::Normalizer(std::vector<double> mins, std::vector<double> maxs)
    : mins_(std::move(mins)), maxs_(std::move(maxs)) {
  if (mins_.size() != maxs_.size()) throw DimensionError("normalizer bounds differ in length");
  for (std::size_t j = 0; j < mins_.size(); ++j)
    if (!(mins_[j] <= maxs_[j])) throw ParameterError("normalizer min exceeds max");
}

Normalizer Normalizer::fit(const Matrix& Y) {
  if (Y.rows() == 0) throw DimensionError("cannot fit a normalizer on zero rows");
  std::vector<double> mins(Y.cols(), std::numeric_limits<double>::infinity());
  std::vector<double> maxs(Y.cols(), -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < Y.rows(); ++r)
    for (std::size_t c = 0; c < Y.cols(); ++c) {
      mins[c] = std::min(mins[c], Y(r, c));
      maxs[c] = std::max(maxs[c], Y(r, c));
    }
  return Normalizer(std::move(mins), std::move(maxs));
}

Matrix Normalizer::apply(const Matrix& Y) const {
  if (Y.cols() != size()) throw DimensionError("normalizer target count mismatch");
  Matrix out(Y.rows(), Y.cols());
  for (std::size_t c = 0; c < Y.cols(); ++c) {
    const double range = maxs_[c] - mins_[c];
    for (std::size_t r = 0; r < Y.rows(); ++r)
      out(r, c) = range > 0.0 ? (Y(r, c) - mins_[c]) / range : 0.0;
  }
  return out;
}

void Normalizer::invert_in_place(std::span<double> row) const {
  if (row.size() != size()) throw DimensionError("normalizer target count mismatch");
  for (std::size_t c = 0; c < row.size(); ++c) {
    const double range = maxs_[c] - mins_[c];
    row[c] = range > 0.0 ? mins_[c] + row[c] * range : mins_[c];
  }
}

Matrix Normalizer::invert(const Matrix& U) const {
  Matrix out = U;
  for (std::size_t r = 0; r < out.rows(); ++r) invert_in_place(out.row(r));
  return out;
}

std::vector<std::size_t> KFoldSplit::test_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> KFoldSplit::train_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold) rows.push_back(i);
  return rows;
}

KFoldSplit make_kfold(std::size_t m, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ParameterError("cross-validation needs at least 2 folds");
  if (folds > m)
    throw ParameterError(std::to_string(folds) + " folds requested for " + std::to_string(m) + " rows");
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));
  KFoldSplit split;
  split.folds = folds;
  split.seed = seed;
  split.fold_of.resize(m);
  for (std::size_t i = 0; i < m; ++i) split.fold_of[perm[i]] = i % folds;
  return split;
}

HoldoutSplit make_holdout(std::size_t m, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ParameterError("holdout test fraction must lie in (0, 1)");
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(m)));
  if (n_test == 0 || n_test >= m) throw ParameterError("holdout leaves an empty train or test part");
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));
  HoldoutSplit split;
  split.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

}  // namespace rlc
