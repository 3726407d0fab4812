#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rlc/matrix.hpp"

namespace rlc {

/// Multi-target data: m rows of p inputs (X) and q targets (Y).
/// Missing cells are NaN until impute_mean() runs.
struct Dataset {
  Matrix X;
  Matrix Y;
  std::vector<std::string> input_names;
  std::vector<std::string> target_names;

  std::size_t size() const { return X.rows(); }
  std::size_t num_inputs() const { return X.cols(); }
  std::size_t num_targets() const { return Y.cols(); }

  Dataset subset(std::span<const std::size_t> rows) const;
  bool has_missing() const;
};

/// Which attributes are targets. Names win over count; with neither set
/// the file is rejected. By default the last `count` attributes are targets.
struct TargetSpec {
  std::optional<std::size_t> count;
  std::vector<std::string> names;
};

/// Parses the numeric ARFF subset: @relation, @attribute <name> numeric|real|integer,
/// @data, comma separated rows, '?' for missing, '%' comments.
Dataset parse_arff(std::istream& in, const TargetSpec& targets);
/// Header row of names followed by numeric rows; same '?' convention.
Dataset parse_csv(std::istream& in, const TargetSpec& targets);

/// Picks the parser by extension (.arff, otherwise CSV) and imputes when asked.
Dataset load_dataset(const std::filesystem::path& path, const TargetSpec& targets,
                     bool impute = true);

/// Replaces each NaN with the mean of the non-missing cells in its column.
Dataset impute_mean(Dataset data);

/// Per-target 0-1 scaling fitted on training targets.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::vector<double> mins, std::vector<double> maxs);

  static Normalizer fit(const Matrix& Y);

  /// v -> (v - min) / (max - min); constant targets map to 0. No clipping.
  Matrix apply(const Matrix& Y) const;
  /// u -> min + u * (max - min); constant targets map back to min.
  Matrix invert(const Matrix& U) const;
  void invert_in_place(std::span<double> row) const;

  std::size_t size() const { return mins_.size(); }
  const std::vector<double>& mins() const { return mins_; }
  const std::vector<double>& maxs() const { return maxs_; }

  friend bool operator==(const Normalizer&, const Normalizer&) = default;

 private:
  std::vector<double> mins_;
  std::vector<double> maxs_;
};

struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct KFoldSplit {
  std::vector<std::size_t> fold_of;  // one entry per row, values in [0, folds)
  std::size_t folds = 0;
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_rows(std::size_t fold) const;
  std::vector<std::size_t> train_rows(std::size_t fold) const;
};

using SplitPlan = std::variant<HoldoutSplit, KFoldSplit>;

/// Seeded permutation of 0..m-1 dealt round-robin into `folds` folds.
KFoldSplit make_kfold(std::size_t m, std::size_t folds, std::uint64_t seed);
/// Seeded random holdout with round(test_fraction * m) test rows.
HoldoutSplit make_holdout(std::size_t m, double test_fraction, std::uint64_t seed);

}  // namespace rlc
