#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rlc/dataset.hpp"
#include "rlc/eval.hpp"
#include "rlc/gbtree.hpp"
#include "rlc/stats.hpp"

namespace rlc {

struct DatasetEntry {
  std::string name;
  std::filesystem::path path;
  /// Predefined test file; when set the dataset uses holdout, otherwise CV.
  std::optional<std::filesystem::path> test_path;
  TargetSpec targets;
};

struct MethodEntry {
  enum class Kind { kSt, kRlc };
  Kind kind = Kind::kSt;
  std::string name;
  std::size_t r = 500;
  std::size_t k = 2;
  std::optional<std::uint64_t> seed;  // defaults to the experiment seed
};

struct SweepEntry {
  std::vector<std::size_t> r_values;
  std::vector<std::size_t> k_values;
};

/// Keys of the JSON config file:
///   datasets        [{name, path, test_path?, targets (count) | target_names}]
///   methods         [{type: "st"|"rlc", name?, r?, k?, seed?}]
///   gbm             {iterations, learning_rate, max_leaves, min_leaf}
///   folds, seed, jobs, output_dir, impute_missing, degenerate_policy ("error"|"skip")
///   sweep           {r: [...], k: [...]}   optional
/// Relative paths resolve against the config file's directory.
struct ExperimentConfig {
  std::vector<DatasetEntry> datasets;
  std::vector<MethodEntry> methods;
  GbmConfig gbm;
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  std::optional<SweepEntry> sweep;
  std::filesystem::path output_dir = "results";
  std::size_t jobs = 1;
  bool impute_missing = true;
  DegeneratePolicy policy = DegeneratePolicy::kError;

  static ExperimentConfig parse(const std::string& json_text, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Throws ConfigError/ParameterError; checks referenced files exist.
  void validate() const;
};

struct CurvePoint {
  std::string dataset;
  std::size_t k = 0;
  std::size_t r = 0;
  double arrmse = 0.0;
};

/// CSV "dataset,k,r,arrmse", sorted by dataset, k, then r. With more than
/// one dataset, "average" rows follow: per k over the datasets having that
/// k, and k="all" over every series, each only at r values every
/// contributing dataset has.
std::string emit_curve_data(std::vector<CurvePoint> points);

struct CellOutcome {
  std::string dataset;
  std::string method;
  bool ok = false;
  std::string error;
  double arrmse = 0.0;
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
};

struct ExperimentSummary {
  std::vector<CellOutcome> cells;
  std::vector<CurvePoint> curve;
  ResultTable table;
  std::vector<std::filesystem::path> files;  // relative to output_dir, manifest excluded
  std::size_t failed() const;
};

/// Runs every dataset x method cell (and the sweep), writing:
///   results.csv, reports/*.json, curves.csv, curves/*.csv, timings.csv, manifest.json.
/// A failing cell is logged and left empty in results.csv; siblings still run.
ExperimentSummary run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

struct PairwiseWilcoxon {
  std::string a;
  std::string b;
  std::optional<WilcoxonResult> result;  // empty when every difference is zero
};

struct ComparisonReport {
  ResultTable table;
  double alpha = 0.1;
  std::vector<std::vector<WinLoss>> wins_losses;
  FriedmanResult friedman;
  std::optional<double> critical_difference;
  std::vector<PairwiseWilcoxon> wilcoxon;

  std::string to_json() const;
  std::string to_text() const;
};

/// Wins/losses, Friedman, Nemenyi CD and pairwise Wilcoxon over a complete table.
ComparisonReport compare_methods(const ResultTable& table, double alpha);
ComparisonReport compare_methods(const std::filesystem::path& table_csv, double alpha);

struct CorrelationFiles {
  CorrelationSummary summary;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> files;
};

/// Writes <name>_correlations.csv, <name>_correlation_summary.json and <name>_boxplot.csv.
CorrelationFiles run_correlations(const Dataset& data, const std::string& name,
                                  const std::filesystem::path& output_dir);

}  // namespace rlc
