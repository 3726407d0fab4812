#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlc/dataset.hpp"
#include "rlc/ensemble.hpp"
#include "rlc/matrix.hpp"

namespace rlc {

/// sqrt( sum (pred - actual)^2 / sum (train_mean - actual)^2 ).
/// Throws DegenerateTargetError (carrying `target`) on a zero denominator.
double rrmse(std::span<const double> pred, std::span<const double> actual, double train_mean,
             std::size_t target = 0);

/// What to do with a target whose RRMSE denominator is zero.
enum class DegeneratePolicy { kError, kSkip };

struct TargetScores {
  Vector rrmse;                      // NaN where skipped
  std::vector<std::size_t> skipped;
  double arrmse = 0.0;               // mean over non-skipped targets
};

TargetScores score_targets(const Matrix& preds, const Matrix& actuals, std::span<const double> train_means,
                           DegeneratePolicy policy = DegeneratePolicy::kError);

/// Unweighted mean of per-target RRMSE.
double arrmse(const Matrix& preds, const Matrix& actuals, std::span<const double> train_means,
              DegeneratePolicy policy = DegeneratePolicy::kError);

Vector column_means(const Matrix& Y);

using Trainer = std::function<std::unique_ptr<MultiTargetModel>(const Dataset& train)>;
/// Trains once and returns several related models (e.g. every ensemble-size
/// prefix of one RLC run); each is scored separately.
using FamilyTrainer = std::function<std::vector<std::unique_ptr<MultiTargetModel>>(const Dataset& train)>;

struct Method {
  std::string name;
  Trainer train;
};

struct EvalReport {
  std::string method;
  std::string protocol;  // "holdout" or "cv"
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  Vector per_target_rrmse;  // CV: mean over the folds where the target was scored
  double arrmse = 0.0;      // CV: mean of per_fold_arrmse
  Vector per_fold_arrmse;
  std::vector<Vector> train_means;  // one per fold (a single entry for holdout)
  std::vector<std::string> warnings;
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
};

EvalReport evaluate_holdout(const Method& method, const Dataset& train, const Dataset& test,
                            DegeneratePolicy policy = DegeneratePolicy::kError);
EvalReport evaluate_cv(const Method& method, const Dataset& data, std::size_t folds, std::uint64_t seed,
                       DegeneratePolicy policy = DegeneratePolicy::kError);

std::vector<EvalReport> evaluate_holdout_family(const FamilyTrainer& train_family, const Dataset& train,
                                                const Dataset& test, DegeneratePolicy policy);
std::vector<EvalReport> evaluate_cv_family(const FamilyTrainer& train_family, const Dataset& data,
                                           std::size_t folds, std::uint64_t seed, DegeneratePolicy policy);

/// Pearson correlation of every target pair. A constant column correlates 0
/// with everything (a warning is appended); the diagonal is 1.
Matrix pairwise_target_correlations(const Matrix& Y, std::vector<std::string>* warnings = nullptr);

struct CorrelationSummary {
  Matrix pairwise;
  std::vector<double> upper_abs;    // |r| over the upper triangle, row-major
  double median_abs = 0.0;
  std::optional<double> stdev_abs;  // sample stdev; absent for a single pair
};

CorrelationSummary correlation_summary(const Matrix& correlations);

void write_report_json(std::ostream& out, const EvalReport& report, const std::vector<std::string>& target_names,
                       bool include_timing = false);
/// Rows "target,rrmse" plus an "aRRMSE" row.
void write_report_csv(std::ostream& out, const EvalReport& report, const std::vector<std::string>& target_names);
/// Square matrix with a header row and a leading name column (heat-map input).
void write_correlation_csv(std::ostream& out, const Matrix& correlations, const std::vector<std::string>& names);
void write_correlation_summary_json(std::ostream& out, const CorrelationSummary& summary, const std::string& dataset);
/// One row per dataset: name followed by every upper-triangle correlation (box-plot input).
void write_correlation_boxplot_row(std::ostream& out, const std::string& dataset, const Matrix& correlations);

}  // namespace rlc
