#include "rlc/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "rlc/error.hpp"
#include "rlc/io.hpp"

namespace rlc {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string target_label(const std::vector<std::string>& names, std::size_t j) {
  return j < names.size() ? names[j] : "y" + std::to_string(j);
}

struct FoldScore {
  TargetScores scores;
  Vector train_means;
};

// Scores every model of a family on one train/test pair.
std::vector<FoldScore> score_family(const FamilyTrainer& train_family, const Dataset& train, const Dataset& test,
                                    DegeneratePolicy policy, double& train_seconds, double& predict_seconds) {
  if (train.num_inputs() != test.num_inputs() || train.num_targets() != test.num_targets())
    throw DimensionError("train and test sets disagree on p or q");
  const Vector means = column_means(train.Y);
  auto start = std::chrono::steady_clock::now();
  auto models = train_family(train);
  train_seconds += seconds_since(start);

  std::vector<FoldScore> out;
  for (const auto& model : models) {
    start = std::chrono::steady_clock::now();
    const Matrix preds = model->predict_all(test.X);
    predict_seconds += seconds_since(start);
    out.push_back({score_targets(preds, test.Y, means, policy), means});
  }
  return out;
}

FamilyTrainer single(const Method& method) {
  return [&method](const Dataset& train) {
    std::vector<std::unique_ptr<MultiTargetModel>> v;
    v.push_back(method.train(train));
    return v;
  };
}

}  // namespace

double rrmse(std::span<const double> pred, std::span<const double> actual, double train_mean, std::size_t target) {
  if (pred.size() != actual.size()) throw DimensionError("rrmse: prediction and actual lengths differ");
  if (pred.empty()) throw DimensionError("rrmse: no test values");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    num += (pred[i] - actual[i]) * (pred[i] - actual[i]);
    den += (train_mean - actual[i]) * (train_mean - actual[i]);
  }
  if (den == 0.0)
    throw DegenerateTargetError("target " + std::to_string(target) + ": every test value equals the training mean",
                                target);
  return std::sqrt(num / den);
}

TargetScores score_targets(const Matrix& preds, const Matrix& actuals, std::span<const double> train_means,
                           DegeneratePolicy policy) {
  if (preds.rows() != actuals.rows() || preds.cols() != actuals.cols() || train_means.size() != actuals.cols())
    throw DimensionError("aRRMSE: prediction, actual and mean shapes disagree");
  TargetScores out;
  out.rrmse.assign(actuals.cols(), kNaN);
  double sum = 0.0;
  std::size_t scored = 0;
  for (std::size_t j = 0; j < actuals.cols(); ++j) {
    try {
      out.rrmse[j] = rrmse(preds.column(j), actuals.column(j), train_means[j], j);
    } catch (const DegenerateTargetError&) {
      if (policy == DegeneratePolicy::kError) throw;
      out.skipped.push_back(j);
      continue;
    }
    sum += out.rrmse[j];
    ++scored;
  }
  if (scored == 0) throw DegenerateTargetError("aRRMSE: every target is degenerate", 0);
  out.arrmse = sum / static_cast<double>(scored);
  return out;
}

double arrmse(const Matrix& preds, const Matrix& actuals, std::span<const double> train_means,
              DegeneratePolicy policy) {
  return score_targets(preds, actuals, train_means, policy).arrmse;
}

Vector column_means(const Matrix& Y) {
  Vector means(Y.cols(), 0.0);
  for (std::size_t c = 0; c < Y.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < Y.rows(); ++r) s += Y(r, c);
    means[c] = s / static_cast<double>(Y.rows());
  }
  return means;
}

std::vector<EvalReport> evaluate_holdout_family(const FamilyTrainer& train_family, const Dataset& train,
                                                const Dataset& test, DegeneratePolicy policy) {
  double train_s = 0.0, predict_s = 0.0;
  auto scores = score_family(train_family, train, test, policy, train_s, predict_s);
  std::vector<EvalReport> reports;
  for (auto& s : scores) {
    EvalReport r;
    r.protocol = "holdout";
    r.per_target_rrmse = s.scores.rrmse;
    r.arrmse = s.scores.arrmse;
    r.per_fold_arrmse = {s.scores.arrmse};
    r.train_means = {s.train_means};
    for (auto j : s.scores.skipped)
      r.warnings.push_back("target " + target_label(train.target_names, j) + " skipped: degenerate on the test set");
    r.train_seconds = train_s;
    r.predict_seconds = predict_s;
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<EvalReport> evaluate_cv_family(const FamilyTrainer& train_family, const Dataset& data,
                                           std::size_t folds, std::uint64_t seed, DegeneratePolicy policy) {
  const KFoldSplit split = make_kfold(data.size(), folds, seed);
  std::vector<EvalReport> reports;
  std::vector<Vector> rrmse_sums;
  std::vector<std::vector<std::size_t>> rrmse_counts;
  double train_s = 0.0, predict_s = 0.0;
  for (std::size_t f = 0; f < folds; ++f) {
    const auto train_rows = split.train_rows(f);
    const auto test_rows = split.test_rows(f);
    auto scores = score_family(train_family, data.subset(train_rows), data.subset(test_rows), policy, train_s,
                               predict_s);
    if (reports.empty()) {
      reports.resize(scores.size());
      rrmse_sums.assign(scores.size(), Vector(data.num_targets(), 0.0));
      rrmse_counts.assign(scores.size(), std::vector<std::size_t>(data.num_targets(), 0));
    } else if (scores.size() != reports.size()) {
      throw Error("cross-validation: model family size changed between folds");
    }
    for (std::size_t m = 0; m < scores.size(); ++m) {
      auto& r = reports[m];
      const auto& s = scores[m];
      r.per_fold_arrmse.push_back(s.scores.arrmse);
      r.train_means.push_back(s.train_means);
      for (std::size_t j = 0; j < data.num_targets(); ++j)
        if (!std::isnan(s.scores.rrmse[j])) {
          rrmse_sums[m][j] += s.scores.rrmse[j];
          ++rrmse_counts[m][j];
        }
      for (auto j : s.scores.skipped)
        r.warnings.push_back("fold " + std::to_string(f) + ": target " + target_label(data.target_names, j) +
                             " skipped: degenerate");
    }
  }
  for (std::size_t m = 0; m < reports.size(); ++m) {
    auto& r = reports[m];
    r.protocol = "cv";
    r.folds = folds;
    r.seed = seed;
    r.arrmse = std::accumulate(r.per_fold_arrmse.begin(), r.per_fold_arrmse.end(), 0.0) /
               static_cast<double>(r.per_fold_arrmse.size());
    r.per_target_rrmse.assign(data.num_targets(), kNaN);
    for (std::size_t j = 0; j < data.num_targets(); ++j)
      if (rrmse_counts[m][j]) r.per_target_rrmse[j] = rrmse_sums[m][j] / static_cast<double>(rrmse_counts[m][j]);
    r.train_seconds = train_s;
    r.predict_seconds = predict_s;
  }
  return reports;
}

EvalReport evaluate_holdout(const Method& method, const Dataset& train, const Dataset& test,
                            DegeneratePolicy policy) {
  auto r = std::move(evaluate_holdout_family(single(method), train, test, policy).front());
  r.method = method.name;
  return r;
}

EvalReport evaluate_cv(const Method& method, const Dataset& data, std::size_t folds, std::uint64_t seed,
                       DegeneratePolicy policy) {
  auto r = std::move(evaluate_cv_family(single(method), data, folds, seed, policy).front());
  r.method = method.name;
  return r;
}

Matrix pairwise_target_correlations(const Matrix& Y, std::vector<std::string>* warnings) {
  const std::size_t q = Y.cols();
  if (q < 2) throw ParameterError("correlations need at least two targets");
  if (Y.rows() < 2) throw ParameterError("correlations need at least two rows");
  const Vector means = column_means(Y);
  Matrix centered(Y.rows(), q);
  Vector norms(q, 0.0);
  for (std::size_t c = 0; c < q; ++c) {
    for (std::size_t r = 0; r < Y.rows(); ++r) {
      centered(r, c) = Y(r, c) - means[c];
      norms[c] += centered(r, c) * centered(r, c);
    }
    norms[c] = std::sqrt(norms[c]);
    if (norms[c] == 0.0 && warnings)
      warnings->push_back("target " + std::to_string(c) + " is constant; its correlations are set to 0");
  }
  Matrix corr(q, q, 0.0);
  for (std::size_t a = 0; a < q; ++a) {
    corr(a, a) = 1.0;
    for (std::size_t b = a + 1; b < q; ++b) {
      double v = 0.0;
      if (norms[a] > 0.0 && norms[b] > 0.0) {
        double s = 0.0;
        for (std::size_t r = 0; r < Y.rows(); ++r) s += centered(r, a) * centered(r, b);
        v = std::clamp(s / (norms[a] * norms[b]), -1.0, 1.0);
      }
      corr(a, b) = corr(b, a) = v;
    }
  }
  return corr;
}

CorrelationSummary correlation_summary(const Matrix& correlations) {
  const std::size_t q = correlations.rows();
  if (q < 2 || correlations.cols() != q) throw ParameterError("correlation summary needs a square matrix, q >= 2");
  CorrelationSummary s;
  s.pairwise = correlations;
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = a + 1; b < q; ++b) s.upper_abs.push_back(std::abs(correlations(a, b)));

  Vector sorted = s.upper_abs;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  s.median_abs = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  if (n >= 2) {
    const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : sorted) ss += (v - mean) * (v - mean);
    s.stdev_abs = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return s;
}

void write_report_json(std::ostream& out, const EvalReport& report, const std::vector<std::string>& target_names,
                       bool include_timing) {
  nlohmann::ordered_json j;
  j["method"] = report.method;
  j["protocol"] = report.protocol;
  if (report.protocol == "cv") {
    j["folds"] = report.folds;
    j["seed"] = report.seed;
  }
  j["arrmse"] = report.arrmse;
  nlohmann::ordered_json targets = nlohmann::ordered_json::object();
  for (std::size_t t = 0; t < report.per_target_rrmse.size(); ++t)
    targets[target_label(target_names, t)] = report.per_target_rrmse[t];
  j["per_target_rrmse"] = targets;
  j["per_fold_arrmse"] = report.per_fold_arrmse;
  j["train_means"] = report.train_means;
  j["warnings"] = report.warnings;
  if (include_timing) {
    j["train_seconds"] = report.train_seconds;
    j["predict_seconds"] = report.predict_seconds;
  }
  out << j.dump(2) << '\n';
}

void write_report_csv(std::ostream& out, const EvalReport& report, const std::vector<std::string>& target_names) {
  out << "target,rrmse\n";
  for (std::size_t t = 0; t < report.per_target_rrmse.size(); ++t)
    out << target_label(target_names, t) << ',' << format_real(report.per_target_rrmse[t]) << '\n';
  out << "aRRMSE," << format_real(report.arrmse) << '\n';
}

void write_correlation_csv(std::ostream& out, const Matrix& correlations, const std::vector<std::string>& names) {
  out << "target";
  for (std::size_t c = 0; c < correlations.cols(); ++c) out << ',' << target_label(names, c);
  out << '\n';
  for (std::size_t r = 0; r < correlations.rows(); ++r) {
    out << target_label(names, r);
    for (std::size_t c = 0; c < correlations.cols(); ++c) out << ',' << format_real(correlations(r, c));
    out << '\n';
  }
}

void write_correlation_summary_json(std::ostream& out, const CorrelationSummary& summary,
                                    const std::string& dataset) {
  nlohmann::ordered_json j;
  j["dataset"] = dataset;
  j["pairs"] = summary.upper_abs.size();
  j["median_abs"] = summary.median_abs;
  j["stdev_abs"] = summary.stdev_abs ? nlohmann::ordered_json(*summary.stdev_abs) : nlohmann::ordered_json(nullptr);
  out << j.dump(2) << '\n';
}

void write_correlation_boxplot_row(std::ostream& out, const std::string& dataset, const Matrix& correlations) {
  out << dataset;
  for (std::size_t a = 0; a < correlations.rows(); ++a)
    for (std::size_t b = a + 1; b < correlations.cols(); ++b) out << ',' << format_real(correlations(a, b));
  out << '\n';
}

}  // namespace rlc
