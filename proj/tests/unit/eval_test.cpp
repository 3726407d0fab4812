#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"

#include "oracles.hpp"
#include "rlc/error.hpp"
#include "rlc/eval.hpp"

namespace rlc {
namespace {

// Predicts the true targets by looking rows up in the full dataset.
class OracleModel final : public MultiTargetModel {
 public:
  explicit OracleModel(const Dataset& all) : all_(all) {}
  Vector predict(std::span<const double> x) const override {
    for (std::size_t i = 0; i < all_.size(); ++i)
      if (std::equal(x.begin(), x.end(), all_.X.row(i).begin())) {
        const auto row = all_.Y.row(i);
        return {row.begin(), row.end()};
      }
    throw Error("unknown row");
  }
  std::size_t num_targets() const override { return all_.num_targets(); }

 private:
  const Dataset& all_;
};

Method mean_method() {
  return {"mean", [](const Dataset& train) { return std::make_unique<testing::MeanModel>(train); }};
}

TEST(Rrmse, Examples) {
  const std::vector<double> actual{0.0, 2.0};
  EXPECT_DOUBLE_EQ(rrmse(actual, actual, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(rrmse(std::vector<double>{1.0, 1.0}, actual, 1.0), 1.0);
  EXPECT_NEAR(rrmse(std::vector<double>{0.0, 1.0}, actual, 1.0), std::sqrt(0.5), 1e-15);
}

TEST(Rrmse, DegenerateCarriesTargetIndex) {
  try {
    rrmse(std::vector<double>{1.0, 2.0}, std::vector<double>{3.0, 3.0}, 3.0, 4);
    FAIL();
  } catch (const DegenerateTargetError& e) {
    EXPECT_EQ(e.target(), 4u);
  }
}

TEST(Rrmse, AffineInvariance) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> unif(-10.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen() % 30;
    std::vector<double> pred(n), actual(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = unif(gen);
      actual[i] = unif(gen);
    }
    const double mean = unif(gen);
    double a = unif(gen);
    if (std::abs(a) < 1e-3) a = 1.0;
    const double b = unif(gen);
    std::vector<double> pa(n), aa(n);
    for (std::size_t i = 0; i < n; ++i) {
      pa[i] = a * pred[i] + b;
      aa[i] = a * actual[i] + b;
    }
    const double base = rrmse(pred, actual, mean);
    EXPECT_NEAR(rrmse(pa, aa, a * mean + b), base, 1e-12 * base) << "trial " << trial;
  }
}

TEST(Arrmse, Examples) {
  const Matrix actual{{0.0, 1.0}, {2.0, 3.0}};
  const std::vector<double> means{1.0, 2.0};
  EXPECT_DOUBLE_EQ(arrmse(actual, actual, means), 0.0);
  EXPECT_DOUBLE_EQ(arrmse(Matrix{{1.0, 2.0}, {1.0, 2.0}}, actual, means), 1.0);
  EXPECT_DOUBLE_EQ(arrmse(Matrix{{0.0, 2.0}, {2.0, 2.0}}, actual, means), 0.5);
}

TEST(Arrmse, DegeneratePolicy) {
  const Matrix actual{{0.0, 5.0}, {2.0, 5.0}};
  const Matrix preds{{1.0, 4.0}, {1.0, 6.0}};
  const std::vector<double> means{1.0, 5.0};
  EXPECT_THROW(arrmse(preds, actual, means), DegenerateTargetError);
  const auto s = score_targets(preds, actual, means, DegeneratePolicy::kSkip);
  EXPECT_EQ(s.skipped, std::vector<std::size_t>{1});
  EXPECT_TRUE(std::isnan(s.rrmse[1]));
  EXPECT_DOUBLE_EQ(s.arrmse, 1.0);
}

TEST(Arrmse, TrainMeanPredictorOnItsOwnTrainingSetIsExactlyOne) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = testing::correlated_targets(5 + gen() % 100, 2, 1 + gen() % 6, 0.5, gen());
    const auto means = column_means(d.Y);
    const testing::MeanModel model(d);
    EXPECT_EQ(arrmse(model.predict_all(d.X), d.Y, means), 1.0);
  }
}

TEST(EvaluateHoldout, MeanPredictorAndPerfectModel) {
  const auto train = testing::correlated_targets(100, 3, 3, 0.5, 1);
  auto test = train.subset(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  // Recentre the test targets on the train means so the mean predictor scores exactly 1.
  const auto means = column_means(train.Y);
  const auto tmeans = column_means(test.Y);
  for (std::size_t i = 0; i < test.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) test.Y(i, j) += means[j] - tmeans[j];
  const auto r = evaluate_holdout(mean_method(), train, test);
  EXPECT_EQ(r.protocol, "holdout");
  EXPECT_NEAR(r.arrmse, 1.0, 1e-12);
  ASSERT_EQ(r.train_means.size(), 1u);
  EXPECT_EQ(r.train_means[0], means);

  const Method perfect{"oracle", [&](const Dataset&) { return std::make_unique<OracleModel>(test); }};
  EXPECT_EQ(evaluate_holdout(perfect, train, test).arrmse, 0.0);
}

TEST(EvaluateHoldout, ShapeMismatch) {
  const auto a = testing::correlated_targets(20, 3, 2, 0.5, 1);
  const auto b = testing::correlated_targets(20, 3, 3, 0.5, 1);
  EXPECT_THROW(evaluate_holdout(mean_method(), a, b), DimensionError);
}

TEST(EvaluateCv, MeanPredictorNearOne) {
  const auto d = testing::correlated_targets(200, 3, 3, 0.5, 4);
  const auto r = evaluate_cv(mean_method(), d, 10, 7);
  EXPECT_EQ(r.protocol, "cv");
  EXPECT_EQ(r.folds, 10u);
  ASSERT_EQ(r.per_fold_arrmse.size(), 10u);
  for (double v : r.per_fold_arrmse) EXPECT_NEAR(v, 1.0, 0.15);
  double mean = 0.0;
  for (double v : r.per_fold_arrmse) mean += v;
  EXPECT_DOUBLE_EQ(r.arrmse, mean / 10.0);
}

TEST(EvaluateCv, UsesFoldTrainMeans) {
  const auto d = testing::correlated_targets(30, 2, 2, 0.5, 5);
  const auto r = evaluate_cv(mean_method(), d, 3, 9);
  const auto plan = make_kfold(30, 3, 9);
  for (std::size_t f = 0; f < 3; ++f) {
    const auto means = column_means(d.subset(plan.train_rows(f)).Y);
    EXPECT_EQ(r.train_means[f], means);
  }
}

TEST(EvaluateCv, DeterministicAndLeaveOneOut) {
  const auto d = testing::correlated_targets(25, 3, 2, 0.5, 6);
  const Method st{"st", [](const Dataset& train) { return std::make_unique<StModel>(train_st(train, {.iterations = 5})); }};
  EXPECT_EQ(evaluate_cv(st, d, 5, 1).per_fold_arrmse, evaluate_cv(st, d, 5, 1).per_fold_arrmse);
  // one-row test folds: the denominator is (train mean - y)^2, non-zero here
  const auto loo = evaluate_cv(mean_method(), d, 25, 3);
  EXPECT_EQ(loo.per_fold_arrmse.size(), 25u);
  EXPECT_THROW(evaluate_cv(mean_method(), d, 1, 3), ParameterError);
}

TEST(EvaluateCv, DegenerateFoldsFollowThePolicy) {
  auto d = testing::correlated_targets(20, 2, 2, 0.5, 7);
  for (std::size_t i = 0; i < d.size(); ++i) d.Y(i, 1) = 3.0;
  EXPECT_THROW(evaluate_cv(mean_method(), d, 4, 1), DegenerateTargetError);
  const auto r = evaluate_cv(mean_method(), d, 4, 1, DegeneratePolicy::kSkip);
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_TRUE(std::isnan(r.per_target_rrmse[1]));
}

TEST(Correlations, Examples) {
  const Matrix Y{{1, 2, -1}, {2, 4, -2}, {3, 6, -3}, {5, 10, -5}};
  const auto c = pairwise_target_correlations(Y);
  EXPECT_NEAR(c(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(c(0, 2), -1.0, 1e-15);
  Matrix m{{1, 0.5, -0.5}, {0.5, 1, 0.1}, {-0.5, 0.1, 1}};
  const auto s = correlation_summary(m);
  EXPECT_DOUBLE_EQ(s.median_abs, 0.5);
  ASSERT_TRUE(s.stdev_abs.has_value());
  EXPECT_NEAR(*s.stdev_abs, std::sqrt((2 * std::pow(0.5 - 1.1 / 3, 2) + std::pow(0.1 - 1.1 / 3, 2)) / 2), 1e-15);
}

TEST(Correlations, ConstantColumnWarnsAndTwoTargetsHaveNoStdev) {
  const Matrix Y{{1, 4}, {2, 4}, {3, 4}};
  std::vector<std::string> warnings;
  const auto c = pairwise_target_correlations(Y, &warnings);
  EXPECT_EQ(c(0, 1), 0.0);
  EXPECT_EQ(warnings.size(), 1u);
  const auto s = correlation_summary(c);
  EXPECT_FALSE(s.stdev_abs.has_value());
  EXPECT_THROW(pairwise_target_correlations(Matrix{{1}, {2}}), ParameterError);
}

TEST(Correlations, SymmetricUnitDiagonalBounded) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = testing::correlated_targets(3 + gen() % 50, 2, 2 + gen() % 8, 0.1 + trial * 0.05, gen());
    const auto c = pairwise_target_correlations(d.Y);
    for (std::size_t a = 0; a < c.rows(); ++a) {
      EXPECT_EQ(c(a, a), 1.0);
      for (std::size_t b = 0; b < c.cols(); ++b) {
        EXPECT_EQ(c(a, b), c(b, a));
        EXPECT_LE(std::abs(c(a, b)), 1.0);
      }
    }
  }
}

TEST(Reports, JsonAndCsvWriters) {
  EvalReport r;
  r.method = "ST";
  r.protocol = "cv";
  r.folds = 2;
  r.seed = 3;
  r.per_target_rrmse = {0.5, 0.7};
  r.arrmse = 0.6;
  r.per_fold_arrmse = {0.55, 0.65};
  r.train_means = {{1.0, 2.0}, {1.5, 2.5}};
  r.train_seconds = 1.25;
  std::ostringstream json;
  write_report_json(json, r, {"a", "b"});
  const auto j = nlohmann::json::parse(json.str());
  EXPECT_EQ(j["method"], "ST");
  EXPECT_DOUBLE_EQ(j["arrmse"].get<double>(), 0.6);
  EXPECT_FALSE(j.contains("train_seconds"));
  std::ostringstream timed;
  write_report_json(timed, r, {"a", "b"}, true);
  EXPECT_TRUE(nlohmann::json::parse(timed.str()).contains("train_seconds"));
  std::ostringstream csv;
  write_report_csv(csv, r, {"a", "b"});
  EXPECT_NE(csv.str().find("aRRMSE,0.6"), std::string::npos);

  std::ostringstream heat;
  write_correlation_csv(heat, Matrix{{1, 0.25}, {0.25, 1}}, {"a", "b"});
  EXPECT_EQ(heat.str(), "target,a,b\na,1,0.25\nb,0.25,1\n");
  std::ostringstream box;
  write_correlation_boxplot_row(box, "d", Matrix{{1, 0.25, 0.5}, {0.25, 1, -0.75}, {0.5, -0.75, 1}});
  EXPECT_EQ(box.str(), "d,0.25,0.5,-0.75\n");
}

}  // namespace
}  // namespace rlc
