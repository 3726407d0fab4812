#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "rlc/error.hpp"
#include "rlc/gbtree.hpp"

namespace rlc {
namespace {

Matrix column_matrix(std::initializer_list<double> values) {
  Matrix X(values.size(), 1);
  std::size_t i = 0;
  for (double v : values) X(i++, 0) = v;
  return X;
}

double training_rmse(const GbmModel& model, const Matrix& X, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double e = model.predict(X.row(i)) - y[i];
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(X.rows()));
}

RegressionTree stump() {
  return RegressionTree({TreeNode{0, 2.5, 1, 2, 0.0}, TreeNode{.value = 0.0}, TreeNode{.value = 1.0}});
}

TEST(RegressionTree, SingleLeafMeanWhenBudgetIsOne) {
  const auto X = column_matrix({1, 2, 3, 4});
  const std::vector<double> y{1, 5, 2, 8};
  const auto t = fit_regression_tree(X, y, 1);
  EXPECT_EQ(t.leaf_count(), 1u);
  EXPECT_DOUBLE_EQ(t.predict(X.row(0)), 4.0);
}

TEST(RegressionTree, StepDataSplitsBetweenTwoAndThree) {
  const auto X = column_matrix({1, 2, 3, 4});
  const std::vector<double> y{0, 0, 1, 1};
  const auto t = fit_regression_tree(X, y, 2);
  ASSERT_EQ(t.leaf_count(), 2u);
  EXPECT_EQ(t.nodes()[0].feature, 0u);
  EXPECT_DOUBLE_EQ(t.nodes()[0].threshold, 2.5);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(t.predict(X.row(i)), y[i]);
  const auto oracle = testing::brute_force_best_split(X, y);
  EXPECT_DOUBLE_EQ(oracle.threshold, 2.5);
  EXPECT_DOUBLE_EQ(oracle.gain, 1.0);
}

TEST(RegressionTree, ConstantTargetStaysOneLeaf) {
  const auto [X, unused] = testing::random_problem(30, 3, 4);
  const std::vector<double> y(30, 2.25);
  const auto t = fit_regression_tree(X, y, 4);
  EXPECT_EQ(t.leaf_count(), 1u);
  EXPECT_DOUBLE_EQ(t.predict(X.row(3)), 2.25);
}

TEST(RegressionTree, PredictRouting) {
  EXPECT_DOUBLE_EQ(RegressionTree::leaf(3.5).predict(std::vector<double>{-7.0}), 3.5);
  const auto s = stump();
  EXPECT_DOUBLE_EQ(s.predict(std::vector<double>{2.0}), 0.0);
  EXPECT_DOUBLE_EQ(s.predict(std::vector<double>{2.5}), 0.0);
  EXPECT_DOUBLE_EQ(s.predict(std::vector<double>{2.6}), 1.0);
}

TEST(RegressionTree, RejectsMalformedNodeArrays) {
  EXPECT_THROW(RegressionTree({TreeNode{0, 1.0, 1, 5, 0.0}, TreeNode{}}), Error);
  EXPECT_THROW(RegressionTree({TreeNode{.value = NAN}}), Error);
}

TEST(RegressionTree, BestFirstUsesTheLeafBudgetOnTheLargestGain) {
  // Left half has a large jump, right half a small one: the fourth leaf
  // should not be spent until both halves are split.
  const auto X = column_matrix({1, 2, 3, 4, 5, 6, 7, 8});
  const std::vector<double> y{0, 0, 10, 10, 100, 100, 101, 101};
  const auto t = fit_regression_tree(X, y, 3);
  EXPECT_EQ(t.leaf_count(), 3u);
  // Root separates the 100s; the next split goes to the {0,10} side.
  EXPECT_DOUBLE_EQ(t.nodes()[0].threshold, 4.5);
  EXPECT_DOUBLE_EQ(t.predict(std::vector<double>{1.0}), 0.0);
  EXPECT_DOUBLE_EQ(t.predict(std::vector<double>{3.0}), 10.0);
  EXPECT_DOUBLE_EQ(t.predict(std::vector<double>{8.0}), 100.5);
}

TEST(RegressionTree, TiesGoToLowestFeatureThenThreshold) {
  // Both features separate y identically.
  Matrix X{{1, 1}, {2, 2}, {3, 3}, {4, 4}};
  const std::vector<double> y{0, 0, 1, 1};
  const auto t = fit_regression_tree(X, y, 2);
  EXPECT_EQ(t.nodes()[0].feature, 0u);
  // Symmetric target: thresholds 1.5 and 3.5 gain the same.
  const auto X1 = column_matrix({1, 2, 3});
  const std::vector<double> y1{0, 1, 0};
  const auto t1 = fit_regression_tree(X1, y1, 2);
  EXPECT_DOUBLE_EQ(t1.nodes()[0].threshold, 1.5);
}

TEST(RegressionTree, MinLeafIsRespected) {
  const auto X = column_matrix({1, 2, 3, 4, 5, 6});
  const std::vector<double> y{100, 0, 0, 0, 0, 0};
  const auto t = fit_regression_tree(X, y, 2, 2);
  ASSERT_EQ(t.leaf_count(), 2u);
  EXPECT_DOUBLE_EQ(t.nodes()[0].threshold, 2.5);
}

TEST(RegressionTree, FirstSplitMatchesExhaustiveScan) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + gen() % 49;
    const std::size_t p = 1 + gen() % 4;
    const auto [X, y] = testing::random_problem(m, p, gen(), trial % 2 == 0);
    const auto oracle = testing::brute_force_best_split(X, y);
    const auto t = fit_regression_tree(X, y, 2);
    if (!oracle.found || oracle.gain <= 1e-12) {
      EXPECT_EQ(t.leaf_count(), 1u);
      continue;
    }
    ASSERT_EQ(t.leaf_count(), 2u) << "trial " << trial;
    const auto& root = t.nodes()[0];
    std::vector<double> left, right;
    for (std::size_t i = 0; i < m; ++i) (X(i, root.feature) <= root.threshold ? left : right).push_back(y[i]);
    const double gain = testing::sse(y) - testing::sse(left) - testing::sse(right);
    EXPECT_NEAR(gain, oracle.gain, 1e-9 * std::max(1.0, oracle.gain)) << "trial " << trial;
  }
}

TEST(RegressionTree, LeafBoundAndFiniteLeaves) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t leaves = 1 + gen() % 8;
    const auto [X, y] = testing::random_problem(5 + gen() % 60, 1 + gen() % 5, gen());
    const auto t = fit_regression_tree(X, y, leaves);
    EXPECT_LE(t.leaf_count(), leaves);
    std::size_t internal = 0;
    for (const auto& n : t.nodes()) {
      if (n.is_leaf()) {
        EXPECT_TRUE(std::isfinite(n.value));
      } else {
        ++internal;
        EXPECT_NE(n.right, TreeNode::kNone);
      }
    }
    EXPECT_EQ(internal + 1, t.leaf_count());
  }
}

TEST(Gbm, ZeroIterationsPredictsMean) {
  const auto X = column_matrix({1, 2, 3});
  const std::vector<double> y{1, 2, 6};
  const auto model = fit_gbm(X, y, {.iterations = 0});
  EXPECT_TRUE(model.trees.empty());
  EXPECT_DOUBLE_EQ(model.predict(X.row(1)), 3.0);
}

TEST(Gbm, ConstantTargetGivesZeroTrees) {
  const auto [X, unused] = testing::random_problem(20, 2, 9);
  const std::vector<double> y(20, -1.5);
  const auto model = fit_gbm(X, y, {.iterations = 10});
  for (const auto& t : model.trees) {
    EXPECT_EQ(t.leaf_count(), 1u);
    EXPECT_EQ(t.nodes()[0].value, 0.0);
  }
  for (std::size_t i = 0; i < 20; ++i) EXPECT_DOUBLE_EQ(model.predict(X.row(i)), -1.5);
}

TEST(Gbm, ExactStumpWithUnitLearningRate) {
  const auto X = column_matrix({1, 2, 3, 4});
  const std::vector<double> y{0, 0, 1, 1};
  const auto model = fit_gbm(X, y, {.iterations = 1, .learning_rate = 1.0, .max_leaves = 2});
  EXPECT_DOUBLE_EQ(training_rmse(model, X, y), 0.0);
}

TEST(Gbm, PredictionIsInterceptPlusShrunkSum) {
  GbmModel model{.intercept = 0.4, .learning_rate = 0.1, .iterations = 0, .trees = {}};
  EXPECT_DOUBLE_EQ(model.predict(std::vector<double>{1.0}), 0.4);
  GbmModel one{.intercept = 0.0, .learning_rate = 0.1, .iterations = 1, .trees = {RegressionTree::leaf(1.0)}};
  EXPECT_DOUBLE_EQ(one.predict(std::vector<double>{1.0}), 0.1);
  const auto [X, y] = testing::random_problem(40, 3, 1);
  auto fitted = fit_gbm(X, y, {.iterations = 7});
  auto padded = fitted;
  padded.trees.push_back(RegressionTree::leaf(0.0));
  for (std::size_t i = 0; i < X.rows(); ++i) EXPECT_EQ(fitted.predict(X.row(i)), padded.predict(X.row(i)));
}

TEST(Gbm, TrainingRmseNeverIncreases) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 50; ++trial) {
    const auto [X, y] = testing::random_problem(10 + gen() % 191, 1 + gen() % 8, gen());
    const auto model = fit_gbm(X, y, {.iterations = 40});
    ASSERT_LE(model.trees.size(), 40u);
    double previous = training_rmse(model.prefix(0), X, y);
    for (std::size_t t = 1; t <= model.trees.size(); ++t) {
      const double now = training_rmse(model.prefix(t), X, y);
      EXPECT_LE(now, previous * (1.0 + 1e-12) + 1e-15) << "trial " << trial << " iteration " << t;
      previous = now;
    }
  }
}

TEST(Gbm, DeterministicAndPresortedOverloadAgrees) {
  const auto [X, y] = testing::random_problem(80, 4, 3);
  const GbmConfig cfg{.iterations = 25};
  const auto a = fit_gbm(X, y, cfg);
  const auto b = fit_gbm(X, y, cfg);
  EXPECT_EQ(a, b);
  const SortedFeatures sorted(X);
  EXPECT_EQ(fit_gbm(X, sorted, y, cfg), a);
}

TEST(GbmConfig, Validation) {
  EXPECT_NO_THROW(GbmConfig{}.validate());
  EXPECT_THROW((GbmConfig{.learning_rate = 0.0}.validate()), ParameterError);
  EXPECT_THROW((GbmConfig{.learning_rate = 1.5}.validate()), ParameterError);
  EXPECT_THROW((GbmConfig{.max_leaves = 0}.validate()), ParameterError);
  EXPECT_THROW((GbmConfig{.min_leaf = 0}.validate()), ParameterError);
}

TEST(GbmSerialization, RoundTripIsBitExact) {
  const auto [X, y] = testing::random_problem(60, 3, 12);
  const auto model = fit_gbm(X, y, {.iterations = 15, .learning_rate = 0.3});
  std::stringstream buffer;
  write_gbm(buffer, model);
  EXPECT_EQ(buffer.str().rfind("rlc-gbm 1", 0), 0u);
  const auto back = read_gbm(buffer);
  EXPECT_EQ(back, model);
  for (std::size_t i = 0; i < X.rows(); ++i) EXPECT_EQ(back.predict(X.row(i)), model.predict(X.row(i)));
}

TEST(GbmSerialization, RejectsGarbage) {
  std::istringstream wrong_version("rlc-gbm 9\n");
  EXPECT_THROW(read_gbm(wrong_version), ParseError);
  std::istringstream truncated("rlc-gbm 1\nintercept 0x1p+0\n");
  EXPECT_THROW(read_gbm(truncated), ParseError);
}

}  // namespace
}  // namespace rlc
