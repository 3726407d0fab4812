#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>

#include "oracles.hpp"
#include "rlc/bundle.hpp"
#include "rlc/ensemble.hpp"
#include "rlc/error.hpp"

namespace rlc {
namespace {

// Targets j = a_j * x0 + b_j, so every normalized target equals the same signal.
Dataset affine_targets(std::size_t m, std::size_t q, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  Dataset d;
  d.X = Matrix(m, 2);
  d.Y = Matrix(m, q);
  d.input_names = {"x0", "x1"};
  for (std::size_t j = 0; j < q; ++j) d.target_names.push_back("t" + std::to_string(j));
  for (std::size_t i = 0; i < m; ++i) {
    d.X(i, 0) = unif(gen);
    d.X(i, 1) = unif(gen);
    for (std::size_t j = 0; j < q; ++j) d.Y(i, j) = (0.5 + static_cast<double>(j)) * d.X(i, 0) - 2.0 * static_cast<double>(j);
  }
  return d;
}

GbmConfig quick() { return {.iterations = 10}; }

TEST(TrainRlc, OneModelPerCombination) {
  const auto data = testing::correlated_targets(60, 3, 6, 0.5, 1);
  const auto model = train_rlc(data, {.r = 8, .k = 2, .seed = 3, .gbm = quick()});
  EXPECT_EQ(model.models().size(), 8u);
  EXPECT_EQ(model.coefficients().combinations(), 8u);
  EXPECT_EQ(predict_rlc(model, data.X.row(0)).size(), 6u);
}

TEST(TrainRlc, ModelIsFittedToItsEncodedColumn) {
  const auto data = testing::correlated_targets(40, 2, 3, 0.5, 2);
  const RlcParams params{.r = 5, .k = 2, .seed = 9, .gbm = quick()};
  const auto model = train_rlc(data, params);
  const auto norm = Normalizer::fit(data.Y);
  const auto Z = encode(norm.apply(data.Y), build_coefficient_matrix(3, 5, 2, 9));
  for (std::size_t i = 0; i < 5; ++i) {
    const auto direct = fit_gbm(data.X, Z.column(i), quick());
    for (std::size_t row = 0; row < 5; ++row)
      EXPECT_EQ(model.models()[i]->predict(data.X.row(row)), direct.predict(data.X.row(row)));
  }
}

TEST(TrainRlc, ConstantTargetsAreReproduced) {
  Dataset d;
  d.X = Matrix{{1.0}, {2.0}, {3.0}, {4.0}};
  d.Y = Matrix(4, 3);
  for (std::size_t i = 0; i < 4; ++i) {
    d.Y(i, 0) = 7.0;
    d.Y(i, 1) = -1.0;
    d.Y(i, 2) = 0.25;
  }
  const auto model = train_rlc(d, {.r = 3, .k = 3, .seed = 1, .gbm = quick()});
  const auto p = predict_rlc(model, std::vector<double>{2.5});
  EXPECT_DOUBLE_EQ(p[0], 7.0);
  EXPECT_DOUBLE_EQ(p[1], -1.0);
  EXPECT_DOUBLE_EQ(p[2], 0.25);
}

TEST(TrainRlc, DeterministicAndIndependentOfJobs) {
  const auto data = testing::correlated_targets(80, 4, 4, 0.3, 5);
  const RlcParams params{.r = 12, .k = 2, .seed = 21, .gbm = quick()};
  const auto a = train_rlc(data, params, 1);
  const auto b = train_rlc(data, params, 1);
  const auto c = train_rlc(data, params, 4);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(a.predict(data.X.row(i)), b.predict(data.X.row(i)));
    EXPECT_EQ(a.predict(data.X.row(i)), c.predict(data.X.row(i)));
  }
}

TEST(TrainRlc, ParameterErrors) {
  const auto data = testing::correlated_targets(20, 2, 4, 0.3, 5);
  EXPECT_THROW(train_rlc(data, {.r = 3, .k = 2}), ParameterError);
  EXPECT_THROW(train_rlc(data, {.r = 8, .k = 5}), ParameterError);
  EXPECT_THROW(train_rlc(data, {.r = 8, .k = 1}), ParameterError);
}

TEST(TrainRlc, IdenticalNormalizedTargetsDecodeEqually) {
  const auto train = affine_targets(50, 4, 1);
  const auto model = train_rlc(train, {.r = 20, .k = 2, .seed = 4}, testing::affine_learner());
  const auto norm = model.normalizer();
  const auto probe = affine_targets(10, 4, 2);
  for (std::size_t i = 0; i < probe.size(); ++i) {
    Matrix pred(1, 4);
    const auto p = model.predict(probe.X.row(i));
    std::copy(p.begin(), p.end(), pred.row(0).begin());
    const auto u = norm.apply(pred);
    for (std::size_t j = 1; j < 4; ++j) EXPECT_NEAR(u(0, j), u(0, 0), 1e-6);
  }
}

TEST(TrainRlc, ExactLearnerRecoversHeldOutTargets) {
  const auto train = affine_targets(50, 5, 3);
  const auto model = train_rlc(train, {.r = 30, .k = 3, .seed = 8}, testing::affine_learner());
  const auto probe = affine_targets(20, 5, 4);
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const auto p = model.predict(probe.X.row(i));
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(p[j], probe.Y(i, j), 1e-8);
  }
}

TEST(TrainRlc, PerfectLearnerReproducesTrainingTargets) {
  const auto train = testing::correlated_targets(40, 3, 5, 1.0, 6);
  const auto model = train_rlc(train, {.r = 25, .k = 2, .seed = 2}, testing::lookup_learner());
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto p = model.predict(train.X.row(i));
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(p[j], train.Y(i, j), 1e-8 * std::max(1.0, std::abs(train.Y(i, j))));
  }
}

TEST(TrainRlc, ExtendingRLeavesEarlierModelsUnchanged) {
  const auto data = testing::correlated_targets(50, 3, 3, 0.5, 7);
  const auto m100 = train_rlc(data, {.r = 100, .k = 2, .seed = 5, .gbm = {.iterations = 3}});
  const auto m101 = train_rlc(data, {.r = 101, .k = 2, .seed = 5, .gbm = {.iterations = 3}});
  EXPECT_EQ(m101.coefficients().prefix(100), m100.coefficients());
  const auto cut = m101.prefix(100);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(cut.predict(data.X.row(i)), m100.predict(data.X.row(i)));
  EXPECT_THROW(m101.prefix(2), ParameterError);
  EXPECT_THROW(m101.prefix(102), ParameterError);
}

TEST(TrainSt, SingleTargetMatchesPlainBoosting) {
  const auto data = testing::correlated_targets(60, 3, 1, 0.5, 8);
  const auto st = train_st(data, quick());
  const auto direct = fit_gbm(data.X, data.Y.column(0), quick());
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(predict_st(st, data.X.row(i))[0], direct.predict(data.X.row(i)));
}

TEST(TrainSt, ZeroIterationsPredictsTrainMeans) {
  const auto data = testing::correlated_targets(30, 2, 3, 0.5, 9);
  const auto st = train_st(data, {.iterations = 0});
  const auto p = st.predict(data.X.row(0));
  for (std::size_t j = 0; j < 3; ++j) {
    const auto col = data.Y.column(j);
    EXPECT_NEAR(p[j], std::accumulate(col.begin(), col.end(), 0.0) / 30.0, 1e-12);
  }
}

TEST(TrainSt, TargetPermutationEquivariance) {
  const auto data = testing::correlated_targets(50, 3, 4, 0.5, 10);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  Dataset shuffled = data;
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = 0; j < 4; ++j) shuffled.Y(i, j) = data.Y(i, perm[j]);
  const auto a = train_st(data, quick());
  const auto b = train_st(shuffled, quick(), 3);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto pa = a.predict(data.X.row(i));
    const auto pb = b.predict(data.X.row(i));
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(pb[j], pa[perm[j]]);
  }
}

class BundleTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("rlc_bundle_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(BundleTest, RlcRoundTrip) {
  const auto data = testing::correlated_targets(60, 3, 3, 0.5, 11);
  const auto model = train_rlc(data, {.r = 9, .k = 2, .seed = 77, .gbm = quick()});
  save_bundle(dir_, model);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "manifest.json"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "coefficients.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "normalizer.csv"));
  const auto loaded = std::get<RlcModel>(load_bundle(dir_));
  EXPECT_EQ(loaded.coefficients(), model.coefficients());
  EXPECT_EQ(loaded.normalizer(), model.normalizer());
  EXPECT_EQ(loaded.target_names(), data.target_names);
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(loaded.predict(data.X.row(i)), model.predict(data.X.row(i)));

  const auto info = inspect_bundle(dir_);
  EXPECT_EQ(info.kind, "rlc");
  EXPECT_EQ(info.version, kBundleVersion);
  EXPECT_EQ(info.combinations, 9u);
  EXPECT_EQ(info.k, 2u);
  EXPECT_EQ(info.seed, 77u);
  EXPECT_EQ(info.targets, 3u);
  EXPECT_EQ(info.inputs, 3u);
  ASSERT_EQ(info.model_seeds.size(), 9u);
  EXPECT_EQ(info.model_seeds[4], model_seed(77, 4));
  EXPECT_NE(info.describe().find("rlc"), std::string::npos);
}

TEST_F(BundleTest, StRoundTrip) {
  const auto data = testing::correlated_targets(40, 2, 2, 0.5, 12);
  const auto model = train_st(data, quick());
  save_bundle(dir_, model);
  const auto loaded = std::get<StModel>(load_bundle(dir_));
  EXPECT_EQ(loaded.gbm(), model.gbm());
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(loaded.predict(data.X.row(i)), model.predict(data.X.row(i)));
  EXPECT_EQ(inspect_bundle(dir_).kind, "st");
}

TEST_F(BundleTest, MissingBundleIsAnError) {
  EXPECT_THROW(load_bundle(dir_), Error);
  EXPECT_THROW(inspect_bundle(dir_), Error);
}

TEST_F(BundleTest, NonGbmModelsCannotBeSaved) {
  const auto data = affine_targets(20, 3, 1);
  const auto model = train_rlc(data, {.r = 4, .k = 2, .seed = 1}, testing::affine_learner());
  EXPECT_THROW(save_bundle(dir_, model), Error);
}

}  // namespace
}  // namespace rlc
