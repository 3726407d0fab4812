#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlc/coding.hpp"
#include "rlc/dataset.hpp"
#include "rlc/gbtree.hpp"
#include "rlc/matrix.hpp"

namespace rlc {

/// Single-output regressor: the contract both RLC and ST train against.
class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual double predict(std::span<const double> x) const = 0;
};

class GbmRegressor final : public Regressor {
 public:
  explicit GbmRegressor(GbmModel model) : model_(std::move(model)) {}
  double predict(std::span<const double> x) const override { return model_.predict(x); }
  const GbmModel& model() const { return model_; }

 private:
  GbmModel model_;
};

/// Fits one single-output model. `sorted` is the presorted view of X, shared
/// by every model trained on the same rows; `seed` is the per-model seed.
using Learner = std::function<std::shared_ptr<const Regressor>(
    const Matrix& X, const SortedFeatures& sorted, std::span<const double> y, std::uint64_t seed)>;

/// Gradient boosting with `config`; the per-model seed replaces config.seed.
Learner gbm_learner(GbmConfig config);

/// Anything that maps an input row to q target predictions.
class MultiTargetModel {
 public:
  virtual ~MultiTargetModel() = default;
  virtual Vector predict(std::span<const double> x) const = 0;
  virtual std::size_t num_targets() const = 0;
  Matrix predict_all(const Matrix& X) const;
};

struct RlcParams {
  std::size_t r = 500;
  std::size_t k = 2;
  std::uint64_t seed = 0;
  GbmConfig gbm;
};

/// Seed handed to the learner of combination `index`.
std::uint64_t model_seed(std::uint64_t master, std::size_t index);

/// Trained random-linear-combination ensemble.
class RlcModel final : public MultiTargetModel {
 public:
  RlcModel(RlcParams params, Normalizer normalizer, CoefficientMatrix C,
           std::vector<std::shared_ptr<const Regressor>> models, std::vector<std::string> input_names = {},
           std::vector<std::string> target_names = {});

  /// Predicts the r encoded targets, decodes them by least squares and maps
  /// the result back to the original target scale. No clipping.
  Vector predict(std::span<const double> x) const override;
  std::size_t num_targets() const override { return C_.targets(); }

  /// The ensemble restricted to its first `r` combinations. Because columns
  /// and model seeds depend only on their index, this equals a model trained
  /// with r combinations from the same seed.
  RlcModel prefix(std::size_t r) const;

  const RlcParams& params() const { return params_; }
  const Normalizer& normalizer() const { return normalizer_; }
  const CoefficientMatrix& coefficients() const { return C_; }
  const std::vector<std::shared_ptr<const Regressor>>& models() const { return models_; }
  const std::vector<std::string>& input_names() const { return input_names_; }
  const std::vector<std::string>& target_names() const { return target_names_; }

 private:
  RlcParams params_;
  Normalizer normalizer_;
  CoefficientMatrix C_;
  std::vector<std::shared_ptr<const Regressor>> models_;
  std::shared_ptr<const Decoder> decoder_;
  std::vector<std::string> input_names_;
  std::vector<std::string> target_names_;
};

/// One independent model per original (unnormalized) target.
class StModel final : public MultiTargetModel {
 public:
  StModel(GbmConfig gbm, std::vector<std::shared_ptr<const Regressor>> models,
          std::vector<std::string> input_names = {}, std::vector<std::string> target_names = {});

  Vector predict(std::span<const double> x) const override;
  std::size_t num_targets() const override { return models_.size(); }

  const GbmConfig& gbm() const { return gbm_; }
  const std::vector<std::shared_ptr<const Regressor>>& models() const { return models_; }
  const std::vector<std::string>& input_names() const { return input_names_; }
  const std::vector<std::string>& target_names() const { return target_names_; }

 private:
  GbmConfig gbm_;
  std::vector<std::shared_ptr<const Regressor>> models_;
  std::vector<std::string> input_names_;
  std::vector<std::string> target_names_;
};

/// Fits the normalizer on `train`, builds C, encodes, and fits one model per
/// column of Z. Results do not depend on `jobs`.
RlcModel train_rlc(const Dataset& train, const RlcParams& params, std::size_t jobs = 1);
RlcModel train_rlc(const Dataset& train, const RlcParams& params, const Learner& learner,
                   std::size_t jobs = 1);
Vector predict_rlc(const RlcModel& model, std::span<const double> x);

StModel train_st(const Dataset& train, const GbmConfig& gbm, std::size_t jobs = 1);
StModel train_st(const Dataset& train, const GbmConfig& gbm, const Learner& learner, std::size_t jobs = 1);
Vector predict_st(const StModel& model, std::span<const double> x);

}  // namespace rlc
