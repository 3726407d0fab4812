#include "rlc/ensemble.hpp"

#include "rlc/error.hpp"
#include "rlc/parallel.hpp"
#include "rlc/random.hpp"

namespace rlc {

Learner gbm_learner(GbmConfig config) {
  config.validate();
  return [config](const Matrix& X, const SortedFeatures& sorted, std::span<const double> y,
                  std::uint64_t seed) -> std::shared_ptr<const Regressor> {
    GbmConfig c = config;
    c.seed = seed;
    return std::make_shared<GbmRegressor>(fit_gbm(X, sorted, y, c));
  };
}

Matrix MultiTargetModel::predict_all(const Matrix& X) const {
  Matrix out(X.rows(), num_targets());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto row = predict(X.row(i));
    std::copy(row.begin(), row.end(), out.row(i).begin());
  }
  return out;
}

std::uint64_t model_seed(std::uint64_t master, std::size_t index) {
  // Separate stream family from the coefficient columns, which use derive_seed(master, j).
  return derive_seed(mix64(master ^ 0x6a09e667f3bcc909ULL), index);
}

RlcModel::RlcModel(RlcParams params, Normalizer normalizer, CoefficientMatrix C,
                   std::vector<std::shared_ptr<const Regressor>> models, std::vector<std::string> input_names,
                   std::vector<std::string> target_names)
    : params_(params),
      normalizer_(std::move(normalizer)),
      C_(std::move(C)),
      models_(std::move(models)),
      decoder_(std::make_shared<Decoder>(C_.matrix())),
      input_names_(std::move(input_names)),
      target_names_(std::move(target_names)) {
  if (models_.size() != C_.combinations())
    throw DimensionError("RLC model count " + std::to_string(models_.size()) + " differs from r=" +
                         std::to_string(C_.combinations()));
  if (normalizer_.size() != C_.targets()) throw DimensionError("RLC normalizer target count differs from q");
  params_.r = C_.combinations();
}

Vector RlcModel::predict(std::span<const double> x) const {
  Vector z(models_.size());
  for (std::size_t i = 0; i < models_.size(); ++i) z[i] = models_[i]->predict(x);
  Vector y = decoder_->decode(z);
  normalizer_.invert_in_place(y);
  return y;
}

RlcModel RlcModel::prefix(std::size_t r) const {
  if (r < C_.targets() || r > C_.combinations())
    throw ParameterError("prefix r=" + std::to_string(r) + " outside [q, " + std::to_string(C_.combinations()) + "]");
  std::vector<std::shared_ptr<const Regressor>> models(models_.begin(),
                                                      models_.begin() + static_cast<std::ptrdiff_t>(r));
  RlcParams p = params_;
  p.r = r;
  return RlcModel(p, normalizer_, C_.prefix(r), std::move(models), input_names_, target_names_);
}

StModel::StModel(GbmConfig gbm, std::vector<std::shared_ptr<const Regressor>> models,
                 std::vector<std::string> input_names, std::vector<std::string> target_names)
    : gbm_(gbm), models_(std::move(models)), input_names_(std::move(input_names)),
      target_names_(std::move(target_names)) {
  if (models_.empty()) throw DimensionError("ST model needs at least one target");
}

Vector StModel::predict(std::span<const double> x) const {
  Vector out(models_.size());
  for (std::size_t j = 0; j < models_.size(); ++j) out[j] = models_[j]->predict(x);
  return out;
}

RlcModel train_rlc(const Dataset& train, const RlcParams& params, std::size_t jobs) {
  return train_rlc(train, params, gbm_learner(params.gbm), jobs);
}

RlcModel train_rlc(const Dataset& train, const RlcParams& params, const Learner& learner, std::size_t jobs) {
  const std::size_t q = train.num_targets();
  if (params.r < q)
    throw ParameterError("r=" + std::to_string(params.r) + " is smaller than the " + std::to_string(q) +
                         " targets");
  if (train.size() == 0) throw DimensionError("RLC: empty training set");
  auto normalizer = Normalizer::fit(train.Y);
  auto C = build_coefficient_matrix(q, params.r, params.k, params.seed);
  const Matrix Z = encode(normalizer.apply(train.Y), C);
  const SortedFeatures sorted(train.X);

  std::vector<std::shared_ptr<const Regressor>> models(params.r);
  parallel_for(params.r, jobs, [&](std::size_t i) {
    const Vector z = Z.column(i);
    models[i] = learner(train.X, sorted, z, model_seed(params.seed, i));
  });
  return RlcModel(params, std::move(normalizer), std::move(C), std::move(models), train.input_names,
                  train.target_names);
}

Vector predict_rlc(const RlcModel& model, std::span<const double> x) { return model.predict(x); }

StModel train_st(const Dataset& train, const GbmConfig& gbm, std::size_t jobs) {
  return train_st(train, gbm, gbm_learner(gbm), jobs);
}

StModel train_st(const Dataset& train, const GbmConfig& gbm, const Learner& learner, std::size_t jobs) {
  if (train.size() == 0) throw DimensionError("ST: empty training set");
  const SortedFeatures sorted(train.X);
  std::vector<std::shared_ptr<const Regressor>> models(train.num_targets());
  parallel_for(models.size(), jobs, [&](std::size_t j) {
    const Vector y = train.Y.column(j);
    models[j] = learner(train.X, sorted, y, model_seed(gbm.seed, j));
  });
  return StModel(gbm, std::move(models), train.input_names, train.target_names);
}

Vector predict_st(const StModel& model, std::span<const double> x) { return model.predict(x); }

}  // namespace rlc
