#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "rlc/ensemble.hpp"

namespace rlc {

// A bundle is a directory:
//   manifest.json        format, version, kind, shapes, params, seeds, names
//   coefficients.csv     q x r coefficient matrix (RLC only)
//   normalizer.csv       target,min,max (RLC only)
//   models/model_NNNN.gbm one serialized GbmModel per combination or target

inline constexpr int kBundleVersion = 1;

/// Only GbmRegressor-backed models can be saved.
void save_bundle(const std::filesystem::path& dir, const RlcModel& model);
void save_bundle(const std::filesystem::path& dir, const StModel& model);

std::variant<RlcModel, StModel> load_bundle(const std::filesystem::path& dir);

/// Manifest contents without loading the models.
struct BundleInfo {
  std::string kind;  // "rlc" or "st"
  int version = 0;
  std::size_t inputs = 0;
  std::size_t targets = 0;
  std::size_t combinations = 0;  // r, RLC only
  std::size_t k = 0;             // RLC only
  std::uint64_t seed = 0;
  GbmConfig gbm;
  std::vector<std::uint64_t> model_seeds;
  std::vector<std::string> input_names;
  std::vector<std::string> target_names;

  std::string describe() const;
};

BundleInfo inspect_bundle(const std::filesystem::path& dir);

}  // namespace rlc
