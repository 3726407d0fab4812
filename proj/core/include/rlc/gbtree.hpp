#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rlc/matrix.hpp"

namespace rlc {

/// One node of a regression tree. Internal nodes route x to `left` iff
/// x[feature] <= threshold; leaves carry `value`.
struct TreeNode {
  static constexpr std::uint32_t kNone = 0xffffffffu;

  std::uint32_t feature = kNone;
  double threshold = 0.0;
  std::uint32_t left = kNone;
  std::uint32_t right = kNone;
  double value = 0.0;

  bool is_leaf() const { return left == kNone; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary regression tree stored as a node array rooted at index 0.
class RegressionTree {
 public:
  RegressionTree() : nodes_{TreeNode{}} {}
  explicit RegressionTree(std::vector<TreeNode> nodes);

  static RegressionTree leaf(double value);

  double predict(std::span<const double> x) const;
  std::size_t leaf_count() const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

struct GbmConfig {
  std::size_t iterations = 100;
  double learning_rate = 0.1;
  std::size_t max_leaves = 4;
  std::size_t min_leaf = 1;
  /// Recorded for provenance; plain boosting draws no random numbers.
  std::uint64_t seed = 0;

  /// Throws ParameterError when a field is out of range.
  void validate() const;
  friend bool operator==(const GbmConfig&, const GbmConfig&) = default;
};

/// Additive model: intercept + learning_rate * sum of tree outputs.
struct GbmModel {
  double intercept = 0.0;
  double learning_rate = 0.1;
  std::size_t iterations = 0;
  std::vector<RegressionTree> trees;

  double predict(std::span<const double> x) const;
  /// Copy keeping only the first `count` trees.
  GbmModel prefix(std::size_t count) const;

  friend bool operator==(const GbmModel&, const GbmModel&) = default;
};

/// Per-feature row orderings of a fixed input matrix, shared across the
/// trees of one boosting run and across models trained on the same rows.
class SortedFeatures {
 public:
  explicit SortedFeatures(const Matrix& X);
  std::span<const std::uint32_t> order(std::size_t feature) const {
    return {orders_.data() + feature * rows_, rows_};
  }
  std::size_t rows() const { return rows_; }
  std::size_t features() const { return features_; }

 private:
  std::size_t rows_;
  std::size_t features_;
  std::vector<std::uint32_t> orders_;
};

/// Best-first least-squares tree: the leaf whose best split gives the largest
/// SSE reduction is split next, until `max_leaves` or no admissible split.
/// Thresholds are midpoints between consecutive distinct feature values; ties
/// go to the lowest feature index, then the lowest threshold.
RegressionTree fit_regression_tree(const Matrix& X, std::span<const double> target,
                                   std::size_t max_leaves, std::size_t min_leaf = 1);
RegressionTree fit_regression_tree(const Matrix& X, const SortedFeatures& sorted,
                                   std::span<const double> target, std::size_t max_leaves,
                                   std::size_t min_leaf = 1);

/// Squared-loss gradient boosting from the mean of y.
GbmModel fit_gbm(const Matrix& X, std::span<const double> y, const GbmConfig& config);
GbmModel fit_gbm(const Matrix& X, const SortedFeatures& sorted, std::span<const double> y,
                 const GbmConfig& config);

/// Text format "rlc-gbm 1"; reals are written as hex floats so a reload is bit-exact.
void write_gbm(std::ostream& out, const GbmModel& model);
GbmModel read_gbm(std::istream& in);

}  // namespace rlc
