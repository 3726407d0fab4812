#include "rlc/gbtree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "rlc/error.hpp"

namespace rlc {
namespace {

struct Split {
  std::uint32_t feature = TreeNode::kNone;
  double threshold = 0.0;
  double gain = 0.0;
  bool valid() const { return feature != TreeNode::kNone; }
};

struct Leaf {
  std::uint32_t node = 0;
  std::size_t count = 0;
  double sum = 0.0;
  double lo = 0.0;  // smallest and largest target in the leaf
  double hi = 0.0;
  Split best;
  bool evaluated = false;
};

// Threshold strictly between a < b that still sends b to the right.
double midpoint(double a, double b) {
  const double mid = a + (b - a) * 0.5;
  return mid < b ? mid : a;
}

class TreeGrower {
 public:
  TreeGrower(const Matrix& X, const SortedFeatures& sorted, std::span<const double> y,
             std::size_t max_leaves, std::size_t min_leaf)
      : X_(X), sorted_(sorted), y_(y), max_leaves_(max_leaves), min_leaf_(min_leaf),
        leaf_of_(y.size(), 0) {}

  RegressionTree grow(std::vector<double>* fitted) {
    nodes_.assign(1, TreeNode{});
    Leaf root;
    root.count = y_.size();
    root.lo = root.hi = y_.empty() ? 0.0 : y_[0];
    for (double v : y_) {
      root.sum += v;
      root.lo = std::min(root.lo, v);
      root.hi = std::max(root.hi, v);
    }
    leaves_.assign(1, root);

    while (leaves_.size() < max_leaves_) {
      evaluate_pending();
      std::size_t pick = leaves_.size();
      for (std::size_t l = 0; l < leaves_.size(); ++l) {
        const auto& leaf = leaves_[l];
        if (!leaf.best.valid()) continue;
        if (pick == leaves_.size() || leaf.best.gain > leaves_[pick].best.gain) pick = l;
      }
      if (pick == leaves_.size()) break;
      split_leaf(pick);
    }

    for (const auto& leaf : leaves_)
      nodes_[leaf.node].value = leaf.count ? leaf.sum / static_cast<double>(leaf.count) : 0.0;
    if (fitted) {
      fitted->resize(y_.size());
      for (std::size_t i = 0; i < y_.size(); ++i) (*fitted)[i] = nodes_[leaves_[leaf_of_[i]].node].value;
    }
    return RegressionTree(std::move(nodes_));
  }

 private:
  struct ScanState {
    std::size_t left_count = 0;
    double left_sum = 0.0;
    double last_x = 0.0;
  };

  // One sweep per feature over the presorted rows scores every leaf that
  // has not been evaluated yet.
  void evaluate_pending() {
    std::vector<bool> pending(leaves_.size(), false);
    bool any = false;
    for (std::size_t l = 0; l < leaves_.size(); ++l) {
      auto& leaf = leaves_[l];
      if (leaf.evaluated) continue;
      leaf.evaluated = true;
      leaf.best = Split{};
      // Constant leaves and leaves too small to split stay terminal.
      if (leaf.lo == leaf.hi || leaf.count < 2 * min_leaf_) continue;
      pending[l] = true;
      any = true;
    }
    if (!any) return;

    std::vector<ScanState> state(leaves_.size());
    for (std::size_t f = 0; f < X_.cols(); ++f) {
      std::fill(state.begin(), state.end(), ScanState{});
      for (auto row : sorted_.order(f)) {
        const auto l = leaf_of_[row];
        if (!pending[l]) continue;
        auto& st = state[l];
        auto& leaf = leaves_[l];
        const double x = X_(row, f);
        if (st.left_count >= min_leaf_ && x > st.last_x && leaf.count - st.left_count >= min_leaf_) {
          const double n_left = static_cast<double>(st.left_count);
          const double n_right = static_cast<double>(leaf.count - st.left_count);
          const double diff = st.left_sum / n_left - (leaf.sum - st.left_sum) / n_right;
          const double gain = n_left * n_right / static_cast<double>(leaf.count) * diff * diff;
          if (gain > 0.0 && gain > leaf.best.gain) {
            leaf.best.feature = static_cast<std::uint32_t>(f);
            leaf.best.threshold = midpoint(st.last_x, x);
            leaf.best.gain = gain;
          }
        }
        ++st.left_count;
        st.left_sum += y_[row];
        st.last_x = x;
      }
    }
  }

  void split_leaf(std::size_t l) {
    const Split split = leaves_[l].best;
    const auto parent = leaves_[l].node;
    const auto left_node = static_cast<std::uint32_t>(nodes_.size());
    const auto right_node = left_node + 1;
    nodes_.resize(nodes_.size() + 2);
    nodes_[parent].feature = split.feature;
    nodes_[parent].threshold = split.threshold;
    nodes_[parent].left = left_node;
    nodes_[parent].right = right_node;

    const auto right_leaf = static_cast<std::uint32_t>(leaves_.size());
    Leaf left, right;
    left.node = left_node;
    right.node = right_node;
    bool left_seen = false, right_seen = false;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      if (leaf_of_[i] != l) continue;
      const double v = y_[i];
      Leaf* dst;
      bool* seen;
      if (X_(i, split.feature) <= split.threshold) {
        dst = &left;
        seen = &left_seen;
      } else {
        leaf_of_[i] = right_leaf;
        dst = &right;
        seen = &right_seen;
      }
      if (!*seen) {
        dst->lo = dst->hi = v;
        *seen = true;
      }
      ++dst->count;
      dst->sum += v;
      dst->lo = std::min(dst->lo, v);
      dst->hi = std::max(dst->hi, v);
    }
    leaves_[l] = left;
    leaves_.push_back(right);
  }

  const Matrix& X_;
  const SortedFeatures& sorted_;
  std::span<const double> y_;
  std::size_t max_leaves_;
  std::size_t min_leaf_;
  std::vector<std::uint32_t> leaf_of_;
  std::vector<TreeNode> nodes_;
  std::vector<Leaf> leaves_;
};

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_real(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || *end != '\0') throw ParseError("bad real '" + token + "' in model", 0);
  return v;
}

// Reads one non-empty line and checks its leading keyword.
std::istringstream expect_line(std::istream& in, const std::string& keyword, std::size_t& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    if (head != keyword) throw ParseError("expected '" + keyword + "', got '" + head + "'", line_no);
    return ss;
  }
  throw ParseError("unexpected end of model while looking for '" + keyword + "'", line_no);
}

}  // namespace

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw ParameterError("a tree needs at least one node");
  for (const auto& n : nodes_) {
    if (n.is_leaf() != (n.right == TreeNode::kNone))
      throw ParameterError("internal tree node with a single child");
    if (!n.is_leaf() && (n.left >= nodes_.size() || n.right >= nodes_.size()))
      throw ParameterError("tree child index out of range");
    if (n.is_leaf() && !std::isfinite(n.value)) throw ParameterError("non-finite leaf value");
  }
}

RegressionTree RegressionTree::leaf(double value) {
  TreeNode n;
  n.value = value;
  return RegressionTree({n});
}

double RegressionTree::predict(std::span<const double> x) const {
  std::uint32_t i = 0;
  while (!nodes_[i].is_leaf()) i = x[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  return nodes_[i].value;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

void GbmConfig::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    throw ParameterError("learning rate must lie in (0, 1]");
  if (max_leaves < 1) throw ParameterError("max_leaves must be at least 1");
  if (min_leaf < 1) throw ParameterError("min_leaf must be at least 1");
}

double GbmModel::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return intercept + learning_rate * sum;
}

GbmModel GbmModel::prefix(std::size_t count) const {
  GbmModel out = *this;
  if (count < out.trees.size()) out.trees.resize(count);
  return out;
}

SortedFeatures::SortedFeatures(const Matrix& X)
    : rows_(X.rows()), features_(X.cols()), orders_(X.rows() * X.cols()) {
  for (std::size_t f = 0; f < features_; ++f) {
    auto first = orders_.begin() + static_cast<std::ptrdiff_t>(f * rows_);
    auto last = first + static_cast<std::ptrdiff_t>(rows_);
    std::iota(first, last, std::uint32_t{0});
    std::stable_sort(first, last, [&](std::uint32_t a, std::uint32_t b) { return X(a, f) < X(b, f); });
  }
}

RegressionTree fit_regression_tree(const Matrix& X, std::span<const double> target,
                                   std::size_t max_leaves, std::size_t min_leaf) {
  return fit_regression_tree(X, SortedFeatures(X), target, max_leaves, min_leaf);
}

RegressionTree fit_regression_tree(const Matrix& X, const SortedFeatures& sorted,
                                   std::span<const double> target, std::size_t max_leaves,
                                   std::size_t min_leaf) {
  if (X.rows() != target.size()) throw DimensionError("tree: X and target lengths differ");
  if (X.rows() == 0) throw DimensionError("tree: no training rows");
  if (max_leaves < 1 || min_leaf < 1) throw ParameterError("tree: max_leaves and min_leaf must be >= 1");
  return TreeGrower(X, sorted, target, max_leaves, min_leaf).grow(nullptr);
}

GbmModel fit_gbm(const Matrix& X, std::span<const double> y, const GbmConfig& config) {
  return fit_gbm(X, SortedFeatures(X), y, config);
}

GbmModel fit_gbm(const Matrix& X, const SortedFeatures& sorted, std::span<const double> y,
                 const GbmConfig& config) {
  config.validate();
  if (X.rows() != y.size()) throw DimensionError("gbm: X and y lengths differ");
  if (y.empty()) throw DimensionError("gbm: no training rows");
  if (sorted.rows() != X.rows() || sorted.features() != X.cols())
    throw DimensionError("gbm: presorted features do not match X");

  GbmModel model;
  model.learning_rate = config.learning_rate;
  model.iterations = config.iterations;
  model.intercept = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  model.trees.reserve(config.iterations);

  std::vector<double> residual(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - model.intercept;
  std::vector<double> fitted;
  for (std::size_t t = 0; t < config.iterations; ++t) {
    TreeGrower grower(X, sorted, residual, config.max_leaves, config.min_leaf);
    model.trees.push_back(grower.grow(&fitted));
    for (std::size_t i = 0; i < y.size(); ++i) residual[i] -= config.learning_rate * fitted[i];
  }
  return model;
}

void write_gbm(std::ostream& out, const GbmModel& model) {
  out << "rlc-gbm 1\n";
  out << "intercept " << hex(model.intercept) << '\n';
  out << "learning_rate " << hex(model.learning_rate) << '\n';
  out << "iterations " << model.iterations << '\n';
  out << "trees " << model.trees.size() << '\n';
  for (const auto& tree : model.trees) {
    out << "tree " << tree.nodes().size() << '\n';
    for (const auto& n : tree.nodes()) {
      if (n.is_leaf())
        out << "leaf " << hex(n.value) << '\n';
      else
        out << "split " << n.feature << ' ' << hex(n.threshold) << ' ' << n.left << ' ' << n.right << '\n';
    }
  }
  out << "end\n";
}

GbmModel read_gbm(std::istream& in) {
  std::size_t line_no = 0;
  auto header = expect_line(in, "rlc-gbm", line_no);
  int version = 0;
  header >> version;
  if (version != 1) throw ParseError("unsupported model version " + std::to_string(version), line_no);

  GbmModel model;
  std::string token;
  expect_line(in, "intercept", line_no) >> token;
  model.intercept = parse_real(token);
  expect_line(in, "learning_rate", line_no) >> token;
  model.learning_rate = parse_real(token);
  if (!(expect_line(in, "iterations", line_no) >> model.iterations))
    throw ParseError("bad iteration count", line_no);
  std::size_t tree_count = 0;
  if (!(expect_line(in, "trees", line_no) >> tree_count)) throw ParseError("bad tree count", line_no);
  model.trees.reserve(tree_count);
  for (std::size_t t = 0; t < tree_count; ++t) {
    std::size_t node_count = 0;
    if (!(expect_line(in, "tree", line_no) >> node_count) || node_count == 0)
      throw ParseError("bad node count", line_no);
    std::vector<TreeNode> nodes(node_count);
    for (auto& n : nodes) {
      std::string line;
      do {
        if (!std::getline(in, line)) throw ParseError("truncated tree", line_no);
        ++line_no;
      } while (line.find_first_not_of(" \t\r") == std::string::npos);
      std::istringstream ss(line);
      std::string kind;
      ss >> kind;
      if (kind == "leaf") {
        if (!(ss >> token)) throw ParseError("leaf without value", line_no);
        n.value = parse_real(token);
      } else if (kind == "split") {
        if (!(ss >> n.feature >> token >> n.left >> n.right)) throw ParseError("malformed split", line_no);
        n.threshold = parse_real(token);
      } else {
        throw ParseError("unknown node record '" + kind + "'", line_no);
      }
    }
    try {
      model.trees.emplace_back(std::move(nodes));
    } catch (const ParameterError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  expect_line(in, "end", line_no);
  return model;
}

}  // namespace rlc
