#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spikelens/error.hpp"
#include "spikelens/state_space.hpp"

namespace spikelens {

/// One node of a flattened CART tree. Rows go left iff x[feature] <= threshold.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  // Class-weighted positive fraction of the training rows reaching the node.
  double value = 0.0;
  // Training rows reaching the node (bootstrap duplicates counted).
  std::size_t n_samples = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Nodes stored in preorder; nodes[0] is the root and every child index is
/// larger than its parent's.
class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(std::size_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }

  double predict(std::span<const double> x) const;
  // Number of nodes visited from root to leaf, leaf included.
  std::size_t path_length(std::span<const double> x) const;
  std::size_t depth() const;

  // Structural checks: child indices in range and increasing, each non-root
  // node referenced exactly once, sample counts consistent, leaf values in
  // [0, 1]. Throws Error(code) on the first violation.
  void validate(std::size_t n_features, ErrorCode code = ErrorCode::MalformedTree) const;

  bool operator==(const Tree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

struct ForestParams {
  std::size_t n_trees = 200;
  std::size_t max_depth = 12;
  std::size_t min_samples_leaf = 2;
  std::size_t mtry = 0;  // 0 = ceil(sqrt(n_features))
  std::uint64_t seed = 42;
  bool class_weighting = true;
  bool stratified_bootstrap = true;
  bool bootstrap = true;
  double decision_threshold = 0.5;

  bool operator==(const ForestParams&) const = default;
};

/// Best split over `features` for the rows `sample` (row indices into
/// `data`, duplicates allowed) with per-entry weights. Candidates are the
/// midpoints between consecutive distinct values; each side must keep at
/// least `min_samples_leaf` entries. The score is the weighted Gini decrease
/// G(parent) - W_L/W G(left) - W_R/W G(right). Scores within kSplitTieEps
/// count as equal and resolve to the lowest feature, then lowest threshold.
struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
};

inline constexpr double kSplitTieEps = 1e-12;

SplitChoice best_split(const Dataset& data, std::span<const std::size_t> sample,
                       std::span<const double> weights, std::span<const std::size_t> features,
                       std::size_t min_samples_leaf);

// Weighted Gini impurity 2p(1-p) of a node with the given weighted mass.
double gini(double positive_weight, double total_weight);

// Per-class weights n / (2 n_c); both 1.0 when weighting is off.
std::pair<double, double> class_weights(const Dataset& data, bool enabled);

// Grows one tree on `sample` (row indices, duplicates allowed). The RNG only
// drives per-node feature sampling.
Tree grow_tree(const Dataset& data, std::span<const std::size_t> sample,
               const ForestParams& params, std::uint64_t tree_seed);

/// Row order used for bootstrap draws: rows sorted by content (features,
/// then label), then shuffled with a seed derived from params.seed. Because
/// the order depends only on row content, permuting the training rows leaves
/// every bootstrap sample, and so the forest, unchanged.
std::vector<std::size_t> canonical_order(const Dataset& data, std::uint64_t seed);

// Bootstrap sample (row indices) for one tree.
std::vector<std::size_t> bootstrap_sample(const Dataset& data, std::span<const std::size_t> order,
                                          const ForestParams& params, std::size_t tree_index);

class Forest {
 public:
  Forest() = default;
  Forest(std::vector<Tree> trees, std::vector<std::string> feature_names, ForestParams params,
         double base_rate);

  const std::vector<Tree>& trees() const { return trees_; }
  std::size_t n_features() const { return feature_names_.size(); }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const ForestParams& params() const { return params_; }
  double base_rate() const { return base_rate_; }

  // Mean of per-tree leaf values; throws DimensionMismatch.
  double predict_proba(std::span<const double> x) const;
  int predict(std::span<const double> x) const {
    return predict_proba(x) >= params_.decision_threshold ? 1 : 0;
  }

  bool operator==(const Forest&) const = default;

 private:
  std::vector<Tree> trees_;
  std::vector<std::string> feature_names_;
  ForestParams params_;
  double base_rate_ = 0.0;
};

// Trees are grown in parallel; tree t uses the stream seeded with seed + t,
// so the result does not depend on the thread count.
Forest train(const Dataset& data, const ForestParams& params);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

struct Metrics {
  Confusion confusion;
  double accuracy = 0.0;
  double precision = 0.0;  // 0 when nothing is predicted positive
  double recall = 0.0;     // 0 when there are no positives
  double false_positive_rate = 0.0;  // FP / (FP + TN)
};

Metrics metrics_from(const Confusion& c);
Metrics evaluate(const Forest& forest, const Dataset& test);

struct TrainTestSplit {
  std::vector<std::size_t> train;  // ascending row indices
  std::vector<std::size_t> test;
};

// Stratified by label, deterministic in `seed`. The train side receives
// round(ratio * n) rows and round(ratio * n_pos) positives; each side keeps
// at least one row of a class when that class has two or more rows.
TrainTestSplit split_train_test(const Dataset& data, double ratio, std::uint64_t seed);

// Model file: JSON document, format tag "spikelens.forest", version 1.
inline constexpr int kForestFormatVersion = 1;
std::string forest_to_json(const Forest& forest);
Forest forest_from_json(std::string_view text);
void save(const Forest& forest, const std::filesystem::path& path);
Forest load_forest(const std::filesystem::path& path);

}  // namespace spikelens
