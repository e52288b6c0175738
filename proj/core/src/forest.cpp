#include "spikelens/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "spikelens/rng.hpp"
#include "spikelens/text.hpp"

namespace spikelens {

double Tree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                         : n.right);
  }
  return nodes_[i].value;
}

std::size_t Tree::path_length(std::span<const double> x) const {
  std::size_t i = 0;
  std::size_t visited = 1;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                         : n.right);
    ++visited;
  }
  return visited;
}

std::size_t Tree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (nodes_[i].is_leaf()) continue;
    d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
    d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
  }
  return deepest;
}

void Tree::validate(std::size_t n_features, ErrorCode code) const {
  if (nodes_.empty()) fail(code, "tree has no nodes");
  std::vector<int> referenced(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    const std::string where = "node " + std::to_string(i) + ": ";
    if (!(n.value >= 0.0 && n.value <= 1.0)) fail(code, where + "leaf value outside [0, 1]");
    if (n.n_samples == 0) fail(code, where + "no training samples");
    if (n.is_leaf()) {
      if (n.feature != -1 || n.left != -1 || n.right != -1) {
        fail(code, where + "leaf with children or feature");
      }
      continue;
    }
    if (static_cast<std::size_t>(n.feature) >= n_features) fail(code, where + "feature out of range");
    if (!std::isfinite(n.threshold)) fail(code, where + "non-finite threshold");
    for (int child : {n.left, n.right}) {
      if (child <= static_cast<int>(i) || child >= static_cast<int>(nodes_.size())) {
        fail(code, where + "child index out of order");
      }
      ++referenced[static_cast<std::size_t>(child)];
    }
    if (n.left == n.right) fail(code, where + "both children identical");
    const auto& l = nodes_[static_cast<std::size_t>(n.left)];
    const auto& r = nodes_[static_cast<std::size_t>(n.right)];
    if (l.n_samples + r.n_samples != n.n_samples) fail(code, where + "sample counts do not add up");
  }
  if (referenced[0] != 0) fail(code, "root referenced as a child");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (referenced[i] != 1) fail(code, "node " + std::to_string(i) + " is not a tree node");
  }
}

double gini(double positive_weight, double total_weight) {
  if (total_weight <= 0.0) return 0.0;
  const double p = positive_weight / total_weight;
  return 2.0 * p * (1.0 - p);
}

std::pair<double, double> class_weights(const Dataset& data, bool enabled) {
  if (!enabled) return {1.0, 1.0};
  const auto n = static_cast<double>(data.n_rows());
  const auto pos = static_cast<double>(data.n_positive());
  const double neg = n - pos;
  return {neg > 0 ? n / (2.0 * neg) : 1.0, pos > 0 ? n / (2.0 * pos) : 1.0};
}

SplitChoice best_split(const Dataset& data, std::span<const std::size_t> sample,
                       std::span<const double> weights, std::span<const std::size_t> features,
                       std::size_t min_samples_leaf) {
  struct Entry {
    double value;
    double weight;
    double positive;
  };

  SplitChoice best;
  const std::size_t n = sample.size();
  if (n < 2) return best;
  double total = 0.0;
  double total_pos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += weights[i];
    if (data.label(sample[i]) == 1) total_pos += weights[i];
  }
  const double parent = gini(total_pos, total);
  const std::size_t min_leaf = std::max<std::size_t>(1, min_samples_leaf);

  std::vector<std::size_t> ordered(features.begin(), features.end());
  std::sort(ordered.begin(), ordered.end());
  std::vector<Entry> entries(n);
  for (std::size_t f : ordered) {
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weights[i];
      entries[i] = Entry{data.at(sample[i], f), w, data.label(sample[i]) == 1 ? w : 0.0};
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.value < b.value; });
    double left_w = 0.0;
    double left_pos = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      left_w += entries[i - 1].weight;
      left_pos += entries[i - 1].positive;
      if (!(entries[i - 1].value < entries[i].value)) continue;
      if (i < min_leaf || n - i < min_leaf) continue;
      const double right_w = total - left_w;
      const double right_pos = total_pos - left_pos;
      const double decrease = parent - (left_w / total) * gini(left_pos, left_w) -
                              (right_w / total) * gini(right_pos, right_w);
      // Features and thresholds are visited in ascending order, so only a
      // strictly better score (beyond the tie band) replaces the incumbent.
      if (best.found && !(decrease > best.decrease + kSplitTieEps)) continue;
      const double lo = entries[i - 1].value;
      const double hi = entries[i].value;
      double mid = lo + (hi - lo) / 2.0;
      if (!(mid < hi)) mid = lo;
      best = SplitChoice{true, f, mid, decrease};
    }
  }
  return best;
}

namespace {

class TreeGrower {
 public:
  TreeGrower(const Dataset& data, const ForestParams& params, std::uint64_t seed)
      : data_(data), params_(params), rng_(derive_seed(seed, "split")) {
    std::tie(weight_neg_, weight_pos_) = class_weights(data, params.class_weighting);
    mtry_ = params.mtry == 0
                ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(data.n_features()))))
                : params.mtry;
    mtry_ = std::clamp<std::size_t>(mtry_, 1, data.n_features());
    all_features_.resize(data.n_features());
    for (std::size_t f = 0; f < all_features_.size(); ++f) all_features_[f] = f;
  }

  Tree grow(std::vector<std::size_t> sample) {
    build(std::move(sample), 0);
    return Tree(std::move(nodes_));
  }

 private:
  double weight_of(std::size_t row) const {
    return data_.label(row) == 1 ? weight_pos_ : weight_neg_;
  }

  int build(std::vector<std::size_t> sample, std::size_t depth) {
    double total = 0.0;
    double pos = 0.0;
    std::vector<double> weights(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
      weights[i] = weight_of(sample[i]);
      total += weights[i];
      if (data_.label(sample[i]) == 1) pos += weights[i];
    }
    const int id = static_cast<int>(nodes_.size());
    TreeNode leaf;
    leaf.value = total > 0.0 ? std::clamp(pos / total, 0.0, 1.0) : 0.0;
    leaf.n_samples = sample.size();
    nodes_.push_back(leaf);

    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_samples_leaf);
    if (depth >= params_.max_depth || pos == 0.0 || pos == total ||
        sample.size() < 2 * min_leaf) {
      return id;
    }

    // Partial Fisher-Yates: the first mtry entries are the sampled features.
    for (std::size_t i = 0; i < mtry_; ++i) {
      const std::size_t j = i + rng_.index(all_features_.size() - i);
      std::swap(all_features_[i], all_features_[j]);
    }
    const std::span<const std::size_t> candidates(all_features_.data(), mtry_);
    const SplitChoice split = best_split(data_, sample, weights, candidates, min_leaf);
    if (!split.found || !(split.decrease > kSplitTieEps)) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t row : sample) {
      (data_.at(row, split.feature) <= split.threshold ? left : right).push_back(row);
    }
    sample.clear();
    sample.shrink_to_fit();

    nodes_[static_cast<std::size_t>(id)].feature = static_cast<int>(split.feature);
    nodes_[static_cast<std::size_t>(id)].threshold = split.threshold;
    const int l = build(std::move(left), depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = l;
    const int r = build(std::move(right), depth + 1);
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  const Dataset& data_;
  const ForestParams& params_;
  Rng rng_;
  double weight_neg_ = 1.0;
  double weight_pos_ = 1.0;
  std::size_t mtry_ = 1;
  std::vector<std::size_t> all_features_;
  std::vector<TreeNode> nodes_;
};

void check_params(const Dataset& data, const ForestParams& params) {
  if (params.n_trees < 1) fail(ErrorCode::InvalidHyperparams, "n_trees must be at least 1");
  if (params.min_samples_leaf < 1) {
    fail(ErrorCode::InvalidHyperparams, "min_samples_leaf must be at least 1");
  }
  if (params.mtry > data.n_features()) {
    fail(ErrorCode::InvalidHyperparams, "mtry exceeds the number of features");
  }
  if (!(params.decision_threshold >= 0.0 && params.decision_threshold <= 1.0)) {
    fail(ErrorCode::InvalidHyperparams, "decision_threshold must lie in [0, 1]");
  }
  if (data.n_features() == 0) fail(ErrorCode::InvalidHyperparams, "dataset has no features");
}

}  // namespace

Tree grow_tree(const Dataset& data, std::span<const std::size_t> sample,
               const ForestParams& params, std::uint64_t tree_seed) {
  if (sample.empty()) fail(ErrorCode::TooFewRows, "cannot grow a tree on an empty sample");
  TreeGrower grower(data, params, tree_seed);
  return grower.grow(std::vector<std::size_t>(sample.begin(), sample.end()));
}

std::vector<std::size_t> canonical_order(const Dataset& data, std::uint64_t seed) {
  std::vector<std::size_t> order(data.n_rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = data.row(a);
    const auto rb = data.row(b);
    if (std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end())) return true;
    if (std::lexicographical_compare(rb.begin(), rb.end(), ra.begin(), ra.end())) return false;
    return data.label(a) < data.label(b);
  });
  Rng rng(derive_seed(seed, "canonical"));
  rng.shuffle(order.begin(), order.end());
  return order;
}

std::vector<std::size_t> bootstrap_sample(const Dataset& data, std::span<const std::size_t> order,
                                          const ForestParams& params, std::size_t tree_index) {
  if (!params.bootstrap) return {order.begin(), order.end()};
  Rng rng(params.seed + tree_index);
  std::vector<std::size_t> sample;
  sample.reserve(order.size());
  if (params.stratified_bootstrap) {
    for (int cls : {0, 1}) {
      std::vector<std::size_t> members;
      for (std::size_t row : order) {
        if (data.label(row) == cls) members.push_back(row);
      }
      for (std::size_t i = 0; i < members.size(); ++i) {
        sample.push_back(members[rng.index(members.size())]);
      }
    }
  } else {
    for (std::size_t i = 0; i < order.size(); ++i) sample.push_back(order[rng.index(order.size())]);
  }
  return sample;
}

Forest::Forest(std::vector<Tree> trees, std::vector<std::string> feature_names,
               ForestParams params, double base_rate)
    : trees_(std::move(trees)),
      feature_names_(std::move(feature_names)),
      params_(params),
      base_rate_(base_rate) {}

double Forest::predict_proba(std::span<const double> x) const {
  if (x.size() != n_features()) {
    fail(ErrorCode::DimensionMismatch, "expected " + std::to_string(n_features()) +
                                           " features, got " + std::to_string(x.size()));
  }
  if (trees_.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return sum / static_cast<double>(trees_.size());
}

Forest train(const Dataset& data, const ForestParams& params) {
  const std::size_t pos = data.n_positive();
  if (pos == 0 || pos == data.n_rows()) {
    fail(ErrorCode::SingleClassDataset, "training data must contain both classes");
  }
  check_params(data, params);

  const auto order = canonical_order(data, params.seed);
  std::vector<Tree> trees(params.n_trees);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  const auto worker = [&] {
    while (!failed) {
      const std::size_t t = next++;
      if (t >= params.n_trees) return;
      try {
        const auto sample = bootstrap_sample(data, order, params, t);
        trees[t] = grow_tree(data, sample, params, params.seed + t);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  const std::size_t n_threads =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, params.n_trees);
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);

  const double base_rate = static_cast<double>(pos) / static_cast<double>(data.n_rows());
  return Forest(std::move(trees), data.feature_names(), params, base_rate);
}

Metrics metrics_from(const Confusion& c) {
  Metrics m;
  m.confusion = c;
  const auto total = static_cast<double>(c.tp + c.fp + c.tn + c.fn);
  if (total > 0) m.accuracy = static_cast<double>(c.tp + c.tn) / total;
  if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (c.fp + c.tn > 0) {
    m.false_positive_rate = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  }
  return m;
}

Metrics evaluate(const Forest& forest, const Dataset& test) {
  if (test.n_rows() == 0) fail(ErrorCode::TooFewRows, "empty test set");
  Confusion c;
  for (std::size_t i = 0; i < test.n_rows(); ++i) {
    const int predicted = forest.predict(test.row(i));
    const int actual = test.label(i);
    if (predicted == 1 && actual == 1) ++c.tp;
    if (predicted == 1 && actual == 0) ++c.fp;
    if (predicted == 0 && actual == 0) ++c.tn;
    if (predicted == 0 && actual == 1) ++c.fn;
  }
  return metrics_from(c);
}

TrainTestSplit split_train_test(const Dataset& data, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) fail(ErrorCode::InvalidConfig, "split ratio must lie in (0, 1)");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < data.n_rows(); ++i) (data.label(i) == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) {
    fail(ErrorCode::SingleClassDataset, "cannot stratify a single-class dataset");
  }
  const auto clamp_share = [](long long want, std::size_t available) {
    if (available >= 2) return std::clamp<long long>(want, 1, static_cast<long long>(available) - 1);
    return static_cast<long long>(available);
  };
  const auto n = static_cast<double>(data.n_rows());
  const long long n_train = std::llround(ratio * n);
  const long long pos_train = clamp_share(std::llround(ratio * static_cast<double>(pos.size())), pos.size());
  const long long neg_train = clamp_share(n_train - pos_train, neg.size());

  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(pos.begin(), pos.end());
  rng.shuffle(neg.begin(), neg.end());
  TrainTestSplit out;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    (static_cast<long long>(i) < pos_train ? out.train : out.test).push_back(pos[i]);
  }
  for (std::size_t i = 0; i < neg.size(); ++i) {
    (static_cast<long long>(i) < neg_train ? out.train : out.test).push_back(neg[i]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

using nlohmann::json;

std::string forest_to_json(const Forest& forest) {
  const auto& p = forest.params();
  json doc;
  doc["format"] = "spikelens.forest";
  doc["version"] = kForestFormatVersion;
  doc["hyperparams"] = {
      {"n_trees", p.n_trees},
      {"max_depth", p.max_depth},
      {"min_samples_leaf", p.min_samples_leaf},
      {"mtry", p.mtry},
      {"seed", p.seed},
      {"class_weighting", p.class_weighting},
      {"stratified_bootstrap", p.stratified_bootstrap},
      {"bootstrap", p.bootstrap},
      {"decision_threshold", p.decision_threshold},
  };
  doc["n_features"] = forest.n_features();
  doc["feature_names"] = forest.feature_names();
  doc["base_rate"] = forest.base_rate();
  json trees = json::array();
  for (const auto& tree : forest.trees()) {
    json feature = json::array(), threshold = json::array(), left = json::array(),
         right = json::array(), value = json::array(), n_samples = json::array();
    for (const auto& n : tree.nodes()) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
      n_samples.push_back(n.n_samples);
    }
    trees.push_back({{"feature", feature},
                     {"threshold", threshold},
                     {"left", left},
                     {"right", right},
                     {"value", value},
                     {"n_samples", n_samples}});
  }
  doc["trees"] = std::move(trees);
  return doc.dump(1) + "\n";
}

Forest forest_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    fail(ErrorCode::CorruptModelFile, std::string("not a valid model document: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", std::string()) != "spikelens.forest") {
      fail(ErrorCode::CorruptModelFile, "missing format tag 'spikelens.forest'");
    }
    const json& version = doc.at("version");
    if (!version.is_number_integer() || version.get<int>() != kForestFormatVersion) {
      fail(ErrorCode::VersionMismatch, "unsupported model version " + version.dump());
    }
    const json& h = doc.at("hyperparams");
    ForestParams p;
    p.n_trees = h.at("n_trees").get<std::size_t>();
    p.max_depth = h.at("max_depth").get<std::size_t>();
    p.min_samples_leaf = h.at("min_samples_leaf").get<std::size_t>();
    p.mtry = h.at("mtry").get<std::size_t>();
    p.seed = h.at("seed").get<std::uint64_t>();
    p.class_weighting = h.at("class_weighting").get<bool>();
    p.stratified_bootstrap = h.at("stratified_bootstrap").get<bool>();
    p.bootstrap = h.at("bootstrap").get<bool>();
    p.decision_threshold = h.at("decision_threshold").get<double>();

    auto names = doc.at("feature_names").get<std::vector<std::string>>();
    const auto n_features = doc.at("n_features").get<std::size_t>();
    if (names.size() != n_features) {
      fail(ErrorCode::CorruptModelFile, "feature_names does not match n_features");
    }
    std::vector<Tree> trees;
    for (const json& t : doc.at("trees")) {
      const auto feature = t.at("feature").get<std::vector<int>>();
      const auto threshold = t.at("threshold").get<std::vector<double>>();
      const auto left = t.at("left").get<std::vector<int>>();
      const auto right = t.at("right").get<std::vector<int>>();
      const auto value = t.at("value").get<std::vector<double>>();
      const auto n_samples = t.at("n_samples").get<std::vector<std::size_t>>();
      const std::size_t n = feature.size();
      if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n ||
          n_samples.size() != n) {
        fail(ErrorCode::CorruptModelFile, "node arrays differ in length");
      }
      std::vector<TreeNode> nodes(n);
      for (std::size_t i = 0; i < n; ++i) {
        nodes[i] = TreeNode{feature[i], threshold[i], left[i], right[i], value[i], n_samples[i]};
      }
      Tree tree(std::move(nodes));
      tree.validate(n_features, ErrorCode::CorruptModelFile);
      trees.push_back(std::move(tree));
    }
    if (trees.size() != p.n_trees) fail(ErrorCode::CorruptModelFile, "tree count mismatch");
    return Forest(std::move(trees), std::move(names), p, doc.at("base_rate").get<double>());
  } catch (const json::exception& e) {
    fail(ErrorCode::CorruptModelFile, std::string("malformed model document: ") + e.what());
  }
}

void save(const Forest& forest, const std::filesystem::path& path) {
  write_file(path, forest_to_json(forest));
}

Forest load_forest(const std::filesystem::path& path) { return forest_from_json(read_file(path)); }

}  // namespace spikelens
