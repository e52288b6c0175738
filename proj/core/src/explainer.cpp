#include "spikelens/explainer.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "spikelens/error.hpp"
#include "spikelens/text.hpp"

namespace spikelens {

double conditional_expectation(const Tree& tree, std::span<const double> x, std::uint64_t subset) {
  const std::function<double(std::size_t)> visit = [&](std::size_t i) -> double {
    const TreeNode& n = tree.node(i);
    if (n.is_leaf()) return n.value;
    const auto f = static_cast<std::size_t>(n.feature);
    const auto l = static_cast<std::size_t>(n.left);
    const auto r = static_cast<std::size_t>(n.right);
    if ((subset >> f) & 1ULL) return visit(x[f] <= n.threshold ? l : r);
    const double total = static_cast<double>(n.n_samples);
    return (static_cast<double>(tree.node(l).n_samples) / total) * visit(l) +
           (static_cast<double>(tree.node(r).n_samples) / total) * visit(r);
  };
  return visit(0);
}

namespace {

// One element of the decision path: the fractions of "feature absent" and
// "feature present" subsets flowing through, and the permutation weight.
struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double weight = 0.0;
};

using Path = std::vector<PathElement>;

void extend_path(Path& path, std::size_t depth, double zero_fraction, double one_fraction,
                 int feature) {
  path.resize(depth + 1);
  path[depth] = PathElement{feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  const auto d1 = static_cast<double>(depth + 1);
  for (std::size_t i = depth; i-- > 0;) {
    path[i + 1].weight += one_fraction * path[i].weight * static_cast<double>(i + 1) / d1;
    path[i].weight = zero_fraction * path[i].weight * static_cast<double>(depth - i) / d1;
  }
}

void unwind_path(Path& path, std::size_t depth, std::size_t index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  const auto d1 = static_cast<double>(depth + 1);
  double next = path[depth].weight;
  for (std::size_t i = depth; i-- > 0;) {
    if (one_fraction != 0.0) {
      const double tmp = path[i].weight;
      path[i].weight = next * d1 / (static_cast<double>(i + 1) * one_fraction);
      next = tmp - path[i].weight * zero_fraction * static_cast<double>(depth - i) / d1;
    } else {
      path[i].weight = path[i].weight * d1 / (zero_fraction * static_cast<double>(depth - i));
    }
  }
  for (std::size_t i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
  path.resize(depth);
}

// Total permutation weight of the path with element `index` removed.
double unwound_sum(const Path& path, std::size_t depth, std::size_t index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  const auto d1 = static_cast<double>(depth + 1);
  double next = path[depth].weight;
  double total = 0.0;
  for (std::size_t i = depth; i-- > 0;) {
    if (one_fraction != 0.0) {
      const double tmp = next * d1 / (static_cast<double>(i + 1) * one_fraction);
      total += tmp;
      next = path[i].weight - tmp * zero_fraction * static_cast<double>(depth - i) / d1;
    } else {
      total += path[i].weight / (zero_fraction * static_cast<double>(depth - i) / d1);
    }
  }
  return total;
}

class TreeShap {
 public:
  TreeShap(const Tree& tree, std::span<const double> x, std::vector<double>& phi)
      : tree_(tree), x_(x), phi_(phi) {}

  void run() { recurse(0, Path{}, 0, 1.0, 1.0, -1); }

 private:
  void recurse(std::size_t node_index, Path path, std::size_t depth, double zero_fraction,
               double one_fraction, int feature) {
    extend_path(path, depth, zero_fraction, one_fraction, feature);
    const TreeNode& node = tree_.node(node_index);
    if (node.is_leaf()) {
      for (std::size_t i = 1; i <= depth; ++i) {
        const double w = unwound_sum(path, depth, i);
        const auto& el = path[i];
        phi_[static_cast<std::size_t>(el.feature)] +=
            w * (el.one_fraction - el.zero_fraction) * node.value;
      }
      return;
    }

    const auto f = static_cast<std::size_t>(node.feature);
    const auto left = static_cast<std::size_t>(node.left);
    const auto right = static_cast<std::size_t>(node.right);
    const std::size_t hot = x_[f] <= node.threshold ? left : right;
    const std::size_t cold = hot == left ? right : left;
    const auto cover = static_cast<double>(node.n_samples);
    const double hot_share = static_cast<double>(tree_.node(hot).n_samples) / cover;
    const double cold_share = static_cast<double>(tree_.node(cold).n_samples) / cover;

    // A feature already on the path is folded back out before re-entering,
    // carrying its fractions forward.
    double incoming_zero = 1.0;
    double incoming_one = 1.0;
    std::size_t next_depth = depth + 1;
    for (std::size_t k = 1; k <= depth; ++k) {
      if (path[k].feature == node.feature) {
        incoming_zero = path[k].zero_fraction;
        incoming_one = path[k].one_fraction;
        unwind_path(path, depth, k);
        next_depth = depth;
        break;
      }
    }
    recurse(hot, path, next_depth, hot_share * incoming_zero, incoming_one, node.feature);
    recurse(cold, std::move(path), next_depth, cold_share * incoming_zero, 0.0, node.feature);
  }

  const Tree& tree_;
  std::span<const double> x_;
  std::vector<double>& phi_;
};

double expected_value(const Tree& tree) {
  double total = 0.0;
  const double root = static_cast<double>(tree.node(0).n_samples);
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf()) total += n.value * (static_cast<double>(n.n_samples) / root);
  }
  return total;
}

}  // namespace

TreeAttribution explain_tree(const Tree& tree, std::span<const double> x) {
  if (tree.size() == 0) fail(ErrorCode::MalformedTree, "empty tree");
  for (const auto& n : tree.nodes()) {
    if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= x.size()) {
      fail(ErrorCode::DimensionMismatch, "tree splits on a feature beyond the query vector");
    }
  }
  tree.validate(x.size());
  TreeAttribution out;
  out.phi.assign(x.size(), 0.0);
  out.base_value = expected_value(tree);
  TreeShap(tree, x, out.phi).run();
  return out;
}

Explanation explain_forest(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.n_features()) {
    fail(ErrorCode::DimensionMismatch, "expected " + std::to_string(forest.n_features()) +
                                           " features, got " + std::to_string(x.size()));
  }
  Explanation e;
  e.phi.assign(x.size(), 0.0);
  const auto n_trees = static_cast<double>(forest.trees().size());
  for (const auto& tree : forest.trees()) {
    const auto t = explain_tree(tree, x);
    e.base_value += t.base_value;
    for (std::size_t j = 0; j < x.size(); ++j) e.phi[j] += t.phi[j];
  }
  if (n_trees > 0) {
    e.base_value /= n_trees;
    for (double& p : e.phi) p /= n_trees;
  }
  e.prediction = forest.predict_proba(x);
  return e;
}

std::vector<double> brute_force_shapley(const SubsetValue& value, std::size_t n_features) {
  if (n_features > kMaxBruteForceFeatures) {
    fail(ErrorCode::TooManyFeatures, std::to_string(n_features) + " features exceed the limit of " +
                                         std::to_string(kMaxBruteForceFeatures));
  }
  const std::uint64_t n_subsets = 1ULL << n_features;
  std::vector<double> v(n_subsets);
  for (std::uint64_t s = 0; s < n_subsets; ++s) v[s] = value(s);

  // weight[k] = k! (n - k - 1)! / n!
  std::vector<double> weight(n_features, 0.0);
  for (std::size_t k = 0; k < n_features; ++k) {
    weight[k] = std::exp(std::lgamma(static_cast<double>(k) + 1.0) +
                         std::lgamma(static_cast<double>(n_features - k)) -
                         std::lgamma(static_cast<double>(n_features) + 1.0));
  }
  std::vector<double> phi(n_features, 0.0);
  for (std::size_t i = 0; i < n_features; ++i) {
    const std::uint64_t bit = 1ULL << i;
    for (std::uint64_t s = 0; s < n_subsets; ++s) {
      if (s & bit) continue;
      const auto size = static_cast<std::size_t>(__builtin_popcountll(s));
      phi[i] += weight[size] * (v[s | bit] - v[s]);
    }
  }
  return phi;
}

std::vector<RankedFeature> rank_drivers(const Explanation& explanation,
                                        std::span<const std::string> feature_names, std::size_t k,
                                        double min_phi) {
  if (feature_names.size() != explanation.phi.size()) {
    fail(ErrorCode::DimensionMismatch, "feature names do not match the explanation");
  }
  std::vector<RankedFeature> ranked;
  for (std::size_t i = 0; i < explanation.phi.size(); ++i) {
    if (explanation.phi[i] > min_phi) ranked.push_back({i, feature_names[i], explanation.phi[i]});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedFeature& a, const RankedFeature& b) {
    if (a.phi != b.phi) return a.phi > b.phi;
    return a.name < b.name;
  });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

std::string explanations_to_csv(std::span<const Explanation> explanations,
                                std::span<const std::string> feature_names) {
  std::string out = "segment_id,base,prediction";
  for (const auto& n : feature_names) out += "," + n;
  out += "\n";
  for (const auto& e : explanations) {
    out += std::to_string(e.segment_id) + "," + format_double(e.base_value) + "," +
           format_double(e.prediction);
    for (double p : e.phi) out += "," + format_double(p);
    out += "\n";
  }
  return out;
}

std::vector<Explanation> explanations_from_csv(std::string_view text,
                                               std::vector<std::string>* feature_names) {
  auto lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) fail(ErrorCode::EmptyFile, "explanations CSV has no header");
  const auto header = split(trim(lines[0]), ',');
  if (header.size() < 3 || header[0] != "segment_id" || header[1] != "base" ||
      header[2] != "prediction") {
    fail(ErrorCode::MissingColumn, "explanations header must start segment_id,base,prediction");
  }
  if (feature_names) {
    feature_names->clear();
    for (std::size_t i = 3; i < header.size(); ++i) feature_names->emplace_back(header[i]);
  }
  std::vector<Explanation> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split(trim(lines[li]), ',');
    if (cells.size() != header.size()) fail(ErrorCode::BadNumber, "explanations: bad row width");
    Explanation e;
    auto id = parse_int(cells[0]);
    auto base = parse_double(cells[1]);
    auto pred = parse_double(cells[2]);
    if (!id || !base || !pred) fail(ErrorCode::BadNumber, "explanations: bad number");
    e.segment_id = *id;
    e.base_value = *base;
    e.prediction = *pred;
    for (std::size_t i = 3; i < cells.size(); ++i) {
      auto v = parse_double(cells[i]);
      if (!v) fail(ErrorCode::BadNumber, "explanations: bad number");
      e.phi.push_back(*v);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string explanations_to_json(std::span<const Explanation> explanations,
                                 std::span<const std::string> feature_names, std::size_t k) {
  using nlohmann::ordered_json;
  ordered_json doc = ordered_json::array();
  for (const auto& e : explanations) {
    ordered_json item;
    item["segment_id"] = e.segment_id;
    item["base_value"] = e.base_value;
    item["prediction"] = e.prediction;
    ordered_json phi = ordered_json::object();
    for (std::size_t i = 0; i < e.phi.size(); ++i) phi[feature_names[i]] = e.phi[i];
    item["phi"] = std::move(phi);
    ordered_json top = ordered_json::array();
    for (const auto& r : rank_drivers(e, feature_names, k)) {
      top.push_back({{"feature", r.name}, {"phi", r.phi}});
    }
    item["top_positive"] = std::move(top);
    doc.push_back(std::move(item));
  }
  return doc.dump(1) + "\n";
}

}  // namespace spikelens
