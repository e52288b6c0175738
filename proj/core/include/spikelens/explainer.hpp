#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spikelens/forest.hpp"

namespace spikelens {

/// Additive attribution of one prediction: base_value + sum(phi) == prediction.
struct Explanation {
  std::int64_t segment_id = -1;
  double base_value = 0.0;
  std::vector<double> phi;
  double prediction = 0.0;
};

struct TreeAttribution {
  double base_value = 0.0;
  std::vector<double> phi;
};

// Path-dependent conditional expectation of the tree output when only the
// features in `subset` (bit i = feature i) are known: known features route
// x, unknown ones split by the training share n_samples(child) / n_samples(node).
double conditional_expectation(const Tree& tree, std::span<const double> x, std::uint64_t subset);

// Exact Shapley values of the set function above, computed in polynomial time
// by tracking the fraction of feature subsets that reach each leaf
// (path-dependent TreeSHAP). Throws MalformedTree on inconsistent trees.
TreeAttribution explain_tree(const Tree& tree, std::span<const double> x);

// Tree attributions averaged over the ensemble, accumulated in tree order.
Explanation explain_forest(const Forest& forest, std::span<const double> x);

using SubsetValue = std::function<double(std::uint64_t subset)>;

inline constexpr std::size_t kMaxBruteForceFeatures = 20;

// phi_i = sum over S not containing i of |S|! (n - |S| - 1)! / n! * (v(S + i) - v(S)).
// Evaluates v on all 2^n subsets. Throws TooManyFeatures when n > 20.
std::vector<double> brute_force_shapley(const SubsetValue& value, std::size_t n_features);

struct RankedFeature {
  std::size_t index = 0;
  std::string name;
  double phi = 0.0;
};

// Features with phi > min_phi, largest first (equal phi: name ascending), at most k.
std::vector<RankedFeature> rank_drivers(const Explanation& explanation,
                                        std::span<const std::string> feature_names,
                                        std::size_t k = 5, double min_phi = 0.0);

// segment_id,base,prediction,<feature...>
std::string explanations_to_csv(std::span<const Explanation> explanations,
                                std::span<const std::string> feature_names);
std::vector<Explanation> explanations_from_csv(std::string_view text,
                                               std::vector<std::string>* feature_names = nullptr);

// One JSON object per segment with base, prediction, phi by feature and the
// ranked positive drivers.
std::string explanations_to_json(std::span<const Explanation> explanations,
                                 std::span<const std::string> feature_names, std::size_t k = 5);

}  // namespace spikelens
