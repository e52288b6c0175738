#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

double percentile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  const double frac = rank - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

std::vector<std::size_t> exceeding(std::span<const double> prices, double high) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (prices[i] > high) out.push_back(i);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> runs(std::span<const std::size_t> points) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  while (i < points.size()) {
    std::size_t j = i;
    while (j + 1 < points.size() && points[j + 1] == points[j] + 1) ++j;
    out.emplace_back(points[i], points[j]);
    i = j + 1;
  }
  return out;
}

NaiveStats window_stats(std::span<const double> w) {
  const double n = static_cast<double>(w.size());
  double sum = 0.0;
  for (double v : w) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : w) ss += (v - mean) * (v - mean);
  double grad_sum = 0.0;
  double best = 0.0;
  bool have = false;
  for (std::size_t i = 1; i < w.size(); ++i) {
    const double d = w[i] - w[i - 1];
    grad_sum += d;
    if (!have || std::fabs(d) > std::fabs(best)) {
      best = d;
      have = true;
    }
  }
  return {mean, std::sqrt(ss / (n - 1.0)), grad_sum / (n - 1.0), best};
}

namespace {

double gini(double pos, double total) {
  if (total <= 0.0) return 0.0;
  const double p = pos / total;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

}  // namespace

Split exhaustive_split(const spikelens::Dataset& data, std::span<const std::size_t> rows,
                       std::span<const double> weights, std::size_t min_leaf, double eps) {
  double total = 0.0, total_pos = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    total += weights[i];
    if (data.label(rows[i]) == 1) total_pos += weights[i];
  }
  const double parent = gini(total_pos, total);

  struct Candidate {
    std::size_t feature;
    double threshold;
    double decrease;
  };
  std::vector<Candidate> all;
  for (std::size_t f = 0; f < data.n_features(); ++f) {
    std::vector<double> values;
    for (std::size_t r : rows) values.push_back(data.at(r, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      const double t = values[k] + (values[k + 1] - values[k]) / 2.0;
      double lw = 0.0, lp = 0.0, rw = 0.0, rp = 0.0;
      std::size_t ln = 0, rn = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool pos = data.label(rows[i]) == 1;
        if (data.at(rows[i], f) <= t) {
          lw += weights[i];
          lp += pos ? weights[i] : 0.0;
          ++ln;
        } else {
          rw += weights[i];
          rp += pos ? weights[i] : 0.0;
          ++rn;
        }
      }
      if (ln < min_leaf || rn < min_leaf) continue;
      all.push_back({f, t, parent - lw / total * gini(lp, lw) - rw / total * gini(rp, rw)});
    }
  }
  Split best;
  if (all.empty()) return best;
  double top = all.front().decrease;
  for (const auto& c : all) top = std::max(top, c.decrease);
  // Lowest (feature, threshold) among candidates within eps of the maximum.
  for (const auto& c : all) {
    if (c.decrease < top - eps) continue;
    if (!best.found || c.feature < best.feature ||
        (c.feature == best.feature && c.threshold < best.threshold)) {
      best = {true, c.feature, c.threshold, c.decrease};
    }
  }
  return best;
}

double forest_mean(const spikelens::Forest& forest, std::span<const double> x) {
  double sum = 0.0;
  for (const auto& tree : forest.trees()) {
    std::size_t i = 0;
    while (!tree.node(i).is_leaf()) {
      const auto& n = tree.node(i);
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    sum += tree.node(i).value;
  }
  return sum / static_cast<double>(forest.trees().size());
}

namespace {

double value_at(const spikelens::Tree& tree, std::size_t i, std::span<const double> x,
                std::uint64_t subset) {
  const auto& n = tree.node(i);
  if (n.is_leaf()) return n.value;
  const auto f = static_cast<std::size_t>(n.feature);
  const auto l = static_cast<std::size_t>(n.left);
  const auto r = static_cast<std::size_t>(n.right);
  if ((subset >> f) & 1U) return value_at(tree, x[f] <= n.threshold ? l : r, x, subset);
  const double wl = static_cast<double>(tree.node(l).n_samples) / static_cast<double>(n.n_samples);
  const double wr = static_cast<double>(tree.node(r).n_samples) / static_cast<double>(n.n_samples);
  return wl * value_at(tree, l, x, subset) + wr * value_at(tree, r, x, subset);
}

}  // namespace

double tree_value(const spikelens::Tree& tree, std::span<const double> x, std::uint64_t subset) {
  return value_at(tree, 0, x, subset);
}

}  // namespace oracle
