#include "spikelens/clusterer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "spikelens/error.hpp"
#include "spikelens/rng.hpp"
#include "spikelens/text.hpp"

namespace spikelens {

Standardizer Standardizer::fit(const Dataset& data) {
  Standardizer s;
  const auto n = static_cast<double>(data.n_rows());
  for (std::size_t c = 0; c < data.n_features(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < data.n_rows(); ++r) sum += data.at(r, c);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
      ss += (data.at(r, c) - mean) * (data.at(r, c) - mean);
    }
    const double sd = std::sqrt(ss / n);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      s.dropped.push_back(data.feature_names()[c]);
      continue;
    }
    s.kept.push_back(c);
    s.names.push_back(data.feature_names()[c]);
    s.means.push_back(mean);
    s.stds.push_back(sd);
  }
  if (!s.dropped.empty()) {
    spdlog::warn("clustering drops {} zero-variance feature(s)", s.dropped.size());
  }
  return s;
}

std::vector<double> Standardizer::transform(std::span<const double> row) const {
  std::vector<double> out(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) out[j] = (row[kept[j]] - means[j]) / stds[j];
  return out;
}

std::vector<double> Standardizer::inverse(std::span<const double> standardized) const {
  std::vector<double> out(standardized.size());
  for (std::size_t j = 0; j < standardized.size(); ++j) {
    out[j] = standardized[j] * stds[j] + means[j];
  }
  return out;
}

std::size_t ClusterModel::cluster_size(std::size_t c) const {
  return static_cast<std::size_t>(std::count(assignments.begin(), assignments.end(), c));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

std::size_t nearest_centroid(std::span<const double> point,
                             const std::vector<std::vector<double>>& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(point, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

namespace {

using Points = std::vector<std::vector<double>>;
using Centroids = std::vector<std::vector<double>>;

Points standardize(const Dataset& data, const Standardizer& scaler) {
  Points pts;
  pts.reserve(data.n_rows());
  for (std::size_t r = 0; r < data.n_rows(); ++r) pts.push_back(scaler.transform(data.row(r)));
  return pts;
}

Centroids kmeans_plus_plus(const Points& pts, std::size_t k, Rng& rng) {
  Centroids centroids;
  centroids.push_back(pts[rng.index(pts.size())]);
  std::vector<double> d2(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = squared_distance(pts[i], centroids[0]);
  while (centroids.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = pts.size() - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        acc += d2[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.index(pts.size());
    }
    centroids.push_back(pts[pick]);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(pts[i], centroids.back()));
    }
  }
  return centroids;
}

struct LloydResult {
  Centroids centroids;
  std::vector<std::size_t> assignments;
  double inertia = 0.0;
  std::vector<double> history;
  std::size_t iterations = 0;
};

double assign(const Points& pts, const Centroids& centroids, std::vector<std::size_t>& out) {
  double inertia = 0.0;
  out.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out[i] = nearest_centroid(pts[i], centroids);
    inertia += squared_distance(pts[i], centroids[out[i]]);
  }
  return inertia;
}

LloydResult lloyd(const Points& pts, Centroids centroids, const KMeansOptions& options) {
  LloydResult res;
  const std::size_t k = centroids.size();
  const std::size_t d = pts.empty() ? 0 : pts[0].size();
  res.inertia = assign(pts, centroids, res.assignments);
  res.history.push_back(res.inertia);
  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    Centroids next(k, std::vector<double>(d, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::size_t c = res.assignments[i];
      ++counts[c];
      for (std::size_t j = 0; j < d; ++j) next[c][j] += pts[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (double& v : next[c]) v /= static_cast<double>(counts[c]);
    }
    std::vector<bool> reseeded(pts.size(), false);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (reseeded[i]) continue;
        const double dist = squared_distance(pts[i], next[res.assignments[i]]);
        if (dist > far_d) {
          far_d = dist;
          far = i;
        }
      }
      reseeded[far] = true;
      next[c] = pts[far];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      shift = std::max(shift, std::sqrt(squared_distance(next[c], centroids[c])));
    }
    centroids = std::move(next);
    const double inertia = assign(pts, centroids, res.assignments);
    const double previous = res.history.back();
    if (inertia > previous + 1e-9 * std::max(1.0, previous)) {
      fail(ErrorCode::Internal, "k-means inertia increased from " + format_double(previous) +
                                    " to " + format_double(inertia));
    }
    res.inertia = inertia;
    res.history.push_back(inertia);
    res.iterations = iter + 1;
    if (shift < options.tol) break;
  }
  res.centroids = std::move(centroids);
  return res;
}

ClusterModel to_model(const Standardizer& scaler, LloydResult res) {
  ClusterModel m;
  m.k = res.centroids.size();
  m.scaler = scaler;
  m.centroids = std::move(res.centroids);
  m.assignments = std::move(res.assignments);
  m.inertia = res.inertia;
  m.inertia_history = std::move(res.history);
  m.iterations = res.iterations;
  return m;
}

void check_rows(const Dataset& data, std::size_t k) {
  if (k == 0) fail(ErrorCode::InvalidConfig, "k must be at least 1");
  if (data.n_rows() < k) {
    fail(ErrorCode::TooFewRows, std::to_string(data.n_rows()) + " rows cannot form " +
                                    std::to_string(k) + " clusters");
  }
}

LloydResult best_run(const Points& pts, std::size_t k, std::uint64_t seed,
                     const KMeansOptions& options, const Centroids* warm_start) {
  LloydResult best;
  bool have = false;
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(derive_seed(seed, k), r));
    auto run = lloyd(pts, kmeans_plus_plus(pts, k, rng), options);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }
  if (warm_start) {
    auto run = lloyd(pts, *warm_start, options);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

}  // namespace

ClusterModel fit(const Dataset& data, std::size_t k, std::uint64_t seed,
                 const KMeansOptions& options) {
  check_rows(data, k);
  const auto scaler = Standardizer::fit(data);
  const auto pts = standardize(data, scaler);
  Rng rng(derive_seed(derive_seed(seed, k), 0));
  return to_model(scaler, lloyd(pts, kmeans_plus_plus(pts, k, rng), options));
}

ClusterModel fit_best(const Dataset& data, std::size_t k, std::uint64_t seed,
                      const KMeansOptions& options) {
  check_rows(data, k);
  const auto scaler = Standardizer::fit(data);
  const auto pts = standardize(data, scaler);
  return to_model(scaler, best_run(pts, k, seed, options, nullptr));
}

std::size_t suggest_k(std::span<const std::size_t> ks, std::span<const double> inertia) {
  if (ks.empty()) return 0;
  if (ks.size() < 3) return ks.front();
  std::size_t best = ks[1];
  double best_curv = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
    const double curv = inertia[i - 1] - 2.0 * inertia[i] + inertia[i + 1];
    if (curv > best_curv) {
      best_curv = curv;
      best = ks[i];
    }
  }
  return best;
}

ElbowResult elbow(const Dataset& data, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                  const KMeansOptions& options) {
  ElbowResult out;
  k_min = std::max<std::size_t>(1, k_min);
  k_max = std::min(k_max, data.n_rows());
  if (k_min > k_max) {
    fail(ErrorCode::TooFewRows, "elbow range is empty for " + std::to_string(data.n_rows()) + " rows");
  }
  const auto scaler = Standardizer::fit(data);
  const auto pts = standardize(data, scaler);
  Centroids previous;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    Centroids warm;
    const Centroids* warm_ptr = nullptr;
    if (!previous.empty()) {
      warm = previous;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = squared_distance(pts[i], previous[nearest_centroid(pts[i], previous)]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      warm.push_back(pts[far]);
      warm_ptr = &warm;
    }
    auto run = best_run(pts, k, seed, options, warm_ptr);
    out.ks.push_back(k);
    out.inertia.push_back(run.inertia);
    previous = std::move(run.centroids);
  }
  out.suggested_k = suggest_k(out.ks, out.inertia);
  return out;
}

std::string centroids_to_csv(const ClusterModel& model) {
  std::string out = "cluster,size";
  for (const auto& n : model.scaler.names) out += "," + n;
  out += "\n";
  for (std::size_t c = 0; c < model.k; ++c) {
    out += std::to_string(c) + "," + std::to_string(model.cluster_size(c));
    for (double v : model.raw_centroid(c)) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

}  // namespace spikelens
