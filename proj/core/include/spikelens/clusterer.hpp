#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spikelens/state_space.hpp"

namespace spikelens {

/// Column-wise z-scoring. Columns with zero variance are dropped.
struct Standardizer {
  std::vector<std::size_t> kept;  // source column indices
  std::vector<std::string> names;
  std::vector<double> means;
  std::vector<double> stds;  // population standard deviation
  std::vector<std::string> dropped;

  static Standardizer fit(const Dataset& data);
  std::vector<double> transform(std::span<const double> row) const;
  std::vector<double> inverse(std::span<const double> standardized) const;
};

struct ClusterModel {
  std::size_t k = 0;
  Standardizer scaler;
  std::vector<std::vector<double>> centroids;  // standardized space, k x d
  std::vector<std::size_t> assignments;        // per input row
  double inertia = 0.0;
  std::vector<double> inertia_history;  // after each assignment step
  std::size_t iterations = 0;

  std::size_t dims() const { return scaler.kept.size(); }
  std::vector<double> raw_centroid(std::size_t c) const { return scaler.inverse(centroids[c]); }
  std::size_t cluster_size(std::size_t c) const;
};

struct KMeansOptions {
  std::size_t max_iter = 300;
  double tol = 1e-6;
  std::size_t restarts = 10;
};

// Squared Euclidean distance.
double squared_distance(std::span<const double> a, std::span<const double> b);

// Index of the nearest centroid; ties go to the lowest index.
std::size_t nearest_centroid(std::span<const double> point,
                             const std::vector<std::vector<double>>& centroids);

/// One k-means++ seeded Lloyd run. Stops when no centroid moves by `tol` or
/// more, or after max_iter updates. An empty cluster is reseeded with the
/// point farthest from its assigned centroid. Inertia is checked to be
/// non-increasing after every assignment step (Internal error otherwise).
ClusterModel fit(const Dataset& data, std::size_t k, std::uint64_t seed,
                 const KMeansOptions& options = {});

// Lowest-inertia model over options.restarts seeded runs.
ClusterModel fit_best(const Dataset& data, std::size_t k, std::uint64_t seed,
                      const KMeansOptions& options = {});

struct ElbowResult {
  std::vector<std::size_t> ks;
  std::vector<double> inertia;
  std::size_t suggested_k = 0;
};

/// Inertia curve over [k_min, k_max] (clamped to the row count) with the
/// suggestion at the largest discrete second difference
/// I(k-1) - 2 I(k) + I(k+1). Each k keeps the best of the seeded restarts
/// plus one run warm-started from the previous k's centroids and the point
/// farthest from them, so the curve never increases.
ElbowResult elbow(const Dataset& data, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                  const KMeansOptions& options = {});

std::size_t suggest_k(std::span<const std::size_t> ks, std::span<const double> inertia);

// cluster,size,<feature...> with centroids in raw units.
std::string centroids_to_csv(const ClusterModel& model);

}  // namespace spikelens
