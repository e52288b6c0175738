#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikelens/audit.hpp"
#include "spikelens/clusterer.hpp"
#include "spikelens/driver_attrib.hpp"
#include "spikelens/forest.hpp"
#include "spikelens/spike_detector.hpp"

namespace spikelens {

struct RadarAxis {
  std::size_t feature = 0;  // column in the model's standardized space
  std::string label;
  double value = 0.0;   // raw-unit centroid value
  double radius = 0.0;  // fraction of the outer ring, in [0.1, 1]
  double x = 0.0;
  double y = 0.0;
};

struct RadarLayout {
  static constexpr double kSize = 480.0;
  static constexpr double kCenter = 240.0;
  static constexpr double kOuterRadius = 160.0;
  static constexpr double kFloor = 0.1;
};

// Axis label: channel name followed by μ (mean), σ (std), δ̄ (avg_grad) or
// Δmax (max_grad).
std::string axis_label(std::string_view feature);

// Top-m standardized dimensions by |value| (ties: lower index).
std::vector<std::size_t> select_axes(std::span<const double> standardized, std::size_t m);

/// Axes of one cluster's radar chart. Axis k sits at k * 360/m degrees,
/// clockwise from vertical. Radii are min-max scaled per axis across all
/// centroids onto [0.1, 1]; an axis on which every centroid agrees is drawn
/// at 1. Throws TooFewAxes when fewer than three axes are available.
std::vector<RadarAxis> radar_axes(const ClusterModel& model, std::size_t cluster, std::size_t m = 8);

std::string radar_svg(std::string_view title, std::span<const RadarAxis> axes);
std::string radar_chart(const ClusterModel& model, std::size_t cluster, std::size_t m = 8);

struct ReportInputs {
  const MarketSeries* series = nullptr;
  std::vector<SpikeEvent> events;
  Thresholds thresholds;
  EventStats stats;
  std::size_t n_segments = 0;
  std::size_t n_anomalous_segments = 0;
  std::optional<Metrics> metrics;
  std::optional<FalsePositiveAudit> audit;
  std::optional<DriverSummary> drivers;
  std::optional<ClusterModel> clusters;
  std::optional<ElbowResult> elbow;
  std::size_t radar_axes = 8;
  std::string effective_config;
};

// Files written into the report directory, in writing order.
std::vector<std::string> report_manifest(const ReportInputs& inputs);

std::string render_summary(const ReportInputs& inputs);

/// Writes the report bundle: events.csv, drivers.csv,
/// drivers_by_season_daytime.csv, clusters.csv, radar_cluster_<i>.svg per
/// cluster (only when there are events and a cluster model),
/// effective_config.txt and summary.txt. Returns the manifest.
std::vector<std::string> render_report(const std::filesystem::path& dir,
                                       const ReportInputs& inputs);

}  // namespace spikelens
