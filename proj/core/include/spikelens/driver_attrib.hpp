#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spikelens/explainer.hpp"
#include "spikelens/market_data.hpp"
#include "spikelens/spike_detector.hpp"

namespace spikelens {

struct AttributedFeature {
  std::string feature;
  std::string channel;
  DriverCategory category = DriverCategory::Others;
  double phi = 0.0;
};

struct DriverReport {
  std::int64_t segment_id = -1;
  // Distinct categories of top_features, in kAllCategories order.
  std::vector<DriverCategory> drivers;
  std::vector<AttributedFeature> top_features;
  Season season = Season::Winter;
  Daytime daytime = Daytime::Night;

  bool has(DriverCategory c) const;
};

struct AttributionOptions {
  std::size_t top_k = 5;
  double min_phi = 0.0;
  double tz_offset_hours = 0.0;
};

// Ranks the explanation's positive features, maps each feature name back to
// its channel and that channel's category. Season and daytime come from the
// segment's midpoint. Throws UnknownChannel for names that do not resolve.
DriverReport attribute(const Explanation& explanation, std::span<const std::string> feature_names,
                       std::span<const ChannelMeta> channels, const Segment& segment,
                       const MarketSeries& series, const AttributionOptions& options = {});

struct DriverSummary {
  std::size_t n_segments = 0;
  std::size_t n_unattributed = 0;  // reports with no positive feature
  std::array<std::size_t, 6> segments_with{};  // by category
  std::array<double, 6> percent{};             // segments_with / n_segments * 100
  // [category][season][daytime] -> segments
  std::array<std::array<std::array<std::size_t, 4>, 4>, 6> by_season_daytime{};
  // Per-category count of segments in which each channel appeared among the
  // top features (sub-driver drill-down).
  std::array<std::map<std::string, std::size_t>, 6> channel_counts;
};

DriverSummary aggregate(std::span<const DriverReport> reports);

// category,segments,pct  (always six rows)
std::string drivers_to_csv(const DriverSummary& summary);
// category,season,daytime,segments,pct  (6 x 4 x 4 rows; pct of all segments)
std::string drivers_by_season_daytime_to_csv(const DriverSummary& summary);

}  // namespace spikelens
