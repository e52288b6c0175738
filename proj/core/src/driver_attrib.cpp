#include "spikelens/driver_attrib.hpp"

#include <algorithm>

#include "spikelens/error.hpp"
#include "spikelens/state_space.hpp"
#include "spikelens/text.hpp"

namespace spikelens {

bool DriverReport::has(DriverCategory c) const {
  return std::find(drivers.begin(), drivers.end(), c) != drivers.end();
}

DriverReport attribute(const Explanation& explanation, std::span<const std::string> feature_names,
                       std::span<const ChannelMeta> channels, const Segment& segment,
                       const MarketSeries& series, const AttributionOptions& options) {
  DriverReport report;
  report.segment_id = explanation.segment_id;
  std::array<bool, 6> seen{};
  for (const auto& ranked :
       rank_drivers(explanation, feature_names, options.top_k, options.min_phi)) {
    const auto parsed = parse_feature_name(ranked.name);
    if (!parsed) fail(ErrorCode::UnknownChannel, "cannot parse feature name '" + ranked.name + "'");
    const auto it = std::find_if(channels.begin(), channels.end(),
                                 [&](const ChannelMeta& m) { return m.name == parsed->channel; });
    if (it == channels.end()) {
      fail(ErrorCode::UnknownChannel, "feature '" + ranked.name + "' refers to unknown channel '" +
                                          parsed->channel + "'");
    }
    report.top_features.push_back({ranked.name, it->name, it->category, ranked.phi});
    seen[static_cast<std::size_t>(it->category)] = true;
  }
  for (DriverCategory c : kAllCategories) {
    if (seen[static_cast<std::size_t>(c)]) report.drivers.push_back(c);
  }
  const UnixSeconds mid = series.timestamp((segment.start + segment.end) / 2);
  report.season = season_of(mid, options.tz_offset_hours);
  report.daytime = daytime_of(mid, options.tz_offset_hours);
  return report;
}

DriverSummary aggregate(std::span<const DriverReport> reports) {
  DriverSummary s;
  s.n_segments = reports.size();
  for (const auto& r : reports) {
    if (r.drivers.empty()) ++s.n_unattributed;
    for (DriverCategory c : r.drivers) {
      const auto ci = static_cast<std::size_t>(c);
      ++s.segments_with[ci];
      ++s.by_season_daytime[ci][static_cast<std::size_t>(r.season)]
                           [static_cast<std::size_t>(r.daytime)];
    }
    std::array<std::vector<std::string>, 6> channels_here;
    for (const auto& f : r.top_features) {
      auto& list = channels_here[static_cast<std::size_t>(f.category)];
      if (std::find(list.begin(), list.end(), f.channel) == list.end()) list.push_back(f.channel);
    }
    for (std::size_t ci = 0; ci < 6; ++ci) {
      for (const auto& ch : channels_here[ci]) ++s.channel_counts[ci][ch];
    }
  }
  for (std::size_t ci = 0; ci < 6; ++ci) {
    s.percent[ci] = s.n_segments == 0 ? 0.0
                                      : 100.0 * static_cast<double>(s.segments_with[ci]) /
                                            static_cast<double>(s.n_segments);
  }
  return s;
}

std::string drivers_to_csv(const DriverSummary& summary) {
  std::string out = "category,segments,pct\n";
  for (DriverCategory c : kAllCategories) {
    const auto ci = static_cast<std::size_t>(c);
    out += std::string(to_string(c)) + "," + std::to_string(summary.segments_with[ci]) + "," +
           format_fixed(summary.percent[ci], 2) + "\n";
  }
  return out;
}

std::string drivers_by_season_daytime_to_csv(const DriverSummary& summary) {
  std::string out = "category,season,daytime,segments,pct\n";
  for (DriverCategory c : kAllCategories) {
    const auto ci = static_cast<std::size_t>(c);
    for (Season s : kAllSeasons) {
      for (Daytime d : kAllDaytimes) {
        const std::size_t count =
            summary.by_season_daytime[ci][static_cast<std::size_t>(s)][static_cast<std::size_t>(d)];
        const double pct = summary.n_segments == 0
                               ? 0.0
                               : 100.0 * static_cast<double>(count) /
                                     static_cast<double>(summary.n_segments);
        out += std::string(to_string(c)) + "," + std::string(to_string(s)) + "," +
               std::string(to_string(d)) + "," + std::to_string(count) + "," +
               format_fixed(pct, 2) + "\n";
      }
    }
  }
  return out;
}

}  // namespace spikelens
