#include "spikelens/spike_detector.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "spikelens/error.hpp"

namespace spikelens {

std::optional<ThresholdMode> parse_threshold_mode(std::string_view text) {
  if (text == "fixed") return ThresholdMode::Fixed;
  if (text == "percentile") return ThresholdMode::Percentile;
  return std::nullopt;
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) fail(ErrorCode::TooFewRows, "percentile of an empty series");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = (p / 100.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Thresholds resolve_thresholds(std::span<const double> prices, const ThresholdSpec& spec) {
  Thresholds out;
  if (spec.mode == ThresholdMode::Percentile) {
    if (!(spec.moderate > 0.0 && spec.moderate < 100.0 && spec.high > 0.0 && spec.high < 100.0)) {
      fail(ErrorCode::InvalidConfig, "percentile thresholds must lie in (0, 100)");
    }
    if (!(spec.moderate < spec.high)) {
      fail(ErrorCode::InvalidConfig, "moderate percentile must be below the high percentile");
    }
    if (prices.empty()) fail(ErrorCode::TooFewRows, "empty price channel");
    out.moderate = percentile(prices, spec.moderate);
    out.high = percentile(prices, spec.high);
  } else {
    if (!(spec.moderate <= spec.high)) {
      fail(ErrorCode::InvalidConfig, "moderate threshold must not exceed the high threshold");
    }
    out.moderate = spec.moderate;
    out.high = spec.high;
  }
  out.degenerate = out.moderate == out.high;
  if (out.degenerate) {
    spdlog::warn("moderate and high thresholds coincide at {}", out.high);
  }
  return out;
}

Thresholds resolve_thresholds(const MarketSeries& series, const ThresholdSpec& spec) {
  return resolve_thresholds(series.price(), spec);
}

std::vector<std::size_t> detect_points(std::span<const double> prices, double high) {
  std::vector<std::size_t> points;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (prices[i] > high) points.push_back(i);
  }
  return points;
}

std::vector<SpikeEvent> group_events(std::span<const std::size_t> points,
                                     std::span<const double> prices, std::size_t max_gap) {
  std::vector<SpikeEvent> events;
  for (std::size_t p : points) {
    const double price = p < prices.size() ? prices[p] : 0.0;
    if (events.empty() || p - events.back().t_last > max_gap + 1) {
      events.push_back(SpikeEvent{p, p, {p}, price});
      continue;
    }
    auto& e = events.back();
    e.t_last = p;
    e.points.push_back(p);
    e.peak_value = std::max(e.peak_value, price);
  }
  return events;
}

std::vector<Segment> segment(std::size_t n, std::span<const SpikeEvent> events, std::size_t b_len,
                             std::size_t f_len) {
  std::vector<Segment> anomalous;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (n == 0 || e.t_first >= n) continue;
    const std::size_t start = e.t_first > b_len ? e.t_first - b_len : 0;
    const std::size_t end = std::min(n - 1, e.t_last + f_len);
    if (!anomalous.empty() && start <= anomalous.back().end) {
      anomalous.back().end = std::max(anomalous.back().end, end);
      continue;
    }
    anomalous.push_back(Segment{SegmentLabel::Anomalous, start, end, i});
  }

  std::vector<Segment> out;
  std::size_t cursor = 0;
  const auto tile = [&](std::size_t from, std::size_t to) {  // [from, to)
    while (to - from >= kNormalSegmentLength) {
      out.push_back(Segment{SegmentLabel::Normal, from, from + kNormalSegmentLength - 1, {}});
      from += kNormalSegmentLength;
    }
  };
  for (const auto& a : anomalous) {
    if (a.start > cursor) tile(cursor, a.start);
    out.push_back(a);
    cursor = a.end + 1;
  }
  if (cursor < n) tile(cursor, n);
  return out;
}

std::string_view to_string(Season s) {
  switch (s) {
    case Season::Winter: return "Winter";
    case Season::Spring: return "Spring";
    case Season::Summer: return "Summer";
    case Season::Fall: return "Fall";
  }
  return "Winter";
}

std::string_view to_string(Daytime d) {
  switch (d) {
    case Daytime::Morning: return "Morning";
    case Daytime::Midday: return "Midday";
    case Daytime::Evening: return "Evening";
    case Daytime::Night: return "Night";
  }
  return "Night";
}

namespace {

UnixSeconds to_local(UnixSeconds utc, double tz_offset_hours) {
  return utc + static_cast<UnixSeconds>(std::llround(tz_offset_hours * 3600.0));
}

}  // namespace

Season season_of(UnixSeconds utc, double tz_offset_hours) {
  const unsigned month = to_civil(to_local(utc, tz_offset_hours)).month;
  if (month == 12 || month <= 2) return Season::Winter;
  if (month <= 5) return Season::Spring;
  if (month <= 8) return Season::Summer;
  return Season::Fall;
}

Daytime daytime_of(UnixSeconds utc, double tz_offset_hours) {
  const int hour = to_civil(to_local(utc, tz_offset_hours)).hour;
  if (hour >= 6 && hour < 11) return Daytime::Morning;
  if (hour >= 11 && hour < 16) return Daytime::Midday;
  if (hour >= 16 && hour < 22) return Daytime::Evening;
  return Daytime::Night;
}

EventStats event_statistics(std::span<const SpikeEvent> events, const MarketSeries& series,
                            double tz_offset_hours) {
  EventStats stats;
  stats.n_events = events.size();
  std::size_t long_events = 0;
  for (const auto& e : events) {
    const UnixSeconds t = series.timestamp(e.t_first);
    const auto s = static_cast<std::size_t>(season_of(t, tz_offset_hours));
    const auto d = static_cast<std::size_t>(daytime_of(t, tz_offset_hours));
    ++stats.by_season[s];
    ++stats.by_daytime[d];
    ++stats.by_season_daytime[s][d];
    ++stats.duration_histogram[e.duration_intervals()];
    if (e.duration_intervals() > kNormalSegmentLength) ++long_events;
  }
  if (!events.empty()) {
    stats.fraction_longer_than_hour =
        static_cast<double>(long_events) / static_cast<double>(events.size());
  }
  return stats;
}

std::string events_to_csv(std::span<const SpikeEvent> events, const MarketSeries& series) {
  std::string out = "event_id,start_ts,end_ts,duration,peak\n";
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    out += std::to_string(i) + "," + format_timestamp(series.timestamp(e.t_first)) + "," +
           format_timestamp(series.timestamp(e.t_last)) + "," +
           std::to_string(e.duration_intervals()) + "," + format_double(e.peak_value) + "\n";
  }
  return out;
}

}  // namespace spikelens
