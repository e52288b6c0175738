#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spikelens/market_data.hpp"

namespace spikelens {

enum class ThresholdMode { Fixed, Percentile };

std::optional<ThresholdMode> parse_threshold_mode(std::string_view text);

/// Moderate and high spike thresholds. Under Fixed the values are prices in
/// $/MWh; under Percentile they are percentiles in (0, 100).
struct ThresholdSpec {
  ThresholdMode mode = ThresholdMode::Percentile;
  double moderate = 95.0;
  double high = 99.0;
};

struct Thresholds {
  double moderate = 0.0;
  double high = 0.0;
  // moderate == high after resolution (e.g. a constant price channel).
  bool degenerate = false;
};

// Linear interpolation between order statistics at zero-based rank
// (p / 100) * (n - 1). Throws TooFewRows on empty input.
double percentile(std::span<const double> values, double p);

Thresholds resolve_thresholds(std::span<const double> prices, const ThresholdSpec& spec);
Thresholds resolve_thresholds(const MarketSeries& series, const ThresholdSpec& spec);

// Indices whose price strictly exceeds `high`, ascending.
std::vector<std::size_t> detect_points(std::span<const double> prices, double high);

struct SpikeEvent {
  std::size_t t_first = 0;
  std::size_t t_last = 0;
  std::vector<std::size_t> points;
  double peak_value = 0.0;

  std::size_t duration_intervals() const { return t_last - t_first + 1; }
  bool operator==(const SpikeEvent&) const = default;
};

// Maximal runs of spike points become events. Two neighbouring points stay in
// one event when at most `max_gap` non-spike intervals separate them; with the
// default 0 any gap starts a new event.
std::vector<SpikeEvent> group_events(std::span<const std::size_t> points,
                                     std::span<const double> prices, std::size_t max_gap = 0);

enum class SegmentLabel { Normal, Anomalous };

struct Segment {
  SegmentLabel label = SegmentLabel::Normal;
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  // Index of the (earliest) event an anomalous segment was built from.
  std::optional<std::size_t> source_event;

  std::size_t length() const { return end - start + 1; }
  bool anomalous() const { return label == SegmentLabel::Anomalous; }
  bool operator==(const Segment&) const = default;
};

inline constexpr std::size_t kNormalSegmentLength = 12;

/// Cuts [0, n) into labelled segments. Each event yields the window
/// [t_first - b_len, t_last + f_len] clipped to the series; overlapping
/// windows merge. The uncovered stretches between anomalous windows are
/// tiled left to right with 12-interval normal segments; a remainder shorter
/// than 12 intervals is left unassigned. Output is in chronological order.
std::vector<Segment> segment(std::size_t n, std::span<const SpikeEvent> events, std::size_t b_len,
                             std::size_t f_len);

enum class Season { Winter, Spring, Summer, Fall };
enum class Daytime { Morning, Midday, Evening, Night };

inline constexpr std::array<Season, 4> kAllSeasons = {Season::Winter, Season::Spring,
                                                      Season::Summer, Season::Fall};
inline constexpr std::array<Daytime, 4> kAllDaytimes = {Daytime::Morning, Daytime::Midday,
                                                        Daytime::Evening, Daytime::Night};

std::string_view to_string(Season s);
std::string_view to_string(Daytime d);

// Local time = UTC + tz_offset_hours. Winter = Dec-Feb, Spring = Mar-May,
// Summer = Jun-Aug, Fall = Sep-Nov. Morning [06,11), Midday [11,16),
// Evening [16,22), Night [22,06).
Season season_of(UnixSeconds utc, double tz_offset_hours);
Daytime daytime_of(UnixSeconds utc, double tz_offset_hours);

struct EventStats {
  std::size_t n_events = 0;
  std::array<std::size_t, 4> by_season{};
  std::array<std::size_t, 4> by_daytime{};
  std::array<std::array<std::size_t, 4>, 4> by_season_daytime{};  // [season][daytime]
  std::map<std::size_t, std::size_t> duration_histogram;           // intervals -> events
  double fraction_longer_than_hour = 0.0;                          // duration > 12 intervals
};

// Each event is bucketed by the local time of its first spike point.
EventStats event_statistics(std::span<const SpikeEvent> events, const MarketSeries& series,
                            double tz_offset_hours);

// event_id,start_ts,end_ts,duration,peak
std::string events_to_csv(std::span<const SpikeEvent> events, const MarketSeries& series);

}  // namespace spikelens
