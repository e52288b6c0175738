#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spikelens/market_data.hpp"

namespace spikelens {

struct SynthConfig {
  std::size_t days = 30;
  std::size_t channels_per_category = 1;
  std::size_t events_per_category = 10;
  std::uint64_t seed = 1;
  UnixSeconds start = 1622505600;  // 2021-06-01T00:00:00Z; must sit on an hour boundary
  // Driver deviation during an event, in baseline standard deviations. Each
  // event draws its strength from [signal_strength, 1.5 * signal_strength].
  double signal_strength = 8.0;
  // Each event perturbs two categories instead of one.
  bool compound = false;
};

struct InjectedEvent {
  std::size_t start = 0;  // driver perturbation range, inclusive
  std::size_t end = 0;
  std::size_t peak = 0;   // index of the highest price
  std::size_t core_first = 0;  // price spike points, inclusive
  std::size_t core_last = 0;
  // First entry is the event's primary category; compound events add one more.
  std::vector<DriverCategory> categories;
  double magnitude = 0.0;  // peak price minus the unperturbed price at the peak
};

/// Synthetic market scenario with known spike causes.
///
/// Every non-price channel is a daily sinusoid plus Gaussian noise around a
/// random level (DayAhead channels are hourly and step-constant). The price
/// is a base daily profile, a small linear combination of the standardized
/// channel baselines, and noise. An event shifts every channel of its
/// category(ies) by strength x baseline std over the event range and replaces
/// the price on a short core with a monotone hump: one peak well above all
/// other core points, which in turn sit above every baseline price. The core
/// budget is sized so the price 99th percentile lands between baseline and
/// peak prices, hence every peak exceeds the scenario's Q-99.
struct Scenario {
  MarketSeries series;
  ChannelSchema schema;
  std::vector<InjectedEvent> events;
  std::vector<double> baseline_std;  // per channel, before perturbation
  // All baseline prices lie strictly below this value; all core prices above.
  double spike_floor = 0.0;
  std::uint64_t seed = 0;
};

// Throws InvalidConfig for days < 2, zero channels per category, a start
// not on an hour boundary, or more events than fit below the 99th
// percentile of the scenario's prices.
Scenario generate(const SynthConfig& config);

// Grid CSV with hourly channels written only on the top-of-hour rows, so
// loading it back step-expands to the in-memory series.
std::string scenario_to_csv(const Scenario& scenario);

// event_id,start_ts,end_ts,peak_ts,categories,magnitude (categories ';'-separated)
std::string ground_truth_to_csv(const Scenario& scenario);

// Writes data.csv, schema.txt, ground_truth.csv and a ready-to-run
// pipeline.conf into `dir`.
void write_scenario(const std::filesystem::path& dir, const Scenario& scenario);

}  // namespace spikelens
